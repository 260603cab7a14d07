//! Simulation traces and the invariants every trace must satisfy.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cert::{CertKind, ContributionContext, ContributionLedger};
use crate::config::DelayMode;
use crate::error::{Error, Result};
use crate::leader::LeaderMap;
use crate::sync::SyncKind;
use crate::time::Time;
use crate::types::{MessageKind, NodeId, TimerId, View};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Start {
        view: View,
    },
    /// `view` is the node's current view when it asked to advance.
    Wish {
        view: View,
    },
    /// One record per recipient; a multicast produces `n` records sharing a
    /// `msg_id`.
    Send {
        msg_id: u64,
        to: NodeId,
        kind: MessageKind,
        view: View,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        signers: Option<Vec<NodeId>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        to_leader: Option<bool>,
        deliver_at: Time,
    },
    Deliver {
        msg_id: u64,
        from: NodeId,
        kind: MessageKind,
        view: View,
    },
    Timer {
        timer: TimerId,
    },
    ProposeView {
        view: View,
    },
    Crash,
    /// A corrupt node tried to send a certificate that does not verify.
    ForgeryRejected {
        kind: MessageKind,
        view: View,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub time: Time,
    pub node: NodeId,
    #[serde(flatten)]
    pub event: TraceEvent,
}

/// The run parameters a trace needs to be interpreted on its own.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub synchronizer: SyncKind,
    pub n: usize,
    pub f: usize,
    pub delta: Time,
    pub gst: Time,
    pub horizon: Time,
    pub c: Time,
    pub wish_interval: Time,
    pub beta: Time,
    pub seed: u64,
    pub delay_mode: DelayMode,
    pub leaders: LeaderMap,
    /// Corrupt nodes and the name of their behavior.
    pub corrupt: BTreeMap<NodeId, String>,
    pub start_times: Vec<Time>,
    pub initial_views: Vec<View>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub meta: TraceMeta,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn is_honest(&self, node: NodeId) -> bool {
        !self.meta.corrupt.contains_key(&node)
    }

    pub fn honest_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        NodeId::all(self.meta.n).filter(|&p| self.is_honest(p))
    }

    /// Honest `proposeView` records as `(record index, time, node, view)`.
    pub fn honest_proposals(&self) -> impl Iterator<Item = (usize, Time, NodeId, View)> + '_ {
        self.records.iter().enumerate().filter_map(|(i, r)| match r.event {
            TraceEvent::ProposeView { view } if self.is_honest(r.node) => Some((i, r.time, r.node, view)),
            _ => None,
        })
    }

    /// Number of point-to-point messages sent by honest nodes.
    pub fn honest_sends(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r.event, TraceEvent::Send { .. }) && self.is_honest(r.node))
            .count()
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer(&mut w, &serde_json::json!({ "meta": self.meta }))?;
        writeln!(w).map_err(|source| Error::Io { path: "<trace>".into(), source })?;
        for record in &self.records {
            serde_json::to_writer(&mut w, record)?;
            writeln!(w).map_err(|source| Error::Io { path: "<trace>".into(), source })?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    /// Runs every trace invariant, reporting the first violation.
    pub fn check_all(&self) -> Result<()> {
        self.check_delivery_bound()?;
        self.check_no_early_activity()?;
        self.check_monotone_views()?;
        self.check_unforgeability()?;
        if self.meta.synchronizer == SyncKind::Cogsworth {
            self.check_escalation_budget()?;
        }
        if self.meta.synchronizer == SyncKind::Doubling {
            self.check_message_free()?;
        }
        Ok(())
    }

    /// Every delivery happens after its send and no later than
    /// `max(send, GST) + δ`, or the recipient's start time if that is later.
    pub fn check_delivery_bound(&self) -> Result<()> {
        let mut sends: BTreeMap<(u64, NodeId), (Time, NodeId)> = BTreeMap::new();
        for r in &self.records {
            match r.event {
                TraceEvent::Send { msg_id, to, deliver_at, .. } => {
                    let bound = r.time.max(self.meta.gst) + self.meta.delta;
                    let bound = bound.max(self.meta.start_times[to.slot()]);
                    if deliver_at <= r.time || deliver_at > bound {
                        return Err(invariant(format!("message {msg_id} to {to} scheduled at {deliver_at}, bound {bound}")));
                    }
                    sends.insert((msg_id, to), (deliver_at, r.node));
                }
                TraceEvent::Deliver { msg_id, from, .. } => match sends.get(&(msg_id, r.node)) {
                    Some(&(at, sender)) if at == r.time && sender == from => {}
                    _ => return Err(invariant(format!("delivery of {msg_id} to {} at {} has no matching send", r.node, r.time))),
                },
                _ => {}
            }
        }
        Ok(())
    }

    pub fn check_no_early_activity(&self) -> Result<()> {
        let mut started = BTreeSet::new();
        for r in &self.records {
            match r.event {
                TraceEvent::Start { .. } => {
                    started.insert(r.node);
                }
                TraceEvent::Crash => {}
                _ if !started.contains(&r.node) && self.is_honest(r.node) => {
                    return Err(invariant(format!("node {} active at {} before starting", r.node, r.time)));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Honest nodes propose strictly increasing views.
    pub fn check_monotone_views(&self) -> Result<()> {
        let mut last: BTreeMap<NodeId, View> = BTreeMap::new();
        for (_, time, node, view) in self.honest_proposals() {
            if let Some(&prev) = last.get(&node) {
                if view <= prev {
                    return Err(invariant(format!("node {node} proposed {view} after {prev} at {time}")));
                }
            }
            last.insert(node, view);
        }
        Ok(())
    }

    /// Every certificate sent carries, for each honest signer, a matching
    /// contribution sent earlier in the trace.
    pub fn check_unforgeability(&self) -> Result<()> {
        let mut ledger = ContributionLedger::new(self.meta.corrupt.keys().copied());
        for r in &self.records {
            if let TraceEvent::Send { kind, view, signers, .. } = &r.event {
                ledger.record(r.node, *kind, *view);
                let cert_kind = match kind {
                    MessageKind::Tc => CertKind::Tc,
                    MessageKind::Qc => CertKind::Qc,
                    _ => continue,
                };
                let signers = signers.as_deref().unwrap_or_default();
                if signers.len() < cert_kind.threshold(self.meta.f) {
                    return Err(invariant(format!("{kind}({view}) from {} below threshold", r.node)));
                }
                if let Some(s) = signers.iter().find(|&&s| !ledger.is_corrupt(s) && !ledger.contributed(s, cert_kind, *view)) {
                    return Err(invariant(format!("{kind}({view}) from {} names {s} without a contribution", r.node)));
                }
            }
        }
        Ok(())
    }

    /// An honest Cogsworth node contacts at most f+2 leaders per view, all
    /// of them leaders of views `v..=v+f+1`.
    pub fn check_escalation_budget(&self) -> Result<()> {
        let f = self.meta.f as u64;
        let mut contacted: BTreeMap<(NodeId, MessageKind, View), BTreeSet<NodeId>> = BTreeMap::new();
        for r in &self.records {
            let TraceEvent::Send { to, kind, view, to_leader, .. } = r.event else { continue };
            let relayed = kind == MessageKind::Wish || (kind == MessageKind::Tc && to_leader == Some(true));
            if !relayed || !self.is_honest(r.node) {
                continue;
            }
            if !self.meta.leaders.leads_any(to, view, view + f + 1) {
                return Err(invariant(format!("{} sent {kind}({view}) to non-window node {to}", r.node)));
            }
            let set = contacted.entry((r.node, kind, view)).or_default();
            set.insert(to);
            if set.len() as u64 > f + 2 {
                return Err(invariant(format!("{} escalated {kind}({view}) past f+1 leaders", r.node)));
            }
        }
        Ok(())
    }

    pub fn check_message_free(&self) -> Result<()> {
        match self.records.iter().find(|r| matches!(r.event, TraceEvent::Send { .. })) {
            Some(r) => Err(invariant(format!("view doubling node {} sent a message at {}", r.node, r.time))),
            None => Ok(()),
        }
    }
}

fn invariant(msg: String) -> Error {
    Error::Invariant(msg)
}
