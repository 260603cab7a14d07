//! Leader-relayed view synchronization.
//!
//! Replicas send their wish for view `v` to `leader(v)` only. A leader that
//! collects f+1 wishes multicasts a time certificate (TC); replicas answer
//! with votes, and 2f+1 votes become a quorum certificate (QC) whose receipt
//! moves a replica into `v`. When a leader stays silent for 2δ, a replica
//! enlists the leaders of `v+1, …, v+f+1` one at a time; at least one of
//! them is honest.
//!
//! Escalation counters hold the next view whose leader to enlist. They are
//! initialised to `v+1` on the first send for `v` and may reach `v+f+1`
//! inclusive.

use std::collections::{BTreeMap, BTreeSet};

use crate::cert::{form_certificate, CertKind, Certificate};
use crate::leader::LeaderMap;
use crate::time::Time;
use crate::types::{Action, Message, NodeId, Payload, TimerId, View};

use super::Synchronizer;

/// An outstanding wish or vote awaiting its certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pending {
    pub view: View,
    pub last_sent: Time,
}

/// Replica-role state.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CogsworthState {
    pub curr: View,
    pub attempted_tc: View,
    pub attempted_qc: View,
    pub pending_wish: Option<Pending>,
    pub pending_vote: Option<Pending>,
    pub held_tc: BTreeMap<View, Certificate>,
}

/// Leader-role state, shared by every view this node leads.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CogsworthLeaderState {
    pub wish_tallies: BTreeMap<View, BTreeSet<NodeId>>,
    pub vote_tallies: BTreeMap<View, BTreeSet<NodeId>>,
    pub tc_sent: BTreeSet<View>,
    pub qc_sent: BTreeSet<View>,
}

pub struct CogsworthNode {
    id: NodeId,
    f: usize,
    delta: Time,
    leaders: LeaderMap,
    replica: CogsworthState,
    leader: CogsworthLeaderState,
}

impl CogsworthNode {
    pub fn new(id: NodeId, f: usize, delta: Time, leaders: LeaderMap) -> Self {
        CogsworthNode {
            id,
            f,
            delta,
            leaders,
            replica: CogsworthState::default(),
            leader: CogsworthLeaderState::default(),
        }
    }

    pub fn replica_state(&self) -> &CogsworthState {
        &self.replica
    }

    pub fn leader_state(&self) -> &CogsworthLeaderState {
        &self.leader
    }

    fn timeout(&self) -> Time {
        self.delta * 2
    }

    fn last_window_view(&self, view: View) -> View {
        view.saturating_add(self.f as u64 + 1)
    }

    /// Sender leads some view in `view..=view+f+1`.
    fn sent_by_window_leader(&self, view: View, from: NodeId) -> bool {
        self.leaders.leads_any(from, view, self.last_window_view(view))
    }

    fn cert_ok(&self, cert: &Certificate, kind: CertKind, view: View) -> bool {
        cert.kind == kind && cert.view == view && cert.meets_threshold(self.f)
    }

    pub fn on_wish_to_advance(&mut self, now: Time, out: &mut Vec<Action>) {
        let view = self.replica.curr + 1;
        out.push(Action::Send { to: self.leaders.leader_of(view), msg: Message::wish(self.id, view) });
        if self.replica.pending_wish.map(|p| p.view) != Some(view) {
            self.replica.attempted_tc = view + 1;
        }
        self.replica.pending_wish = Some(Pending { view, last_sent: now });
        out.push(Action::SetTimer { timer: TimerId::TcRetry, deadline: now + self.timeout() });
    }

    pub fn on_receive_tc(&mut self, now: Time, cert: &Certificate, from: NodeId, out: &mut Vec<Action>) {
        let view = cert.view;
        if !self.cert_ok(cert, CertKind::Tc, view) || !self.sent_by_window_leader(view, from) {
            return;
        }
        out.push(Action::Send { to: self.leaders.leader_of(view), msg: Message::tc(self.id, cert.clone(), true) });
        out.push(Action::Send { to: from, msg: Message::vote(self.id, view) });
        if view <= self.replica.curr {
            return;
        }
        self.replica.held_tc.entry(view).or_insert_with(|| cert.clone());
        if self.replica.pending_wish.map(|p| p.view) == Some(view) {
            self.replica.pending_wish = None;
            out.push(Action::CancelTimer { timer: TimerId::TcRetry });
        }
        let pending = self.replica.pending_vote.map(|p| p.view);
        if pending.is_none_or(|p| p <= view) {
            if pending != Some(view) {
                self.replica.attempted_qc = view + 1;
            }
            self.replica.pending_vote = Some(Pending { view, last_sent: now });
            out.push(Action::SetTimer { timer: TimerId::QcRetry, deadline: now + self.timeout() });
        }
    }

    pub fn on_tc_timeout(&mut self, now: Time, out: &mut Vec<Action>) {
        let Some(pending) = self.replica.pending_wish else { return };
        let view = pending.view;
        if view <= self.replica.curr || self.replica.held_tc.contains_key(&view) {
            self.replica.pending_wish = None;
            return;
        }
        if self.replica.attempted_tc > self.last_window_view(view) {
            return;
        }
        let target = self.leaders.leader_of(self.replica.attempted_tc);
        out.push(Action::Send { to: target, msg: Message::wish(self.id, view) });
        self.replica.attempted_tc += 1;
        self.replica.pending_wish = Some(Pending { view, last_sent: now });
        out.push(Action::SetTimer { timer: TimerId::TcRetry, deadline: now + self.timeout() });
    }

    pub fn on_receive_qc(&mut self, cert: &Certificate, from: NodeId, out: &mut Vec<Action>) {
        let view = cert.view;
        if view <= self.replica.curr || !self.cert_ok(cert, CertKind::Qc, view) || !self.sent_by_window_leader(view, from) {
            return;
        }
        let r = &mut self.replica;
        r.curr = view;
        r.attempted_tc = r.attempted_tc.max(view);
        r.attempted_qc = r.attempted_qc.max(view);
        out.push(Action::ProposeView { view });
        if r.pending_wish.is_some_and(|p| p.view <= view) {
            r.pending_wish = None;
            out.push(Action::CancelTimer { timer: TimerId::TcRetry });
        }
        if r.pending_vote.is_some_and(|p| p.view <= view) {
            r.pending_vote = None;
            out.push(Action::CancelTimer { timer: TimerId::QcRetry });
        }
        r.held_tc.retain(|&v, _| v > view);
    }

    pub fn on_vote_timeout(&mut self, now: Time, out: &mut Vec<Action>) {
        let Some(pending) = self.replica.pending_vote else { return };
        let view = pending.view;
        if view <= self.replica.curr {
            self.replica.pending_vote = None;
            return;
        }
        if self.replica.attempted_qc > self.last_window_view(view) {
            return;
        }
        let cert = self
            .replica
            .held_tc
            .get(&view)
            .cloned()
            .expect("a vote is only pending after its TC was received");
        let target = self.leaders.leader_of(self.replica.attempted_qc);
        out.push(Action::Send { to: target, msg: Message::vote(self.id, view) });
        out.push(Action::Send { to: target, msg: Message::tc(self.id, cert, true) });
        self.replica.attempted_qc += 1;
        self.replica.pending_vote = Some(Pending { view, last_sent: now });
        out.push(Action::SetTimer { timer: TimerId::QcRetry, deadline: now + self.timeout() });
    }

    /// This node leads some `r` with `r − (f+1) ≤ view ≤ r`.
    fn leads_window(&self, view: View) -> bool {
        self.leaders.leads_any(self.id, view, self.last_window_view(view))
    }

    /// Leader role: a wish, or a relayed TC which already proves f+1 wishes.
    pub fn leader_on_wish_or_tc(&mut self, view: View, from: NodeId, relayed: Option<&Certificate>, out: &mut Vec<Action>) {
        if !self.leads_window(view) || self.leader.tc_sent.contains(&view) {
            return;
        }
        let cert = match relayed {
            Some(cert) if self.cert_ok(cert, CertKind::Tc, view) => cert.clone(),
            Some(_) => return,
            None => {
                let tally = self.leader.wish_tallies.entry(view).or_default();
                tally.insert(from);
                match form_certificate(CertKind::Tc, view, tally.iter().map(|&s| (s, view)), self.f) {
                    Ok(cert) => cert,
                    Err(_) => return,
                }
            }
        };
        self.leader.tc_sent.insert(view);
        self.leader.wish_tallies.remove(&view);
        out.push(Action::Multicast { msg: Message::tc(self.id, cert, false) });
    }

    pub fn leader_on_vote(&mut self, view: View, from: NodeId, out: &mut Vec<Action>) {
        if !self.leads_window(view) || self.leader.qc_sent.contains(&view) {
            return;
        }
        let tally = self.leader.vote_tallies.entry(view).or_default();
        tally.insert(from);
        if let Ok(cert) = form_certificate(CertKind::Qc, view, tally.iter().map(|&s| (s, view)), self.f) {
            self.leader.qc_sent.insert(view);
            self.leader.vote_tallies.remove(&view);
            out.push(Action::Multicast { msg: Message::qc(self.id, cert) });
        }
    }
}

impl Synchronizer for CogsworthNode {
    fn start(&mut self, _now: Time, _out: &mut Vec<Action>) {}

    fn wish_to_advance(&mut self, now: Time, out: &mut Vec<Action>) {
        self.on_wish_to_advance(now, out);
    }

    fn deliver(&mut self, now: Time, msg: &Message, out: &mut Vec<Action>) {
        match &msg.payload {
            Payload::Wish => self.leader_on_wish_or_tc(msg.view, msg.sender, None, out),
            Payload::Tc { cert, to_leader: true } if cert.view == msg.view => {
                self.leader_on_wish_or_tc(msg.view, msg.sender, Some(cert), out)
            }
            Payload::Tc { cert, to_leader: false } if cert.view == msg.view => {
                self.on_receive_tc(now, cert, msg.sender, out)
            }
            Payload::Vote => self.leader_on_vote(msg.view, msg.sender, out),
            Payload::Qc { cert } if cert.view == msg.view => self.on_receive_qc(cert, msg.sender, out),
            _ => {}
        }
    }

    fn timer_fired(&mut self, now: Time, timer: TimerId, out: &mut Vec<Action>) {
        match timer {
            TimerId::TcRetry => self.on_tc_timeout(now, out),
            TimerId::QcRetry => self.on_vote_timeout(now, out),
            TimerId::ViewDuration => {}
        }
    }

    fn current_view(&self) -> View {
        self.replica.curr
    }
}
