//! Domain types shared by every synchronizer and the simulator.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cert::Certificate;
use crate::time::Time;

/// A view number. Views start at 0 and never decrease at a node.
pub type View = u64;

/// A node identifier in `1..=n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }

    /// Zero-based slot for vector indexing.
    pub(crate) fn slot(self) -> usize {
        self.0 - 1
    }

    pub fn all(n: usize) -> impl Iterator<Item = NodeId> {
        (1..=n).map(NodeId)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MessageKind {
    Wish,
    Tc,
    Vote,
    Qc,
    NewRound,
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MessageKind::Wish => "WISH",
            MessageKind::Tc => "TC",
            MessageKind::Vote => "VOTE",
            MessageKind::Qc => "QC",
            MessageKind::NewRound => "NEWROUND",
        };
        f.write_str(s)
    }
}

/// Message body. Certificates travel inside `Tc` and `Qc`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Wish,
    Vote,
    NewRound,
    /// `to_leader` separates a replica relaying a TC to a leader (forward or
    /// escalation) from a leader multicasting it to replicas.
    Tc { cert: Certificate, to_leader: bool },
    Qc { cert: Certificate },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub sender: NodeId,
    pub view: View,
    pub payload: Payload,
}

impl Message {
    pub fn wish(sender: NodeId, view: View) -> Self {
        Message { sender, view, payload: Payload::Wish }
    }

    pub fn vote(sender: NodeId, view: View) -> Self {
        Message { sender, view, payload: Payload::Vote }
    }

    pub fn new_round(sender: NodeId, view: View) -> Self {
        Message { sender, view, payload: Payload::NewRound }
    }

    pub fn tc(sender: NodeId, cert: Certificate, to_leader: bool) -> Self {
        Message { sender, view: cert.view, payload: Payload::Tc { cert, to_leader } }
    }

    pub fn qc(sender: NodeId, cert: Certificate) -> Self {
        Message { sender, view: cert.view, payload: Payload::Qc { cert } }
    }

    pub fn kind(&self) -> MessageKind {
        match self.payload {
            Payload::Wish => MessageKind::Wish,
            Payload::Vote => MessageKind::Vote,
            Payload::NewRound => MessageKind::NewRound,
            Payload::Tc { .. } => MessageKind::Tc,
            Payload::Qc { .. } => MessageKind::Qc,
        }
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match &self.payload {
            Payload::Tc { cert, .. } | Payload::Qc { cert } => Some(cert),
            _ => None,
        }
    }
}

/// Timers a synchronizer may arm. Deadlines are absolute; re-arming a timer
/// replaces its previous deadline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimerId {
    ViewDuration,
    TcRetry,
    QcRetry,
}

/// Output of a synchronizer step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Send { to: NodeId, msg: Message },
    /// Send to all `n` nodes, the sender included.
    Multicast { msg: Message },
    SetTimer { timer: TimerId, deadline: Time },
    CancelTimer { timer: TimerId },
    ProposeView { view: View },
}
