//! The synchronizer contract and its three implementations.
//!
//! A synchronizer is a deterministic state machine. It receives
//! `wish_to_advance` calls from the layer above, messages from peers and
//! timer expirations, and answers each input with a list of [`Action`]s. The
//! simulator owns the clock and the network; a synchronizer never reads
//! either directly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::leader::LeaderMap;
use crate::time::Time;
use crate::types::{Action, Message, NodeId, TimerId, View};

pub mod broadcast;
pub mod cogsworth;
pub mod doubling;

pub use broadcast::{BroadcastNode, BroadcastState};
pub use cogsworth::{CogsworthLeaderState, CogsworthNode, CogsworthState};
pub use doubling::{min_sync_view, predicted_entry_time, DoublingNode, DoublingState};

pub trait Synchronizer {
    /// Called once when the node begins executing, before any other input.
    fn start(&mut self, now: Time, out: &mut Vec<Action>);
    fn wish_to_advance(&mut self, now: Time, out: &mut Vec<Action>);
    fn deliver(&mut self, now: Time, msg: &Message, out: &mut Vec<Action>);
    fn timer_fired(&mut self, now: Time, timer: TimerId, out: &mut Vec<Action>);
    /// The view the node most recently entered.
    fn current_view(&self) -> View;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyncKind {
    Doubling,
    Broadcast,
    Cogsworth,
}

impl SyncKind {
    pub const ALL: [SyncKind; 3] = [SyncKind::Doubling, SyncKind::Broadcast, SyncKind::Cogsworth];

    pub fn name(self) -> &'static str {
        match self {
            SyncKind::Doubling => "doubling",
            SyncKind::Broadcast => "broadcast",
            SyncKind::Cogsworth => "cogsworth",
        }
    }
}

impl fmt::Display for SyncKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyncKind {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SyncKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| ParseError::Value {
            key: "sync".into(),
            value: s.into(),
            reason: "expected doubling, broadcast or cogsworth".into(),
        })
    }
}

/// Everything a node's synchronizer needs to know about the system.
#[derive(Clone, Debug)]
pub struct NodeParams {
    pub id: NodeId,
    pub n: usize,
    pub f: usize,
    pub delta: Time,
    pub leaders: LeaderMap,
    /// First-view duration for view doubling.
    pub beta: Time,
    /// View the node is in when it starts (view doubling only).
    pub initial_view: View,
}

pub fn build(kind: SyncKind, params: NodeParams) -> Box<dyn Synchronizer + Send> {
    match kind {
        SyncKind::Doubling => Box::new(DoublingNode::new(params.beta, params.initial_view)),
        SyncKind::Broadcast => Box::new(BroadcastNode::new(params.id, params.f)),
        SyncKind::Cogsworth => Box::new(CogsworthNode::new(params.id, params.f, params.delta, params.leaders)),
    }
}

/// Input events for replaying a synchronizer outside the simulator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Input {
    Start,
    Wish,
    Deliver(Message),
    Timer(TimerId),
}

/// Feeds a timed input sequence to `sync` and returns the concatenated
/// outputs, one list per input.
pub fn replay(sync: &mut dyn Synchronizer, inputs: &[(Time, Input)]) -> Vec<Vec<Action>> {
    inputs
        .iter()
        .map(|(now, input)| {
            let mut out = Vec::new();
            match input {
                Input::Start => sync.start(*now, &mut out),
                Input::Wish => sync.wish_to_advance(*now, &mut out),
                Input::Deliver(msg) => sync.deliver(*now, msg, &mut out),
                Input::Timer(t) => sync.timer_fired(*now, *t, &mut out),
            }
            out
        })
        .collect()
}
