//! All-to-all synchronizer with Bracha-style amplification.
//!
//! A node that wants to advance multicasts `NEWROUND(curr+1)`. Hearing f+1
//! distinct senders for a view makes a node join the multicast once; hearing
//! 2f+1 moves it into the view.

use std::collections::{BTreeMap, BTreeSet};

use crate::time::Time;
use crate::types::{Action, Message, NodeId, Payload, TimerId, View};

use super::Synchronizer;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BroadcastState {
    pub curr: View,
    /// Views this node already multicast `NEWROUND` for.
    pub sent: BTreeSet<View>,
    /// Distinct `NEWROUND` senders per view.
    pub tallies: BTreeMap<View, BTreeSet<NodeId>>,
}

pub struct BroadcastNode {
    id: NodeId,
    f: usize,
    state: BroadcastState,
}

impl BroadcastNode {
    pub fn new(id: NodeId, f: usize) -> Self {
        BroadcastNode { id, f, state: BroadcastState::default() }
    }

    pub fn state(&self) -> &BroadcastState {
        &self.state
    }

    pub fn on_wish_to_advance(&mut self, out: &mut Vec<Action>) {
        let view = self.state.curr + 1;
        self.state.sent.insert(view);
        out.push(Action::Multicast { msg: Message::new_round(self.id, view) });
    }

    pub fn on_receive_new_round(&mut self, view: View, from: NodeId, out: &mut Vec<Action>) {
        // Tallies below curr − 1 have been collected; such views can never
        // produce a signal again.
        if view + 1 < self.state.curr {
            return;
        }
        let tally = self.state.tallies.entry(view).or_default();
        if !tally.insert(from) {
            return;
        }
        let count = tally.len();
        if count > self.f && self.state.sent.insert(view) {
            out.push(Action::Multicast { msg: Message::new_round(self.id, view) });
        }
        if count > 2 * self.f && view > self.state.curr {
            self.state.curr = view;
            out.push(Action::ProposeView { view });
            let floor = view - 1;
            self.state.tallies.retain(|&v, _| v >= floor);
            self.state.sent.retain(|&v| v >= floor);
        }
    }
}

impl Synchronizer for BroadcastNode {
    fn start(&mut self, _now: Time, _out: &mut Vec<Action>) {}

    fn wish_to_advance(&mut self, _now: Time, out: &mut Vec<Action>) {
        self.on_wish_to_advance(out);
    }

    fn deliver(&mut self, _now: Time, msg: &Message, out: &mut Vec<Action>) {
        if let Payload::NewRound = msg.payload {
            self.on_receive_new_round(msg.view, msg.sender, out);
        }
    }

    fn timer_fired(&mut self, _now: Time, _timer: TimerId, _out: &mut Vec<Action>) {}

    fn current_view(&self) -> View {
        self.state.curr
    }
}
