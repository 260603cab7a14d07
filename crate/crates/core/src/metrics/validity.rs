//! Synchronization validity: a view is only signalled after some honest node
//! asked to advance far enough.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::time::Time;
use crate::trace::{Trace, TraceEvent};
use crate::types::{NodeId, View};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Validity {
    Pass,
    /// The first honest `proposeView` not backed by enough honest wishes.
    Violation { record: usize, node: NodeId, view: View, time: Time },
}

impl Validity {
    pub fn passed(&self) -> bool {
        matches!(self, Validity::Pass)
    }
}

/// Checks every honest `proposeView(v')` against the wishes recorded before
/// it: some honest node must have called `wish_to_advance` at least
/// `v' − u` times while executing a view `u < v'`.
pub fn audit_validity(trace: &Trace) -> Validity {
    let mut counts: BTreeMap<(NodeId, View), u64> = BTreeMap::new();
    // Highest wish count any honest node reached in each view.
    let mut best: BTreeMap<View, u64> = BTreeMap::new();
    for (i, r) in trace.records.iter().enumerate() {
        if !trace.is_honest(r.node) {
            continue;
        }
        match r.event {
            TraceEvent::Wish { view } => {
                let count = counts.entry((r.node, view)).or_insert(0);
                *count += 1;
                let b = best.entry(view).or_insert(0);
                *b = (*b).max(*count);
            }
            TraceEvent::ProposeView { view } => {
                let backed = best.range(..view).any(|(&u, &count)| u + count >= view);
                if !backed {
                    return Validity::Violation { record: i, node: r.node, view, time: r.time };
                }
            }
            _ => {}
        }
    }
    Validity::Pass
}
