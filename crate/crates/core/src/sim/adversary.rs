//! How corrupt nodes bend the protocol's outputs.

use crate::config::Behavior;
use crate::leader::LeaderMap;
use crate::types::{Message, MessageKind, NodeId, View};

/// Whether the node runs the synchronizer at all.
pub fn runs_protocol(behavior: Option<&Behavior>) -> bool {
    !matches!(behavior, Some(Behavior::Silent | Behavior::Scripted(_)))
}

/// Recipients of a multicast. A withholding leader hands its QC to a single
/// honest node instead of everyone.
pub fn multicast_recipients(behavior: Option<&Behavior>, msg: &Message, n: usize, first_honest: NodeId) -> Vec<NodeId> {
    match behavior {
        Some(Behavior::QcWithhold) if msg.kind() == MessageKind::Qc => vec![first_honest],
        _ => NodeId::all(n).collect(),
    }
}

/// Leaders an amplifier relays a TC for `view` to: those of views
/// `view+1..=view+f+1`, without repeats and without itself.
pub fn amplify_targets(leaders: &LeaderMap, me: NodeId, view: View, f: usize) -> Vec<NodeId> {
    let mut out = Vec::new();
    for r in view + 1..=view + f as u64 + 1 {
        let leader = leaders.leader_of(r);
        if leader != me && !out.contains(&leader) {
            out.push(leader);
        }
    }
    out
}
