//! Trace analysis: view timelines, synchronization intervals, latency and
//! communication estimators, and the validity audit.

pub mod expected;
pub mod fit;
pub mod validity;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::time::Time;
use crate::trace::{Trace, TraceEvent};
use crate::types::{NodeId, View};

pub use expected::{estimate_consecutive_byzantine_leaders, sample_consecutive, XEstimate, XSample};
pub use fit::{fit_orders, FitOrder, OrderFit, Regression};
pub use validity::{audit_validity, Validity};

/// One view as executed by one node. `end` is `None` for the view the node
/// was still in at the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewSpan {
    pub view: View,
    pub start: Time,
    pub end: Option<Time>,
    /// Index of the `proposeView` record that began the span; `None` for the
    /// view the node started in.
    pub entered_by: Option<usize>,
}

pub type Timelines = BTreeMap<NodeId, Vec<ViewSpan>>;

/// Per honest node, the views it executed in order.
pub fn timelines(trace: &Trace) -> Timelines {
    let mut out: Timelines = trace.honest_nodes().map(|p| (p, Vec::new())).collect();
    for (i, r) in trace.records.iter().enumerate() {
        let Some(spans) = out.get_mut(&r.node) else { continue };
        let (view, entered_by) = match r.event {
            TraceEvent::Start { view } => (view, None),
            TraceEvent::ProposeView { view } => (view, Some(i)),
            _ => continue,
        };
        if let Some(last) = spans.last_mut() {
            last.end = Some(r.time);
        }
        spans.push(ViewSpan { view, start: r.time, end: None, entered_by });
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncInterval {
    /// 1-based position in time order.
    pub k: usize,
    pub view: View,
    pub leader: NodeId,
    pub leader_honest: bool,
    pub t1: Time,
    pub t2: Time,
    /// Latest honest entry into the view.
    pub s: Time,
    /// Every honest node was already in this view when it started.
    pub initial: bool,
    /// Record index of the latest honest entry, if any node entered by
    /// `proposeView`.
    pub completed_at: Option<usize>,
}

impl SyncInterval {
    pub fn len(&self) -> Time {
        self.t2 - self.t1
    }
}

/// Every view that all honest nodes executed together for at least `c`
/// under an honest leader. Only closed spans count.
pub fn detect_sync_intervals(trace: &Trace, c: Time) -> Vec<SyncInterval> {
    let lines = timelines(trace);
    let honest = lines.len();
    let mut by_view: BTreeMap<View, Vec<ViewSpan>> = BTreeMap::new();
    for span in lines.values().flatten() {
        if span.end.is_some() {
            by_view.entry(span.view).or_default().push(*span);
        }
    }
    let mut out: Vec<SyncInterval> = by_view
        .into_iter()
        .filter(|(_, spans)| spans.len() == honest && honest > 0)
        .filter_map(|(view, spans)| {
            let leader = trace.meta.leaders.leader_of(view);
            if !trace.is_honest(leader) {
                return None;
            }
            let t1 = spans.iter().map(|s| s.start).max()?;
            let t2 = spans.iter().filter_map(|s| s.end).min()?;
            if t2 < t1 || t2 - t1 < c {
                return None;
            }
            let completed_at = spans.iter().filter(|s| s.start == t1).filter_map(|s| s.entered_by).max();
            let initial = spans.iter().all(|s| s.entered_by.is_none());
            Some(SyncInterval { k: 0, view, leader, leader_honest: true, t1, t2, s: t1, initial, completed_at })
        })
        .collect();
    out.sort_by_key(|iv| (iv.t1, iv.view));
    for (i, iv) in out.iter_mut().enumerate() {
        iv.k = i + 1;
    }
    out
}

/// Intervals the estimators average over: reached through `proposeView`
/// and starting no earlier than GST.
pub fn counted<'a>(trace: &Trace, intervals: &'a [SyncInterval]) -> Vec<&'a SyncInterval> {
    intervals.iter().filter(|iv| !iv.initial && iv.s >= trace.meta.gst).collect()
}

/// Gaps `s(T_1) − GST, s(T_2) − s(T_1), …` over the counted intervals.
pub fn latency_gaps(trace: &Trace, intervals: &[SyncInterval]) -> Vec<Time> {
    let mut prev = trace.meta.gst;
    counted(trace, intervals)
        .into_iter()
        .map(|iv| {
            let gap = iv.s - prev;
            prev = iv.s;
            gap
        })
        .collect()
}

/// Mean gap between consecutive synchronizations, in δ units. `None` when
/// nothing synchronized.
pub fn measure_latency(trace: &Trace, intervals: &[SyncInterval]) -> Option<f64> {
    let gaps = latency_gaps(trace, intervals);
    mean(gaps.iter().map(|g| g.as_f64() / trace.meta.delta.as_f64()))
}

/// Honest messages sent up to each counted synchronization, plus the tail
/// after the last one. Buckets and tail always add up to
/// [`Trace::honest_sends`].
pub fn message_buckets(trace: &Trace, intervals: &[SyncInterval]) -> (Vec<u64>, u64) {
    let cuts: Vec<usize> = counted(trace, intervals).iter().filter_map(|iv| iv.completed_at).collect();
    let mut buckets = vec![0u64; cuts.len()];
    let mut tail = 0;
    for (i, r) in trace.records.iter().enumerate() {
        if !matches!(r.event, TraceEvent::Send { .. }) || !trace.is_honest(r.node) {
            continue;
        }
        match cuts.partition_point(|&cut| cut < i) {
            k if k < cuts.len() => buckets[k] += 1,
            _ => tail += 1,
        }
    }
    (buckets, tail)
}

/// Mean number of honest messages per synchronization.
pub fn measure_communication(trace: &Trace, intervals: &[SyncInterval]) -> Option<f64> {
    let (buckets, _) = message_buckets(trace, intervals);
    mean(buckets.iter().map(|&b| b as f64))
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Largest difference between honest entry times into `view`, counting
/// only nodes that entered it via `proposeView` at or after `since`.
pub fn entry_spread(trace: &Trace, view: View, since: Time) -> Option<Time> {
    let times: Vec<Time> = trace.honest_proposals().filter(|p| p.3 == view && p.1 >= since).map(|p| p.1).collect();
    let lo = times.iter().min()?;
    let hi = times.iter().max()?;
    Some(*hi - *lo)
}

/// First time each honest node entered each view by `proposeView`.
pub fn entry_times(trace: &Trace) -> BTreeMap<View, BTreeMap<NodeId, Time>> {
    let mut out: BTreeMap<View, BTreeMap<NodeId, Time>> = BTreeMap::new();
    for (_, time, node, view) in trace.honest_proposals() {
        out.entry(view).or_default().entry(node).or_insert(time);
    }
    out
}
