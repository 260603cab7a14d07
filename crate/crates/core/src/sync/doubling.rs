//! Message-free view doubling.
//!
//! Each view lasts twice as long as the one before it (`β · 2^v`). A node
//! moves its internal view counter when the duration expires and signals the
//! new view only if it has been asked to advance at least that many times.

use crate::time::Time;
use crate::types::{Action, Message, TimerId, View};

use super::Synchronizer;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoublingState {
    pub wish: u64,
    pub curr: View,
    /// `β · 2^curr`, saturating at [`Time::MAX`] once it no longer fits.
    pub view_duration: Time,
    /// When `view_duration` last changed.
    pub duration_anchor: Time,
    pub beta: Time,
}

impl DoublingState {
    /// A node that is in `initial_view` at `start`. It counts as having
    /// wished for every view up to its initial one.
    pub fn new(beta: Time, initial_view: View, start: Time) -> Self {
        DoublingState {
            wish: initial_view,
            curr: initial_view,
            view_duration: scaled_duration(beta, initial_view),
            duration_anchor: start,
            beta,
        }
    }

    pub fn on_wish_to_advance(&mut self) {
        self.wish += 1;
    }

    /// Ends the current view. Returns the view to signal, if the wish counter
    /// allows it.
    pub fn on_duration_expired(&mut self, now: Time) -> Option<View> {
        debug_assert_eq!(now.checked_sub(self.duration_anchor), Some(self.view_duration));
        self.curr += 1;
        self.view_duration = self.view_duration.checked_mul(2).unwrap_or(Time::MAX);
        self.duration_anchor = now;
        (self.wish >= self.curr).then_some(self.curr)
    }

    /// Absolute time at which the current view ends, if representable.
    pub fn deadline(&self) -> Option<Time> {
        if self.view_duration == Time::MAX {
            return None;
        }
        self.duration_anchor.checked_add(self.view_duration)
    }
}

fn scaled_duration(beta: Time, view: View) -> Time {
    u32::try_from(view)
        .ok()
        .and_then(|v| 1u64.checked_shl(v))
        .and_then(|p| beta.checked_mul(p))
        .unwrap_or(Time::MAX)
}

pub struct DoublingNode {
    state: DoublingState,
    initial_view: View,
    proposed: View,
}

impl DoublingNode {
    pub fn new(beta: Time, initial_view: View) -> Self {
        DoublingNode { state: DoublingState::new(beta, initial_view, Time::ZERO), initial_view, proposed: initial_view }
    }

    pub fn state(&self) -> &DoublingState {
        &self.state
    }

    fn arm(&self, out: &mut Vec<Action>) {
        if let Some(deadline) = self.state.deadline() {
            out.push(Action::SetTimer { timer: TimerId::ViewDuration, deadline });
        }
    }
}

impl Synchronizer for DoublingNode {
    fn start(&mut self, now: Time, out: &mut Vec<Action>) {
        self.state = DoublingState::new(self.state.beta, self.initial_view, now);
        self.arm(out);
    }

    fn wish_to_advance(&mut self, _now: Time, _out: &mut Vec<Action>) {
        self.state.on_wish_to_advance();
    }

    fn deliver(&mut self, _now: Time, _msg: &Message, _out: &mut Vec<Action>) {}

    fn timer_fired(&mut self, now: Time, timer: TimerId, out: &mut Vec<Action>) {
        if timer != TimerId::ViewDuration {
            return;
        }
        if let Some(view) = self.state.on_duration_expired(now) {
            self.proposed = view;
            out.push(Action::ProposeView { view });
        }
        self.arm(out);
    }

    fn current_view(&self) -> View {
        self.proposed
    }
}

/// Closed-form entry time of view `v` for a node that is in view `v0` at
/// time 0: `β · (2^v − 2^v0)`. `None` if `v < v0` or the value overflows.
pub fn predicted_entry_time(v: View, v0: View, beta: Time) -> Option<Time> {
    if v < v0 || v >= 64 {
        return None;
    }
    let span = (1u64 << v) - (1u64 << v0);
    beta.checked_mul(span)
}

/// Smallest view `v ≥ v0_max` in which every node overlaps for at least `c`,
/// i.e. `β · (2^v + 2^v0_min − 2^v0_max) ≥ c`.
///
/// Views below `v0_max` are never executed by the node that starts furthest
/// ahead, so the search starts there. Panics if `v0_min > v0_max` or
/// `v0_max >= 64`.
pub fn min_sync_view(c: Time, v0_min: View, v0_max: View, beta: Time) -> View {
    assert!(v0_min <= v0_max, "v0_min must not exceed v0_max");
    assert!(v0_max < 64, "start views beyond 63 are not supported");
    assert!(!beta.is_zero(), "beta must be positive");
    let beta = beta.ticks() as u128;
    // β·2^v ≥ c + β·(2^l − 2^k)  ⇔  2^v ≥ ⌈required / β⌉
    let gap = (1u128 << v0_max) - (1u128 << v0_min);
    let required = c.ticks() as u128 + beta * gap;
    let quotient = required.div_ceil(beta);
    let log = ceil_log2(quotient);
    log.max(v0_max)
}

fn ceil_log2(x: u128) -> u64 {
    if x <= 1 {
        0
    } else {
        (128 - (x - 1).leading_zeros()) as u64
    }
}
