//! Message delivery times under partial synchrony.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::DelayMode;
use crate::time::Time;

/// Chooses delivery times. Every choice lies in `(send, max(send, GST) + δ]`.
pub struct DelayPolicy {
    mode: DelayMode,
    gst: Time,
    delta: Time,
    rng: ChaCha8Rng,
}

impl DelayPolicy {
    pub fn new(mode: DelayMode, gst: Time, delta: Time, rng: ChaCha8Rng) -> Self {
        assert!(!delta.is_zero(), "δ must be positive");
        DelayPolicy { mode, gst, delta, rng }
    }

    pub fn bound(&self, send: Time) -> Time {
        send.max(self.gst) + self.delta
    }

    pub fn delivery_time(&mut self, send: Time, from_corrupt: bool) -> Time {
        let bound = self.bound(send);
        let earliest = send + Time::from_ticks(1);
        match self.mode {
            DelayMode::WorstCase => bound,
            DelayMode::UniformRandom => Time::from_ticks(self.rng.gen_range(earliest.ticks()..=bound.ticks())),
            DelayMode::AdversaryChosen if from_corrupt => earliest,
            DelayMode::AdversaryChosen => bound,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn policy(mode: DelayMode, gst: u64) -> DelayPolicy {
        DelayPolicy::new(mode, Time::units(gst), Time::units(1), ChaCha8Rng::seed_from_u64(7))
    }

    #[test]
    fn worst_case_before_and_after_gst() {
        let mut p = policy(DelayMode::WorstCase, 10);
        assert_eq!(p.delivery_time(Time::units(3), false), Time::units(11));
        assert_eq!(p.delivery_time(Time::units(12), false), Time::units(13));
    }

    #[test]
    fn adversary_rushes_corrupt_traffic() {
        let mut p = policy(DelayMode::AdversaryChosen, 0);
        assert_eq!(p.delivery_time(Time::units(2), true), Time::units(2) + Time::from_ticks(1));
        assert_eq!(p.delivery_time(Time::units(2), false), Time::units(3));
    }

    proptest! {
        #[test]
        fn uniform_stays_within_bound(send in 0u64..50_000_000, gst in 0u64..30) {
            let mut p = policy(DelayMode::UniformRandom, gst);
            let send = Time::from_ticks(send);
            let at = p.delivery_time(send, false);
            prop_assert!(at > send);
            prop_assert!(at <= p.bound(send));
        }
    }
}
