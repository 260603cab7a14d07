//! Consecutive faulty leaders after the highest honest view at GST.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XSample {
    /// Faulty leaders in a row right after `r_max`.
    pub byzantine_run: u64,
    /// Views up to and including the first honest leader after `r_max`,
    /// i.e. `byzantine_run + 1`. This is the geometric variable with mean
    /// close to `n / (n − f)`.
    pub until_honest: u64,
}

/// Draws one leader permutation over `n` nodes, the first `f` of them
/// corrupt, and a uniformly random `r_max`.
pub fn sample_consecutive<R: Rng + ?Sized>(n: usize, f: usize, rng: &mut R) -> XSample {
    assert!(f < n, "need at least one honest node");
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let r_max = rng.gen_range(0..n);
    let run = (1..=n).take_while(|i| order[(r_max + i) % n] < f).count() as u64;
    XSample { byzantine_run: run, until_honest: run + 1 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XEstimate {
    pub n: usize,
    pub f: usize,
    pub trials: usize,
    pub mean_until_honest: f64,
    pub mean_byzantine_run: f64,
    /// `n / (n − f)`, the geometric mean for independent draws.
    pub geometric_mean: f64,
}

/// Sample mean over `trials` independent permutations. Trial `i` uses
/// stream `i` of a generator keyed by `seed`, so the result does not depend
/// on how trials are scheduled.
pub fn estimate_consecutive_byzantine_leaders(n: usize, f: usize, trials: usize, seed: u64) -> XEstimate {
    let samples = par::map_range(trials, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        sample_consecutive(n, f, &mut rng)
    });
    let total = trials.max(1) as f64;
    XEstimate {
        n,
        f,
        trials,
        mean_until_honest: samples.iter().map(|s| s.until_honest as f64).sum::<f64>() / total,
        mean_byzantine_run: samples.iter().map(|s| s.byzantine_run as f64).sum::<f64>() / total,
        geometric_mean: n as f64 / (n - f) as f64,
    }
}
