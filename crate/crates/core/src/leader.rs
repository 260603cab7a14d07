//! View-to-leader mapping.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::types::{NodeId, View};

/// Rotating leader assignment: `leader(v) = permutation[v mod n]`.
///
/// The identity permutation gives the round-robin rule `(v mod n) + 1`.
/// Every window of `n` consecutive views covers every node exactly once.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaderMap {
    permutation: Vec<NodeId>,
}

impl LeaderMap {
    pub fn round_robin(n: usize) -> Self {
        assert!(n > 0, "leader map over zero nodes");
        LeaderMap { permutation: NodeId::all(n).collect() }
    }

    /// Builds a map from an explicit ordering such as `[3, 1, 4, 2]`.
    pub fn from_permutation(order: &[usize]) -> Result<Self, ConfigError> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &id in order {
            if id == 0 || id > n || seen[id - 1] {
                return Err(ConfigError::BadPermutation { n });
            }
            seen[id - 1] = true;
        }
        if n == 0 {
            return Err(ConfigError::BadPermutation { n });
        }
        Ok(LeaderMap { permutation: order.iter().copied().map(NodeId).collect() })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut map = Self::round_robin(n);
        map.permutation.shuffle(rng);
        map
    }

    pub fn n(&self) -> usize {
        self.permutation.len()
    }

    pub fn leader_of(&self, view: View) -> NodeId {
        let n = self.permutation.len() as u64;
        self.permutation[(view % n) as usize]
    }

    /// Whether `node` leads any view in `lo..=hi`.
    pub fn leads_any(&self, node: NodeId, lo: View, hi: View) -> bool {
        let span = hi.saturating_sub(lo).saturating_add(1);
        if span >= self.n() as u64 {
            return true;
        }
        (lo..=hi).any(|r| self.leader_of(r) == node)
    }

    pub fn permutation(&self) -> &[NodeId] {
        &self.permutation
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_robin_view_zero_is_node_one() {
        assert_eq!(LeaderMap::round_robin(4).leader_of(0), NodeId(1));
        assert_eq!(LeaderMap::round_robin(4).leader_of(5), NodeId(2));
    }

    #[test]
    fn single_node_always_leads() {
        let map = LeaderMap::round_robin(1);
        for v in [0, 1, 7, u64::MAX] {
            assert_eq!(map.leader_of(v), NodeId(1));
        }
    }

    #[test]
    fn explicit_permutation() {
        // 7 mod 4 = 3, the fourth entry of [3, 1, 4, 2] is node 2.
        let map = LeaderMap::from_permutation(&[3, 1, 4, 2]).unwrap();
        assert_eq!(map.leader_of(7), NodeId(2));
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(LeaderMap::from_permutation(&[1, 1, 2]).is_err());
        assert!(LeaderMap::from_permutation(&[0, 1]).is_err());
        assert!(LeaderMap::from_permutation(&[1, 3]).is_err());
        assert!(LeaderMap::from_permutation(&[]).is_err());
    }

    #[test]
    fn leads_any_window() {
        let map = LeaderMap::round_robin(4);
        assert!(map.leads_any(NodeId(3), 1, 2));
        assert!(!map.leads_any(NodeId(1), 1, 3));
        assert!(map.leads_any(NodeId(1), 1, 4));
    }

    proptest! {
        #[test]
        fn every_window_of_n_views_covers_all_nodes(n in 1usize..20, start in 0u64..1_000_000, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let map = LeaderMap::random(n, &mut rng);
            let mut seen: Vec<NodeId> = (start..start + n as u64).map(|v| map.leader_of(v)).collect();
            seen.sort();
            prop_assert_eq!(seen, NodeId::all(n).collect::<Vec<_>>());
        }

        #[test]
        fn round_robin_f_plus_one_window_has_honest_leader(f in 0usize..6, start in 0u64..1000, corrupt_seed in any::<u64>()) {
            let n = 3 * f + 1;
            let map = LeaderMap::round_robin(n);
            let mut rng = ChaCha8Rng::seed_from_u64(corrupt_seed);
            let mut ids: Vec<usize> = (1..=n).collect();
            ids.shuffle(&mut rng);
            let corrupt: Vec<usize> = ids[..f].to_vec();
            let honest_leader = (start..=start + f as u64)
                .any(|v| !corrupt.contains(&map.leader_of(v).index()));
            prop_assert!(honest_leader);
        }
    }
}
