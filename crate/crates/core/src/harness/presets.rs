//! Named scenarios covering the complexity comparison and the experiments
//! around it.

use crate::config::{AdversarySpec, ScenarioConfig};
use crate::error::ParseError;
use crate::sync::SyncKind;
use crate::time::Time;

use super::sweep::Axis;

#[derive(Clone, Debug, PartialEq)]
pub enum PresetKind {
    Scenario,
    /// Sampling of consecutive faulty leaders; uses `n`, `f` and `seed` from
    /// the config.
    ExpectedX { trials: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub kind: PresetKind,
    pub config: ScenarioConfig,
    /// Default sweep for `viewsync sweep --preset`.
    pub sweep: Option<(Axis, Vec<u64>)>,
}

const N_VALUES: [u64; 5] = [4, 7, 10, 13, 16];
const T_VALUES: [u64; 5] = [1, 2, 3, 4, 5];

fn scenario(name: &'static str, description: &'static str, config: ScenarioConfig, sweep: Option<(Axis, &[u64])>) -> Preset {
    Preset { name, description, kind: PresetKind::Scenario, config, sweep: sweep.map(|(a, v)| (a, v.to_vec())) }
}

fn adversary(s: &str) -> AdversarySpec {
    s.parse().expect("preset adversary parses")
}

/// Cogsworth over 16 nodes with a wish interval long enough for a full
/// escalation chain to finish within one interval.
fn cogsworth_worst(adv: &str) -> ScenarioConfig {
    ScenarioConfig {
        wish_interval: Some(Time::units(16)),
        horizon: Time::units(200),
        adversary: adversary(adv),
        ..ScenarioConfig::new(SyncKind::Cogsworth, 16, 5)
    }
}

pub fn presets() -> Vec<Preset> {
    let cogsworth = ScenarioConfig::new(SyncKind::Cogsworth, 4, 1);
    let faultless = scenario(
        "cogsworth-faultless",
        "Cogsworth, n=4, no faults: 20 messages per synchronization",
        cogsworth.clone(),
        Some((Axis::N, &N_VALUES)),
    );
    vec![
        scenario(
            "table1-doubling",
            "View doubling, no faults: zero messages, geometric view lengths",
            ScenarioConfig { horizon: Time::units(400), ..ScenarioConfig::new(SyncKind::Doubling, 4, 1) },
            Some((Axis::N, &N_VALUES)),
        ),
        scenario(
            "table1-broadcast",
            "Broadcast synchronizer, no faults: n^2 messages per view",
            ScenarioConfig::new(SyncKind::Broadcast, 4, 1),
            Some((Axis::N, &N_VALUES)),
        ),
        Preset { name: "table1-cogsworth-optimal", ..faultless.clone() },
        faultless,
        scenario(
            "table1-cogsworth-benign",
            "Cogsworth with the leader of view 1 crashed from the start",
            ScenarioConfig { adversary: adversary("crash:leader@0"), ..cogsworth.clone() },
            Some((Axis::N, &N_VALUES)),
        ),
        scenario(
            "table1-cogsworth-benign-worst",
            "Cogsworth, n=16, the leaders of views 1..t crashed",
            cogsworth_worst("crash:leader@0"),
            Some((Axis::T, &T_VALUES)),
        ),
        scenario(
            "table1-cogsworth-byzantine",
            "Cogsworth with one leader relaying every TC to the next f+1 leaders",
            ScenarioConfig { adversary: adversary("amplify:leader"), ..cogsworth.clone() },
            Some((Axis::N, &N_VALUES)),
        ),
        scenario(
            "table1-cogsworth-byzantine-worst",
            "Cogsworth, n=16, the leaders of views 1..t relay every TC",
            cogsworth_worst("amplify:leader"),
            Some((Axis::T, &T_VALUES)),
        ),
        scenario(
            "doubling-gap",
            "View doubling with start views 0 and 4, beta=1, c=1: first sync at view 4",
            ScenarioConfig {
                beta: Time::units(1),
                c: Time::units(1),
                initial_views: Some(vec![0, 4, 4, 4]),
                horizon: Time::units(40),
                ..ScenarioConfig::new(SyncKind::Doubling, 4, 1)
            },
            None,
        ),
        scenario(
            "cogsworth-qc-withhold",
            "Cogsworth with the leader of view 1 handing its QC to a single node",
            ScenarioConfig { adversary: adversary("withhold:leader"), ..cogsworth.clone() },
            Some((Axis::Seed, &[0, 1, 2, 3, 4])),
        ),
        scenario(
            "broadcast-crash",
            "Broadcast synchronizer with node 2 crashed from the start",
            ScenarioConfig { adversary: adversary("crash:2@0"), ..ScenarioConfig::new(SyncKind::Broadcast, 4, 1) },
            Some((Axis::N, &N_VALUES)),
        ),
        Preset {
            name: "expected-x",
            description: "Consecutive faulty leaders after r_max, n=100, f=33, 10000 random permutations",
            kind: PresetKind::ExpectedX { trials: 10_000 },
            config: ScenarioConfig {
                leader_map: crate::config::LeaderMapSpec::Random,
                ..ScenarioConfig::new(SyncKind::Cogsworth, 100, 33)
            },
            sweep: None,
        },
    ]
}

pub fn preset(name: &str) -> Result<Preset, ParseError> {
    presets().into_iter().find(|p| p.name == name).ok_or_else(|| ParseError::UnknownPreset(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid() {
        for p in presets() {
            p.config.validate().unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<_> = presets().iter().map(|p| p.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), presets().len());
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(preset("nope"), Err(ParseError::UnknownPreset(_))));
    }
}
