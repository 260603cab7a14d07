//! Scenario runs, sweeps, presets and report emission.

pub mod emit;
pub mod presets;
pub mod sweep;

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::metrics::{self, SyncInterval, Validity};
use crate::sim;
use crate::trace::Trace;

pub use presets::{preset, presets, Preset, PresetKind};
pub use sweep::{run_sweep, Axis, Metric, MetricFit, SweepRow, SweepTable};

/// Everything measured about one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyncReport {
    pub config: ScenarioConfig,
    pub intervals: Vec<SyncInterval>,
    /// Synchronizations the estimators average over.
    pub syncs: usize,
    /// Mean gap between synchronizations, δ units.
    pub latency: Option<f64>,
    /// `s(T_1) − GST`, δ units.
    pub first_latency: Option<f64>,
    /// Mean honest messages per synchronization.
    pub communication: Option<f64>,
    /// Honest messages up to the first synchronization.
    pub first_communication: Option<f64>,
    pub honest_messages: u64,
    pub validity: Validity,
}

/// Simulates `config`, checks the trace invariants and measures it.
pub fn run_scenario(config: &ScenarioConfig) -> Result<SyncReport> {
    let trace = sim::run(config)?;
    trace.check_all()?;
    Ok(analyze(config, &trace))
}

pub fn analyze(config: &ScenarioConfig, trace: &Trace) -> SyncReport {
    let intervals = metrics::detect_sync_intervals(trace, config.c);
    let gaps = metrics::latency_gaps(trace, &intervals);
    let (buckets, _) = metrics::message_buckets(trace, &intervals);
    SyncReport {
        config: config.clone(),
        syncs: gaps.len(),
        latency: metrics::measure_latency(trace, &intervals),
        first_latency: gaps.first().map(|g| g.as_f64() / config.delta.as_f64()),
        communication: metrics::measure_communication(trace, &intervals),
        first_communication: buckets.first().map(|&b| b as f64),
        honest_messages: trace.honest_sends() as u64,
        validity: metrics::audit_validity(trace),
        intervals,
    }
}
