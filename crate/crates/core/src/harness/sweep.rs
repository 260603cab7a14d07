//! Parameter sweeps with growth-order fits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::ParseError;
use crate::metrics::{fit_orders, OrderFit};
use crate::par;

use super::{run_scenario, SyncReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// System size; f follows as ⌊(n − 1)/3⌋.
    N,
    /// Number of faulty leaders in the adversary's first group.
    T,
    Seed,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::N => "n",
            Axis::T => "t",
            Axis::Seed => "seed",
        }
    }

    pub fn apply(self, base: &ScenarioConfig, value: u64) -> ScenarioConfig {
        let mut cfg = base.clone();
        match self {
            Axis::N => {
                cfg.n = value as usize;
                cfg.f = cfg.n.saturating_sub(1) / 3;
            }
            Axis::T => cfg.adversary = cfg.adversary.with_fault_count(value as usize),
            Axis::Seed => cfg.seed = value,
        }
        cfg
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "n" => Ok(Axis::N),
            "t" => Ok(Axis::T),
            "seed" => Ok(Axis::Seed),
            _ => Err(ParseError::Value { key: "axis".into(), value: s.into(), reason: "expected n, t or seed".into() }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Communication,
    FirstCommunication,
    Latency,
    FirstLatency,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Communication, Metric::FirstCommunication, Metric::Latency, Metric::FirstLatency];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Communication => "communication",
            Metric::FirstCommunication => "first_communication",
            Metric::Latency => "latency",
            Metric::FirstLatency => "first_latency",
        }
    }

    pub fn of(self, report: &SyncReport) -> Option<f64> {
        match self {
            Metric::Communication => report.communication,
            Metric::FirstCommunication => report.first_communication,
            Metric::Latency => report.latency,
            Metric::FirstLatency => report.first_latency,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: u64,
    pub report: Option<SyncReport>,
    /// Why this point produced no report.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricFit {
    pub metric: Metric,
    pub points: usize,
    pub fit: OrderFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: Axis,
    pub rows: Vec<SweepRow>,
    pub fits: Vec<MetricFit>,
}

impl SweepTable {
    pub fn fit(&self, metric: Metric) -> Option<&MetricFit> {
        self.fits.iter().find(|f| f.metric == metric)
    }

    pub fn series(&self, metric: Metric) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|row| Some((row.value as f64, metric.of(row.report.as_ref()?)?)))
            .collect()
    }
}

/// Runs `base` once per axis value. Points run in parallel; rows come back
/// in the order of `values`. A failing point is recorded and the sweep goes
/// on.
pub fn run_sweep(base: &ScenarioConfig, axis: Axis, values: &[u64]) -> SweepTable {
    let rows = par::map(values, |&value| match run_scenario(&axis.apply(base, value)) {
        Ok(report) => SweepRow { value, report: Some(report), error: None },
        Err(e) => SweepRow { value, report: None, error: Some(e.to_string()) },
    });
    let mut table = SweepTable { axis, rows, fits: Vec::new() };
    table.fits = Metric::ALL
        .into_iter()
        .filter_map(|metric| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = table.series(metric).into_iter().unzip();
            fit_orders(&xs, &ys).map(|fit| MetricFit { metric, points: xs.len(), fit })
        })
        .collect();
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::FitOrder;
    use crate::sync::SyncKind;

    #[test]
    fn failing_points_do_not_stop_the_sweep() {
        let base = ScenarioConfig::new(SyncKind::Broadcast, 4, 1);
        let table = run_sweep(&base, Axis::N, &[4, 0, 7]);
        assert_eq!(table.rows.len(), 3);
        assert!(table.rows[1].error.is_some());
        assert!(table.rows[0].report.is_some() && table.rows[2].report.is_some());
    }

    #[test]
    fn broadcast_is_quadratic_in_n() {
        let base = ScenarioConfig::new(SyncKind::Broadcast, 4, 1);
        let table = run_sweep(&base, Axis::N, &[4, 7, 10, 13, 16]);
        let fit = table.fit(Metric::Communication).unwrap();
        assert!(fit.fit.supports(FitOrder::Quadratic, 0.98), "{fit:?}");
        assert_eq!(table.series(Metric::Communication)[0].1, 16.0);
    }

    #[test]
    fn axis_parse() {
        assert_eq!("t".parse::<Axis>().unwrap(), Axis::T);
        assert!("m".parse::<Axis>().is_err());
    }
}
