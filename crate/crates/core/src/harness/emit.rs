//! CSV and JSONL output with a fixed column order.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{Validity, XEstimate};

use super::sweep::SweepTable;
use super::SyncReport;

/// Columns of a report summary row, in output order.
pub const SUMMARY_COLUMNS: [&str; 21] = [
    "sync",
    "n",
    "f",
    "delta",
    "gst",
    "wish_interval",
    "beta",
    "c",
    "horizon",
    "seed",
    "leader_map",
    "adversary",
    "delay",
    "intervals",
    "syncs",
    "latency",
    "first_latency",
    "communication",
    "first_communication",
    "honest_messages",
    "validity",
];

pub const INTERVAL_COLUMNS: [&str; 9] = ["k", "view", "leader", "t1", "t2", "s", "length", "initial", "completed_at"];

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), |v| v.to_string())
}

fn summary_fields(r: &SyncReport) -> Vec<String> {
    let c = &r.config;
    vec![
        c.synchronizer.to_string(),
        c.n.to_string(),
        c.f.to_string(),
        c.delta.to_string(),
        c.gst.to_string(),
        c.wish_interval().to_string(),
        c.beta.to_string(),
        c.c.to_string(),
        c.horizon.to_string(),
        c.seed.to_string(),
        c.leader_map.to_string(),
        c.adversary.to_string(),
        c.delay_mode.name().to_string(),
        r.intervals.len().to_string(),
        r.syncs.to_string(),
        opt(r.latency),
        opt(r.first_latency),
        opt(r.communication),
        opt(r.first_communication),
        r.honest_messages.to_string(),
        match r.validity {
            Validity::Pass => "pass".to_string(),
            Validity::Violation { record, .. } => format!("violation@{record}"),
        },
    ]
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |source| Error::Csv { path: "<memory>".into(), source };
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row).map_err(wrap)?;
    }
    w.into_inner().map_err(|e| Error::Io { path: "<memory>".into(), source: e.into_error() })
}

/// Header plus one summary row per report.
pub fn reports_csv(reports: &[SyncReport]) -> Result<Vec<u8>> {
    csv_bytes(&SUMMARY_COLUMNS, reports.iter().map(summary_fields))
}

pub fn intervals_csv(report: &SyncReport) -> Result<Vec<u8>> {
    csv_bytes(
        &INTERVAL_COLUMNS,
        report.intervals.iter().map(|iv| {
            vec![
                iv.k.to_string(),
                iv.view.to_string(),
                iv.leader.to_string(),
                iv.t1.to_string(),
                iv.t2.to_string(),
                iv.s.to_string(),
                iv.len().to_string(),
                iv.initial.to_string(),
                iv.completed_at.map_or_else(String::new, |i| i.to_string()),
            ]
        }),
    )
}

/// One row per sweep point: the axis value, any error, then the summary
/// columns (empty for failed points).
pub fn sweep_csv(table: &SweepTable) -> Result<Vec<u8>> {
    let header: Vec<&str> = ["axis", "value", "error"].into_iter().chain(SUMMARY_COLUMNS).collect();
    csv_bytes(
        &header,
        table.rows.iter().map(|row| {
            let mut fields = vec![table.axis.to_string(), row.value.to_string(), row.error.clone().unwrap_or_default()];
            match &row.report {
                Some(r) => fields.extend(summary_fields(r)),
                None => fields.extend(std::iter::repeat_n(String::new(), SUMMARY_COLUMNS.len())),
            }
            fields
        }),
    )
}

pub const FIT_COLUMNS: [&str; 9] = [
    "metric",
    "points",
    "best",
    "linear_intercept",
    "linear_slope",
    "linear_r2",
    "quadratic_intercept",
    "quadratic_slope",
    "quadratic_r2",
];

pub fn fits_csv(table: &SweepTable) -> Result<Vec<u8>> {
    csv_bytes(
        &FIT_COLUMNS,
        table.fits.iter().map(|m| {
            let (l, q) = (m.fit.linear, m.fit.quadratic);
            vec![
                m.metric.name().to_string(),
                m.points.to_string(),
                format!("{:?}", m.fit.best()).to_lowercase(),
                l.intercept.to_string(),
                l.slope.to_string(),
                l.r2.to_string(),
                q.intercept.to_string(),
                q.slope.to_string(),
                q.r2.to_string(),
            ]
        }),
    )
}

pub const ESTIMATE_COLUMNS: [&str; 6] = ["n", "f", "trials", "mean_until_honest", "mean_byzantine_run", "geometric_mean"];

pub fn estimate_csv(est: &XEstimate) -> Result<Vec<u8>> {
    csv_bytes(
        &ESTIMATE_COLUMNS,
        [vec![
            est.n.to_string(),
            est.f.to_string(),
            est.trials.to_string(),
            est.mean_until_honest.to_string(),
            est.mean_byzantine_run.to_string(),
            est.geometric_mean.to_string(),
        ]],
    )
}

/// One JSON document per line.
pub fn jsonl<T: Serialize>(items: &[T]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.push(b'\n');
    }
    Ok(out)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}
