use std::path::PathBuf;

use thiserror::Error;

/// Malformed textual input (CLI flags, config files, adversary strings).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("invalid time value {0:?}: expected a non-negative decimal with at most 6 fractional digits")]
    Time(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    Value { key: String, value: String, reason: String },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Line { line: usize, text: String },
    #[error("invalid adversary spec {spec:?}: {reason}")]
    Adversary { spec: String, reason: String },
    #[error("unknown preset {0:?}; run `viewsync presets` for the list")]
    UnknownPreset(String),
}

/// A scenario that violates one of the configuration constraints.
///
/// Every constraint has its own variant so callers and tests can match on
/// exactly which rule was broken.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("n must be at least 1")]
    NoNodes,
    #[error("n = {n} violates n >= 3f + 1 with f = {f}")]
    TooManyFaults { n: usize, f: usize },
    #[error("delta must be positive")]
    ZeroDelta,
    #[error("wish interval must be positive")]
    ZeroWishInterval,
    #[error("beta must be positive")]
    ZeroBeta,
    #[error("wish interval {wish_interval} is below the {synchronizer} floor {floor} (requires interval >= floor)")]
    WishIntervalBelowFloor { synchronizer: String, wish_interval: String, floor: String },
    #[error("wish interval {wish_interval} exceeds beta {beta}; view doubling requires 0 < interval <= beta")]
    WishIntervalAboveBeta { wish_interval: String, beta: String },
    #[error("horizon {horizon} must be greater than GST {gst}")]
    HorizonNotAfterGst { horizon: String, gst: String },
    #[error("{count} corrupt nodes exceed f = {f}")]
    TooManyCorrupt { count: usize, f: usize },
    #[error("node {node} is out of range 1..={n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("adversary targets leaders, which requires a leader map known before the run (not `random`)")]
    LeaderTargetsWithRandomMap,
    #[error("adversary behavior {behavior} is not applicable to the {synchronizer} synchronizer")]
    BehaviorNotApplicable { behavior: String, synchronizer: String },
    #[error("leader permutation must be a bijection on 1..={n}")]
    BadPermutation { n: usize },
    #[error("initial views are only supported for the doubling synchronizer and need exactly n = {n} entries")]
    BadInitialViews { n: usize },
    #[error("start times need exactly n = {n} entries")]
    BadStartTimes { n: usize },
    #[error("scripted message from node {node}, which is not corrupt")]
    ScriptedFromHonest { node: usize },
}

/// Failure while running or analysing a scenario.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("trace invariant violated: {0}")]
    Invariant(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
