use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use viewsync_core::harness::{self, emit, run_sweep, Axis, Preset, PresetKind};
use viewsync_core::metrics::estimate_consecutive_byzantine_leaders;
use viewsync_core::{sim, Error, ParseError, Result, ScenarioConfig, SyncKind};

#[derive(Parser)]
#[command(name = "viewsync", version, about = "Simulate and measure Byzantine view synchronizers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and print its report.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Also write the full event trace as JSONL.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Also write the detected synchronization intervals as CSV.
        #[arg(long)]
        intervals: Option<PathBuf>,
    },
    /// Run a scenario once per axis value and fit growth orders.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// n, t or seed. Defaults to the preset's axis.
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated axis values. Defaults to the preset's values.
        #[arg(long)]
        values: Option<String>,
        /// Also write the linear and quadratic fits as CSV.
        #[arg(long)]
        fits: Option<PathBuf>,
    },
    /// List the named scenarios.
    Presets,
    /// Estimate the number of consecutive faulty leaders after a random view.
    EstimateX {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 33)]
        f: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Scenario settings. Later sources override earlier ones: preset, then
/// config file, then individual flags.
#[derive(Args)]
struct ScenarioArgs {
    #[arg(long)]
    preset: Option<String>,
    /// File of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// doubling, broadcast or cogsworth.
    #[arg(long)]
    sync: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    gst: Option<String>,
    #[arg(long)]
    wish_interval: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// roundrobin, random or perm:<ids>.
    #[arg(long)]
    leader_map: Option<String>,
    /// For example `crash:leader@0` or `amplify:leaders1-2+silent:3`.
    #[arg(long)]
    adversary: Option<String>,
    /// worst, uniform or adversary.
    #[arg(long)]
    delay: Option<String>,
    /// Comma-separated initial view per node.
    #[arg(long)]
    initial_views: Option<String>,
    /// Comma-separated start time per node.
    #[arg(long)]
    start_times: Option<String>,
}

#[derive(Args)]
struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

impl ScenarioArgs {
    fn preset(&self) -> Result<Option<Preset>> {
        Ok(self.preset.as_deref().map(harness::preset).transpose()?)
    }

    fn resolve(&self, preset: Option<&Preset>) -> Result<ScenarioConfig> {
        let mut cfg = preset.map_or_else(|| ScenarioConfig::new(SyncKind::Cogsworth, 4, 1), |p| p.config.clone());
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.clone(), source })?;
            cfg.apply_file_contents(&text)?;
        }
        let flags = [
            ("sync", &self.sync),
            ("n", &self.n),
            ("f", &self.f),
            ("delta", &self.delta),
            ("gst", &self.gst),
            ("wish_interval", &self.wish_interval),
            ("beta", &self.beta),
            ("c", &self.c),
            ("horizon", &self.horizon),
            ("seed", &self.seed),
            ("leader_map", &self.leader_map),
            ("adversary", &self.adversary),
            ("delay", &self.delay),
            ("initial_views", &self.initial_views),
            ("start_times", &self.start_times),
        ];
        for (key, value) in flags {
            if let Some(value) = value {
                cfg.apply(key, value)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_output(output: &OutputArgs, bytes: &[u8]) -> Result<()> {
    match &output.out {
        Some(path) => emit::write_file(path, bytes),
        None => std::io::stdout().write_all(bytes).map_err(|source| Error::Io { path: "<stdout>".into(), source }),
    }
}

fn write_optional(path: Option<&Path>, bytes: impl FnOnce() -> Result<Vec<u8>>) -> Result<()> {
    match path {
        Some(path) => emit::write_file(path, &bytes()?),
        None => Ok(()),
    }
}

fn estimate(n: usize, f: usize, trials: usize, seed: u64, output: &OutputArgs) -> Result<()> {
    let est = estimate_consecutive_byzantine_leaders(n, f, trials, seed);
    let bytes = match output.format {
        Format::Csv => emit::estimate_csv(&est)?,
        Format::Jsonl => emit::jsonl(&[est])?,
    };
    write_output(output, &bytes)
}

fn parse_values(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(|v| {
            v.trim().parse().map_err(|_| {
                Error::from(ParseError::Value { key: "values".into(), value: v.into(), reason: "expected an integer".into() })
            })
        })
        .collect()
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { scenario, output, trace, intervals } => {
            let preset = scenario.preset()?;
            let cfg = scenario.resolve(preset.as_ref())?;
            if let Some(PresetKind::ExpectedX { trials }) = preset.map(|p| p.kind) {
                return estimate(cfg.n, cfg.f, trials, cfg.seed, &output);
            }
            let trace_log = sim::run(&cfg)?;
            write_optional(trace.as_deref(), || Ok(trace_log.to_jsonl().into_bytes()))?;
            trace_log.check_all()?;
            let report = harness::analyze(&cfg, &trace_log);
            write_optional(intervals.as_deref(), || emit::intervals_csv(&report))?;
            let bytes = match output.format {
                Format::Csv => emit::reports_csv(std::slice::from_ref(&report))?,
                Format::Jsonl => emit::jsonl(&[report])?,
            };
            write_output(&output, &bytes)
        }
        Command::Sweep { scenario, output, axis, values, fits } => {
            let preset = scenario.preset()?;
            let cfg = scenario.resolve(preset.as_ref())?;
            let default = preset.and_then(|p| p.sweep);
            let axis: Axis = match (&axis, &default) {
                (Some(a), _) => a.parse()?,
                (None, Some((a, _))) => *a,
                (None, None) => Axis::N,
            };
            let values = match (&values, default) {
                (Some(v), _) => parse_values(v)?,
                (None, Some((_, v))) => v,
                (None, None) => {
                    return Err(ParseError::Value { key: "values".into(), value: String::new(), reason: "required without a preset sweep".into() }.into())
                }
            };
            let table = run_sweep(&cfg, axis, &values);
            write_optional(fits.as_deref(), || emit::fits_csv(&table))?;
            let bytes = match output.format {
                Format::Csv => emit::sweep_csv(&table)?,
                Format::Jsonl => emit::jsonl(&[table])?,
            };
            write_output(&output, &bytes)
        }
        Command::Presets => {
            let mut text = String::new();
            for p in harness::presets() {
                text.push_str(&format!("{:<34}{}\n", p.name, p.description));
            }
            std::io::stdout().write_all(text.as_bytes()).map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
        Command::EstimateX { n, f, trials, seed, output } => estimate(n, f, trials, seed, &output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("viewsync: {e}");
            match e {
                Error::Config(_) | Error::Parse(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
