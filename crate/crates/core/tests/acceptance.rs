//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use viewsync_core::harness::{self, emit, presets, run_scenario, run_sweep, Metric, Preset, PresetKind};
use viewsync_core::metrics::{self, audit_validity, entry_times, estimate_consecutive_byzantine_leaders, FitOrder};
use viewsync_core::sync::{min_sync_view, predicted_entry_time};
use viewsync_core::trace::{Trace, TraceEvent};
use viewsync_core::*;

const COGSWORTH_RUNS: u64 = 200;
const WITHHOLD_RUNS: u64 = 100;
const BROADCAST_RUNS: u64 = 100;
/// Honest-leader entry spread for Cogsworth, in δ.
const COGSWORTH_SPREAD: u64 = 4;
/// Entry spread for the broadcast synchronizer, in δ.
const BROADCAST_SPREAD: u64 = 2;
const MIN_R2: f64 = 0.98;
const X_TRIALS: usize = 10_000;
const X_TOLERANCE: f64 = 0.05;
const X_TIME_LIMIT: Duration = Duration::from_secs(60);
const OVERLAP_INSTANCES: u64 = 50;
const GAPS: std::ops::RangeInclusive<u64> = 1..=6;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn delay_mode(i: u64) -> DelayMode {
    [DelayMode::UniformRandom, DelayMode::WorstCase, DelayMode::AdversaryChosen][(i % 3) as usize]
}

/// Adversaries whose corrupt set fits within `f`.
fn adversaries(f: usize) -> Vec<&'static str> {
    let mut out = vec!["none", "crash:leader@0", "silent:leader2", "withhold:leader", "amplify:leader", "crash:leader3@10"];
    if f >= 2 {
        out.extend(["crash:leaders1-2@0", "amplify:leader+withhold:leader2", "crash:leader@5+silent:leader3"]);
    }
    if f >= 3 {
        out.extend(["amplify:leaders1-3", "crash:leaders2-4@0"]);
    }
    out
}

/// Randomized run `i` of synchronizer `kind` with system size drawn from
/// {4, 7, 10}.
fn mixed_config(kind: SyncKind, i: u64, adversary: Option<&str>) -> ScenarioConfig {
    let n = [4, 7, 10][(i % 3) as usize];
    let f = (n - 1) / 3;
    let gst = if (i / 3).is_multiple_of(2) { 0 } else { 20 };
    let mut cfg = ScenarioConfig::new(kind, n, f);
    cfg.gst = Time::units(gst);
    cfg.horizon = Time::units(gst + 80);
    cfg.seed = i;
    cfg.delay_mode = delay_mode(i / 6);
    let adv = adversary.unwrap_or_else(|| {
        let list = adversaries(f);
        list[(i as usize / 2) % list.len()]
    });
    cfg.adversary = adv.parse().expect("adversary parses");
    cfg
}

fn run_checked(cfg: &ScenarioConfig) -> Result<Trace> {
    let trace = sim::run(cfg)?;
    trace.check_all()?;
    Ok(trace)
}

/// Views whose first honest entry happens at or after GST and at least
/// `window` before the horizon.
fn post_gst_views(trace: &Trace, window: Time) -> Vec<(View, Vec<Time>)> {
    entry_times(trace)
        .into_iter()
        .filter_map(|(v, entries)| {
            let times: Vec<Time> = entries.into_values().collect();
            let first = *times.iter().min()?;
            (first >= trace.meta.gst && first + window <= trace.meta.horizon).then_some((v, times))
        })
        .collect()
}

fn spread(times: &[Time]) -> Time {
    *times.iter().max().unwrap() - *times.iter().min().unwrap()
}

fn criterion_1() -> Outcome {
    let results = par::map_range(COGSWORTH_RUNS as usize, |i| -> Result<(usize, Time)> {
        let cfg = mixed_config(SyncKind::Cogsworth, i as u64, None);
        let trace = run_checked(&cfg)?;
        let mut checked = 0;
        let mut worst = Time::ZERO;
        for (v, times) in post_gst_views(&trace, Time::units(COGSWORTH_SPREAD)) {
            if trace.is_honest(trace.meta.leaders.leader_of(v)) {
                checked += 1;
                worst = worst.max(spread(&times));
            }
        }
        Ok((checked, worst))
    });
    let mut views = 0;
    let mut worst = Time::ZERO;
    for r in results {
        match r {
            Ok((c, w)) => {
                views += c;
                worst = worst.max(w);
            }
            Err(e) => return outcome(false, format!("run failed: {e}")),
        }
    }
    let bound = Time::units(COGSWORTH_SPREAD);
    outcome(views > 0 && worst <= bound, format!("{COGSWORTH_RUNS} runs, {views} honest-leader views, max spread {worst} (bound {bound})"))
}

fn criterion_2() -> Outcome {
    let results = par::map_range(WITHHOLD_RUNS as usize, |i| -> Result<(usize, usize)> {
        let cfg = mixed_config(SyncKind::Cogsworth, i as u64, Some("withhold:leader"));
        let trace = run_checked(&cfg)?;
        let f = cfg.f;
        let window = cfg.delta * (2 * (f as u64 + 2));
        let (mut checked, mut violations) = (0, 0);
        for (v, times) in post_gst_views(&trace, window) {
            if trace.is_honest(trace.meta.leaders.leader_of(v)) {
                continue;
            }
            checked += 1;
            let first = *times.iter().min().unwrap();
            if times.iter().filter(|&&t| t <= first + window).count() < f + 1 {
                violations += 1;
            }
        }
        Ok((checked, violations))
    });
    let (mut views, mut violations) = (0, 0);
    for r in results {
        match r {
            Ok((c, v)) => {
                views += c;
                violations += v;
            }
            Err(e) => return outcome(false, format!("run failed: {e}")),
        }
    }
    outcome(views > 0 && violations == 0, format!("{WITHHOLD_RUNS} runs, {views} withholding-leader views, {violations} with fewer than f+1 entries within 2δ(f+2)"))
}

fn criterion_3() -> Outcome {
    let advs = ["none", "crash:2@0", "silent:3", "crash:1@15"];
    let results = par::map_range(BROADCAST_RUNS as usize, |i| -> Result<(usize, Time)> {
        let cfg = mixed_config(SyncKind::Broadcast, i as u64, Some(advs[i % advs.len()]));
        let trace = run_checked(&cfg)?;
        let views = post_gst_views(&trace, Time::units(BROADCAST_SPREAD));
        Ok((views.len(), views.iter().map(|(_, t)| spread(t)).max().unwrap_or(Time::ZERO)))
    });
    let mut views = 0;
    let mut worst = Time::ZERO;
    for r in results {
        match r {
            Ok((c, w)) => {
                views += c;
                worst = worst.max(w);
            }
            Err(e) => return outcome(false, format!("run failed: {e}")),
        }
    }
    let bound = Time::units(BROADCAST_SPREAD);
    outcome(views > 0 && worst <= bound, format!("{BROADCAST_RUNS} runs, {views} views, max spread {worst} (bound {bound})"))
}

fn criterion_4() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (kind, expected) in [(SyncKind::Doubling, 0u64), (SyncKind::Broadcast, 16), (SyncKind::Cogsworth, 20)] {
        let cfg = ScenarioConfig::new(kind, 4, 1);
        let buckets = match run_checked(&cfg) {
            Ok(trace) => metrics::message_buckets(&trace, &metrics::detect_sync_intervals(&trace, cfg.c)).0,
            Err(e) => return outcome(false, format!("{kind}: {e}")),
        };
        let ok = !buckets.is_empty() && buckets.iter().all(|&b| b == expected);
        pass &= ok;
        parts.push(format!("{kind} {} syncs x {expected}{}", buckets.len(), if ok { "" } else { " MISMATCH" }));
    }
    outcome(pass, parts.join(", "))
}

fn criterion_5() -> Outcome {
    let cases: [(&str, Metric, FitOrder); 6] = [
        ("cogsworth-faultless", Metric::Communication, FitOrder::Linear),
        ("table1-cogsworth-benign", Metric::Communication, FitOrder::Linear),
        ("table1-broadcast", Metric::Communication, FitOrder::Quadratic),
        ("table1-cogsworth-byzantine", Metric::Communication, FitOrder::Quadratic),
        ("table1-cogsworth-benign-worst", Metric::FirstCommunication, FitOrder::Linear),
        ("table1-cogsworth-benign-worst", Metric::FirstLatency, FitOrder::Linear),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, metric, order) in cases {
        let p = harness::preset(name).expect("preset exists");
        let (axis, values) = p.sweep.clone().expect("preset has a sweep");
        let table = run_sweep(&p.config, axis, &values);
        let ok = table.fit(metric).is_some_and(|m| m.points == values.len() && m.fit.supports(order, MIN_R2));
        let r2 = table.fit(metric).map_or(f64::NAN, |m| m.fit.get(order).r2);
        pass &= ok;
        parts.push(format!("{name}/{}: {order:?} R2={r2:.4}{}", metric.name(), if ok { "" } else { " FAIL" }));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let started = Instant::now();
    let est = estimate_consecutive_byzantine_leaders(100, 33, X_TRIALS, 0);
    let elapsed = started.elapsed();
    let target = 100.0 / 67.0;
    let pass = (est.mean_until_honest - target).abs() <= X_TOLERANCE && elapsed < X_TIME_LIMIT;
    outcome(
        pass,
        format!("E(X)={:.4} vs {target:.4} (tol {X_TOLERANCE}), {X_TRIALS} trials in {:.2}s", est.mean_until_honest, elapsed.as_secs_f64()),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut entry_mismatches = 0;
    let mut entries_checked = 0;
    let mut overlap_mismatches = Vec::new();
    for i in 0..OVERLAP_INSTANCES {
        let k: u64 = rng.gen_range(0..4);
        let l: u64 = k + rng.gen_range(0..6);
        let beta = Time::from_ticks(rng.gen_range(100_000..=3_000_000));
        let c = Time::from_ticks(rng.gen_range(0..=40 * beta.ticks()));
        let expected = min_sync_view(c, k, l, beta);
        let initial = vec![k, l, rng.gen_range(k..=l), rng.gen_range(k..=l)];
        let horizon = predicted_entry_time(expected + 2, k, beta).expect("fits in u64");
        let cfg = ScenarioConfig {
            beta,
            c,
            initial_views: Some(initial.clone()),
            horizon,
            seed: i,
            ..ScenarioConfig::new(SyncKind::Doubling, 4, 1)
        };
        let trace = match run_checked(&cfg) {
            Ok(t) => t,
            Err(e) => return outcome(false, format!("instance {i}: {e}")),
        };
        for (_, time, node, view) in trace.honest_proposals() {
            entries_checked += 1;
            if predicted_entry_time(view, initial[node.index() - 1], beta) != Some(time) {
                entry_mismatches += 1;
            }
        }
        let detected = metrics::detect_sync_intervals(&trace, c).first().map(|iv| iv.view);
        if detected != Some(expected) {
            overlap_mismatches.push(format!("k={k} l={l} c={c} beta={beta}: {detected:?} vs {expected}"));
        }
    }
    outcome(
        entries_checked > 0 && entry_mismatches == 0 && overlap_mismatches.is_empty(),
        format!(
            "{entries_checked} entries, {entry_mismatches} off the closed form; {OVERLAP_INSTANCES} instances, {} first-sync mismatches {}",
            overlap_mismatches.len(),
            overlap_mismatches.join("; ")
        ),
    )
}

fn scenario_presets() -> Vec<Preset> {
    presets().into_iter().filter(|p| p.kind == PresetKind::Scenario).collect()
}

fn criterion_8() -> Outcome {
    let mut configs = Vec::new();
    for p in scenario_presets() {
        if let Some((axis, values)) = &p.sweep {
            configs.extend(values.iter().map(|&v| axis.apply(&p.config, v)));
        }
        configs.push(p.config);
    }
    let results = par::map(&configs, |cfg| run_checked(cfg).map(|t| audit_validity(&t)));
    let mut failures = Vec::new();
    for (cfg, r) in configs.iter().zip(results) {
        match r {
            Ok(v) if v.passed() => {}
            Ok(v) => failures.push(format!("{} n={}: {v:?}", cfg.synchronizer, cfg.n)),
            Err(e) => failures.push(e.to_string()),
        }
    }
    // Negative control: drop every wish and the audit must object.
    let mut control = sim::run(&ScenarioConfig::new(SyncKind::Cogsworth, 4, 1)).expect("faultless run");
    control.records.retain(|r| !matches!(r.event, TraceEvent::Wish { .. }));
    let flagged = !audit_validity(&control).passed();
    outcome(
        failures.is_empty() && flagged,
        format!("{} traces audited, {} violations; wishless control flagged: {flagged} {}", configs.len(), failures.len(), failures.join("; ")),
    )
}

fn preset_csv(p: &Preset) -> Result<Vec<u8>> {
    match p.kind {
        PresetKind::ExpectedX { trials } => {
            emit::estimate_csv(&estimate_consecutive_byzantine_leaders(p.config.n, p.config.f, trials, p.config.seed))
        }
        PresetKind::Scenario => {
            let mut out = emit::reports_csv(&[run_scenario(&p.config)?])?;
            if let Some((axis, values)) = &p.sweep {
                let table = run_sweep(&p.config, *axis, values);
                out.extend(emit::sweep_csv(&table)?);
                out.extend(emit::fits_csv(&table)?);
            }
            Ok(out)
        }
    }
}

fn criterion_9() -> Outcome {
    let all = presets();
    let mut differing = Vec::new();
    for p in &all {
        match (preset_csv(p), preset_csv(p)) {
            (Ok(a), Ok(b)) if a == b && !a.is_empty() => {}
            (Ok(_), Ok(_)) => differing.push(p.name.to_string()),
            (Err(e), _) | (_, Err(e)) => differing.push(format!("{}: {e}", p.name)),
        }
    }
    outcome(differing.is_empty(), format!("{} presets run twice, {} differ {}", all.len(), differing.len(), differing.join(", ")))
}

fn criterion_10() -> Outcome {
    let mut latencies = Vec::new();
    for g in GAPS {
        let cfg = ScenarioConfig {
            beta: Time::units(1),
            c: Time::units(1),
            initial_views: Some(vec![0, g, g, g]),
            horizon: Time::units(1 << (g + 4)),
            ..ScenarioConfig::new(SyncKind::Doubling, 4, 1)
        };
        match run_scenario(&cfg) {
            Ok(r) => latencies.push((g, r.first_latency)),
            Err(e) => return outcome(false, format!("gap {g}: {e}")),
        }
    }
    let bounded = latencies.iter().all(|&(g, l)| l.is_some_and(|l| l >= ((1u64 << g) - 1) as f64));
    let monotone = latencies.windows(2).all(|w| w[0].1 < w[1].1);
    let shown: Vec<String> = latencies.iter().map(|(g, l)| format!("{g}:{}", l.map_or("none".into(), |l| l.to_string()))).collect();
    outcome(bounded && monotone, format!("first latency by gap [{}], monotone {monotone}, >= 2^g-1 {bounded}", shown.join(" ")))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("honest-leader views synchronize within 4δ after GST", criterion_1),
        ("QC withholding still brings f+1 honest nodes within 2δ(f+2)", criterion_2),
        ("broadcast synchronizer entry spread within 2δ", criterion_3),
        ("messages per synchronization: doubling 0, broadcast 16, Cogsworth 20", criterion_4),
        ("growth orders of communication and latency", criterion_5),
        ("expected consecutive faulty leaders", criterion_6),
        ("doubling entry times and first overlapping view", criterion_7),
        ("validity on every built-in scenario", criterion_8),
        ("byte-identical reruns of every preset", criterion_9),
        ("doubling latency grows with the start-view gap", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2}: {} {name} ({}) [{:.1}s]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail.trim_end(),
            started.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
