use std::path::Path;
use std::process::{Command, Output};

fn viewsync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_viewsync")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_prints_a_report() {
    let out = viewsync(&["run", "--sync", "cogsworth", "--n", "4", "--f", "1", "--wish-interval", "4.5", "--adversary", "crash:leader@0"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("sync,n,f,"));
    assert!(text.lines().nth(1).unwrap().ends_with(",pass"));
}

#[test]
fn config_rejections_exit_with_two() {
    for args in [
        &["run", "--n", "6", "--f", "2"][..],
        &["run", "--sync", "cogsworth", "--wish-interval", "4"],
        &["run", "--adversary", "explode:1"],
        &["run", "--n", "four"],
        &["run", "--preset", "missing"],
        &["sweep", "--axis", "m", "--values", "1"],
        &["sweep", "--values", "1,x"],
    ] {
        let out = viewsync(args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unwritable_output_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("missing").join("report.csv");
    let out = viewsync(&["run", "--out", path_arg(&out_path)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing"));
}

#[test]
fn sweep_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = viewsync(&["sweep", "--preset", "table1-cogsworth-benign", "--out", path_arg(path)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    assert_eq!(String::from_utf8(first).unwrap().lines().count(), 6);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.conf");
    std::fs::write(&cfg, "# broadcast baseline\nsync = broadcast\nn = 7\nf = 2\n").unwrap();
    let out = viewsync(&["run", "--config", path_arg(&cfg), "--seed", "3", "--format", "jsonl"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["config"]["synchronizer"], "broadcast");
    assert_eq!(report["config"]["n"], 7);
    assert_eq!(report["config"]["seed"], 3);
}

#[test]
fn trace_and_intervals_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let intervals = dir.path().join("intervals.csv");
    let out = viewsync(&["run", "--horizon", "30", "--trace", path_arg(&trace), "--intervals", path_arg(&intervals)]);
    assert_eq!(code(&out), 0);
    assert!(std::fs::read_to_string(&trace).unwrap().lines().count() > 1);
    assert!(std::fs::read_to_string(&intervals).unwrap().starts_with("k,view,leader"));
}

#[test]
fn presets_and_estimate() {
    let out = viewsync(&["presets"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).lines().any(|l| l.starts_with("table1-cogsworth-benign ")));
    let out = viewsync(&["estimate-x", "--n", "4", "--f", "1", "--trials", "2000", "--seed", "5"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("4,1,2000,"));
}
