use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn instance(name: &str) -> PathBuf {
    root().join("data/instances").join(format!("{name}.mps"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn regression_fixture() -> PathBuf {
    root().join("crates/gic-oracle/fixtures/regression.mps")
}

fn gic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gic")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_prints_the_lp_optimum() {
    let o = gic(&["solve", s(&instance("p0033"))]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("opt_lp")).unwrap();
    let z: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((z - 2520.571739).abs() < 1e-4);
    assert!(text.contains("basis"));
}

#[test]
fn exit_codes() {
    assert_eq!(gic(&["solve", "missing.mps"]).status.code(), Some(2));
    assert_eq!(gic(&["solve", s(&fixture("infeasible_toy.mps"))]).status.code(), Some(3));
    let p = instance("p0033");
    assert_eq!(gic(&["gics", s(&p), "--kh", "0", "--tilt", "off"]).status.code(), Some(4));
    assert_eq!(gic(&["gics", s(&p), "--sc", "h9"]).status.code(), Some(4));
    assert_eq!(gic(&["gics", s(&p), "--obj", "q"]).status.code(), Some(4));
    assert_eq!(gic(&["verify", "--suite", "nothing"]).status.code(), Some(4));
}

#[test]
fn gics_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let inst = instance("stein15_nosym");
    for out in [&a, &b] {
        let o = gic(&["gics", s(&inst), "--obj", "t", "--seed", "7", "--out", s(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ja = std::fs::read(a.join("cuts.json")).unwrap();
    assert_eq!(ja, std::fs::read(b.join("cuts.json")).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(v["seed"], 7);
    assert!(!v["gics"].as_array().unwrap().is_empty());
    let trace = std::fs::read_to_string(a.join("trace.jsonl")).unwrap();
    assert!(trace.lines().count() > 0);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "sc = h2\nkh = 1\ntilt = off\nobj = t\n").unwrap();
    let o = gic(&[
        "gics",
        s(&regression_fixture()),
        "--config",
        s(&cfg),
        "--kh",
        "2",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("cuts.json")).unwrap()).unwrap();
    assert_eq!(v["config"], "h2-T-t0-k2-r1");
}

#[test]
fn evaluate_reads_generated_cuts() {
    let dir = tempfile::tempdir().unwrap();
    let inst = instance("stein15_nosym");
    let optima = root().join("data/optima.csv");
    let o = gic(&["gics", s(&inst), "--kh", "1", "--obj-points", "50", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let o = gic(&[
        "evaluate",
        s(&inst),
        "--cuts",
        s(&dir.path().join("cuts.json")),
        "--optima",
        s(&optima),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let gap = |prefix: &str| -> f64 {
        let l = text.lines().find(|l| l.starts_with(prefix)).unwrap();
        l.rsplit(' ').next().unwrap().parse().unwrap()
    };
    assert!((gap("sic ") - 50.0).abs() <= 1.0);
    assert!(gap("gic+sic") >= gap("sic ") - 1e-6);
    // cuts from another instance do not fit
    let o = gic(&[
        "evaluate",
        s(&instance("p0033")),
        "--cuts",
        s(&dir.path().join("cuts.json")),
        "--optima",
        s(&optima),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_on_empty_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("results.csv");
    std::fs::write(&p, "").unwrap();
    let o = gic(&["report", s(&p)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("| instance |"));
}

#[test]
fn full_grid_sweep_covers_every_cell() {
    let dir = tempfile::tempdir().unwrap();
    let list = dir.path().join("desk.txt");
    std::fs::write(&list, format!("{}\n", regression_fixture().display())).unwrap();
    let o = gic(&[
        "--jobs",
        "2",
        "sweep",
        "--grid",
        "table2",
        "--instances",
        s(&list),
        "--obj-points",
        "20",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 15 * 2 * 5);
    assert!(dir.path().join("points_vs_rays.csv").exists());
    let o = gic(&["report", s(&dir.path().join("results.csv"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("APPC"));
}

#[test]
fn verify_regression_suite_passes() {
    let o = gic(&["verify", "--suite", "appendix-c"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS appendix-c"));
}
