//! Behavior of the installed binary: exit codes, file guards, trace and
//! plot output shapes, and run-to-run determinism of written artifacts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nestedcuts"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn gen_instance(dir: &Path, seed: u64) -> PathBuf {
    let path = dir.join(format!("inst-{seed}.json"));
    let out = run(&[
        "generate", "--T", "3", "--n", "2", "--M", "2", "--seed", &seed.to_string(),
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["solve", "--help"])), 0);
}

#[test]
fn unknown_flags_and_missing_args_exit_sixty_four() {
    assert_eq!(code(&run(&["solve", "--bogus"])), 64);
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run(&[])), 64);
    // Missing required --out.
    assert_eq!(code(&run(&["generate", "--T", "3", "--n", "2", "--M", "2", "--seed", "1"])), 64);
}

#[test]
fn generate_is_deterministic_and_refuses_overwrites() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_instance(dir.path(), 3);
    let b_path = dir.path().join("other.json");
    let out = run(&[
        "generate", "--T", "3", "--n", "2", "--M", "2", "--seed", "3",
        "--out", b_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b_path).unwrap());

    let again = run(&[
        "generate", "--T", "3", "--n", "2", "--M", "2", "--seed", "4",
        "--out", a.to_str().unwrap(),
    ]);
    assert_eq!(code(&again), 1);
    let msg = String::from_utf8_lossy(&again.stderr);
    assert!(msg.contains("--force"), "stderr: {msg}");
    // Content untouched by the refused run.
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b_path).unwrap());

    let forced = run(&[
        "generate", "--T", "3", "--n", "2", "--M", "2", "--seed", "4",
        "--out", a.to_str().unwrap(), "--force",
    ]);
    assert_eq!(code(&forced), 0);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&b_path).unwrap());
}

#[test]
fn solve_trace_has_documented_header_and_zeroed_times() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_instance(dir.path(), 5);
    let trace = dir.path().join("t.csv");
    let out = run(&[
        "solve", "--algo", "stodcup", "--instance", inst.to_str().unwrap(),
        "--max-iters", "12", "--ub-start", "6", "--ub-window", "6",
        "--trace", trace.to_str().unwrap(), "--zero-time",
    ]);
    assert!(matches!(code(&out), 0 | 2));
    let body = std::fs::read_to_string(&trace).unwrap();
    let mut lines = body.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iter,lb,ub,ub_mean,ub_std,eps,cuts_q_total,lp_solves,wall_time_s"
    );
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    for (i, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 9);
        assert_eq!(fields[0], (i + 1).to_string());
        assert_eq!(*fields.last().unwrap(), "0.0", "wall time not zeroed: {row}");
        // Upper bound fields hold the NaN literal before the start iteration.
        if i + 1 < 6 {
            assert_eq!(fields[2], "NaN");
            assert_eq!(fields[3], "NaN");
        }
    }
}

#[test]
fn dcup_refuses_stochastic_instances() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_instance(dir.path(), 6);
    let out = run(&["solve", "--algo", "dcup", "--instance", inst.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("dcup requires deterministic instance"), "stderr: {msg}");
}

#[test]
fn missing_instance_and_bad_schedule_are_runtime_errors() {
    let out = run(&["solve", "--algo", "stodcup", "--instance", "/nonexistent.json"]);
    assert_eq!(code(&out), 1);

    let dir = tempfile::tempdir().unwrap();
    let inst = gen_instance(dir.path(), 7);
    let out = run(&[
        "solve", "--algo", "istodcup", "--instance", inst.to_str().unwrap(),
        "--eps-schedule", "constant:zebra",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn iteration_budget_exit_is_two() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_instance(dir.path(), 8);
    let out = run(&[
        "solve", "--algo", "istodcup", "--instance", inst.to_str().unwrap(),
        "--max-iters", "3", "--eps-schedule", "builtin:table2/10",
    ]);
    assert_eq!(code(&out), 2);
    let msg = String::from_utf8_lossy(&out.stdout);
    assert!(msg.contains("iters=3"), "stdout: {msg}");
}

#[test]
fn plot_renders_labeled_svg_with_nan_gaps_split() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_instance(dir.path(), 9);
    let trace = dir.path().join("t.csv");
    let out = run(&[
        "solve", "--algo", "stodcup", "--instance", inst.to_str().unwrap(),
        "--max-iters", "15", "--ub-start", "8", "--ub-window", "8",
        "--trace", trace.to_str().unwrap(), "--zero-time",
    ]);
    assert!(matches!(code(&out), 0 | 2));
    let svg_path = dir.path().join("t.svg");
    let out = run(&["plot", "--trace", trace.to_str().unwrap(), "--out", svg_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("iteration"), "x axis label missing");
    assert!(svg.contains(">bound"), "y axis label missing");
    assert!(svg.contains("lower bound") && svg.contains("upper bound"));
    // The lower-bound series is continuous; the upper starts at iteration 8,
    // so the plot holds at least two polylines and no NaN leaks into one.
    assert!(svg.matches("<polyline").count() >= 2, "{svg}");
    assert!(!svg.contains("NaN"));

    let missing = run(&["plot", "--trace", "/nonexistent.csv", "--out", svg_path.to_str().unwrap()]);
    assert_eq!(code(&missing), 1);
}

#[test]
fn snapshot_and_lp_dump_have_documented_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_instance(dir.path(), 10);
    let snap = dir.path().join("s.csv");
    let dump = dir.path().join("lp.txt");
    let out = run(&[
        "solve", "--algo", "istodcup", "--instance", inst.to_str().unwrap(),
        "--max-iters", "4", "--eps-schedule", "constant:1.0",
        "--snapshot", snap.to_str().unwrap(),
        "--dump-first-lp", dump.to_str().unwrap(),
    ]);
    assert!(matches!(code(&out), 0 | 2));

    let body = std::fs::read_to_string(&snap).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next().unwrap(), "kind,t,j,birth_iter,c,a1,a2,b1,b2");
    let mut kinds = std::collections::BTreeSet::new();
    for row in lines {
        kinds.insert(row.split(',').next().unwrap().to_string());
    }
    assert!(kinds.contains("objective"));
    assert!(kinds.contains("cost-to-go"));
    assert!(kinds.iter().any(|k| k.starts_with("constraint(")));

    let text = std::fs::read_to_string(&dump).unwrap();
    for marker in ["OBJCUT", "CONCUT", "CTGCUT", "BOUNDS lo=", "ANCHOR xprev="] {
        assert!(text.contains(marker), "missing {marker} in:\n{text}");
    }
}

#[test]
fn same_seed_solves_write_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_instance(dir.path(), 11);
    let mut paths = Vec::new();
    for tag in ["a", "b"] {
        let trace = dir.path().join(format!("t-{tag}.csv"));
        let snap = dir.path().join(format!("s-{tag}.csv"));
        let out = run(&[
            "solve", "--algo", "istodcup", "--instance", inst.to_str().unwrap(),
            "--seed", "21", "--max-iters", "10", "--eps-schedule", "builtin:table2/10",
            "--ub-start", "5", "--ub-window", "5",
            "--trace", trace.to_str().unwrap(),
            "--snapshot", snap.to_str().unwrap(), "--zero-time",
        ]);
        assert!(matches!(code(&out), 0 | 2));
        paths.push((trace, snap));
    }
    assert_eq!(
        std::fs::read(&paths[0].0).unwrap(),
        std::fs::read(&paths[1].0).unwrap(),
        "traces differ across identical runs"
    );
    assert_eq!(
        std::fs::read(&paths[0].1).unwrap(),
        std::fs::read(&paths[1].1).unwrap(),
        "snapshots differ across identical runs"
    );
}
