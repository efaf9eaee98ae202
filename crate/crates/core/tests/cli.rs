use std::path::Path;
use std::process::{Command, Output};

use nmmg::harness::io::{
    parse_compare_json, parse_front_csv, parse_front_json, parse_run_json, parse_trace_csv,
};
use nmmg::StopReason;

fn nmmg(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmmg"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("NMMG_OUT_DIR")
        .output()
        .expect("spawn nmmg")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_writes_trace_and_reaches_criticality() {
    let dir = tempfile::tempdir().unwrap();
    let o = nmmg(
        &[
            "solve",
            "--problem",
            "quad2",
            "--algo",
            "avg",
            "--n",
            "2",
            "--seed",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let rows =
        parse_trace_csv::<f64>(&std::fs::read_to_string(dir.path().join("trace.csv")).unwrap())
            .unwrap();
    assert!(rows.last().unwrap().v_norm <= 1e-6);
    let doc = parse_run_json::<f64>(&std::fs::read_to_string(dir.path().join("run.json")).unwrap())
        .unwrap();
    assert_eq!(doc.stop_reason, StopReason::Critical);
    assert_eq!(doc.trace.len(), rows.len());
}

#[test]
fn solve_accepts_explicit_start_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let o = nmmg(
        &[
            "solve",
            "--problem",
            "ff",
            "--n",
            "3",
            "--x0",
            "-0.5,0.2,0.9",
            "--algo",
            "max",
            "--M",
            "3",
            "--N",
            "2",
            "--gamma",
            "0.5",
            "--rho",
            "1e-3",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let doc = parse_run_json::<f64>(&std::fs::read_to_string(dir.path().join("run.json")).unwrap())
        .unwrap();
    assert_eq!(doc.trace[0].x, vec![-0.5, 0.2, 0.9]);
    assert_eq!((doc.config.window, doc.config.memory), (3, 2));
    assert_eq!((doc.config.gamma, doc.config.rho), (0.5, 1e-3));
}

#[test]
fn front_spans_the_pareto_segment() {
    let dir = tempfile::tempdir().unwrap();
    let o = nmmg(
        &[
            "front",
            "--problem",
            "quad2",
            "--starts",
            "100",
            "--algo",
            "max",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let rows =
        parse_front_csv::<f64>(&std::fs::read_to_string(dir.path().join("front.csv")).unwrap())
            .unwrap();
    assert!(rows.len() >= 50, "only {} points", rows.len());
    for a in &rows {
        for b in &rows {
            let le = a.f.iter().zip(&b.f).all(|(x, y)| x <= y);
            assert!(!(le && a.f != b.f), "{:?} dominates {:?}", a.f, b.f);
        }
    }
    let dist = |p: &[f64], c: f64| p.iter().map(|v| (v - c).powi(2)).sum::<f64>().sqrt();
    let near_a = rows
        .iter()
        .map(|r| dist(&r.x, 0.0))
        .fold(f64::INFINITY, f64::min);
    let near_b = rows
        .iter()
        .map(|r| dist(&r.x, 2.0))
        .fold(f64::INFINITY, f64::min);
    assert!(near_a <= 1e-3 && near_b <= 1e-3, "{near_a} {near_b}");
    let doc =
        parse_front_json::<f64>(&std::fs::read_to_string(dir.path().join("stats.json")).unwrap())
            .unwrap();
    assert_eq!(doc.runs.len(), 100);
    assert_eq!(doc.front.len(), rows.len());
}

#[test]
fn compare_uses_identical_starts() {
    let dir = tempfile::tempdir().unwrap();
    let o = nmmg(
        &[
            "compare",
            "--problem",
            "ellip2",
            "--n",
            "5",
            "--starts",
            "8",
            "--seed",
            "4",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let doc =
        parse_compare_json(&std::fs::read_to_string(dir.path().join("compare.json")).unwrap())
            .unwrap();
    assert_eq!(doc.rows.len(), 4);
    assert!(dir.path().join("compare.csv").exists());
    assert!(stdout(&o).contains("monotone"));
}

#[test]
fn check_passes_on_healthy_build() {
    let dir = tempfile::tempdir().unwrap();
    let o = nmmg(&["check", "--starts", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("check passed"));
}

#[test]
fn check_flags_flipped_beta_sign() {
    let dir = tempfile::tempdir().unwrap();
    let o = nmmg(
        &["check", "--starts", "3", "--inject-fault", "flip-beta-sign"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stdout(&o).contains("violated sufficient_descent"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["solve", "--problem", "nope"],
        vec!["solve", "--bogus"],
        vec!["solve", "--algo", "fastest"],
        vec!["solve", "--eta-max", "1.5"],
        vec!["solve", "--n", "2", "--x0", "1,2,3"],
        vec!["frobnicate"],
    ] {
        let o = nmmg(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("params.cfg");
    std::fs::write(&cfg, "# test\nalgorithm = max\nM = 4\nrho = 0.01\n").unwrap();
    let o = nmmg(
        &[
            "solve",
            "--config",
            cfg.to_str().unwrap(),
            "--rho",
            "0.002",
            "--problem",
            "quad3",
            "--n",
            "3",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let doc = parse_run_json::<f64>(&std::fs::read_to_string(dir.path().join("run.json")).unwrap())
        .unwrap();
    assert_eq!(doc.config.window, 4);
    assert_eq!(doc.config.rho, 0.002);
    assert_eq!(doc.algorithm.as_str(), "max");

    std::fs::write(&cfg, "window = 4\nnot_a_key = 1\n").unwrap();
    let o = nmmg(&["solve", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_dir_defaults_to_env_var() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_nmmg"))
        .args(["solve", "--problem", "sphere", "--n", "5"])
        .env("NMMG_OUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(target.join("trace.csv").exists());
}

#[test]
fn solver_error_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // rho = 0.99 with two trials (alpha = 1, 1/2) cannot pass on a curved quadratic
    let cfg = dir.path().join("p.cfg");
    std::fs::write(&cfg, "max_ls_trials = 1\nalgorithm = max\nrho = 0.99\n").unwrap();
    let o = nmmg(
        &[
            "solve",
            "--problem",
            "ellip2",
            "--n",
            "10",
            "--config",
            cfg.to_str().unwrap(),
            "--x0",
            "5,5,5,5,5,5,5,5,5,5",
            "--M",
            "0",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stdout(&o).contains("line_search_fail"));
}
