use std::path::Path;
use std::process::{Command, Output};

fn fracnash(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracnash"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn small(dir: &Path) -> Vec<String> {
    [
        "--preset", "ex3", "--gamma", "0.6,0.9", "--s", "0.25,0.5", "--n", "12", "--m", "8",
        "--out",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain([dir.display().to_string()])
    .collect()
}

fn run(args: &[String]) -> Output {
    fracnash(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn converged_sweep_exits_zero_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&small(dir.path()));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let results = std::fs::read_to_string(dir.path().join("ex3_results.csv")).unwrap();
    let mut lines = results.lines();
    assert_eq!(
        lines.next(),
        Some("gamma,s,err_w1,err_w2,iters,tol,seconds")
    );
    assert_eq!(lines.count(), 4);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.ends_with("[ok]")).count(), 4);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# small ex4 run\npreset = ex4\ngrid.n = 10\ngrid.m = 6\norders.gamma = 0.7\norders.s = 0.5\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = fracnash(&[
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "name=custom4",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("custom4_results.csv").exists());
}

#[test]
fn configuration_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for args in [
        vec!["--preset", "ex9", "--out", d],
        vec!["--preset", "ex3", "--set", "grid.bogus=1", "--out", d],
        vec!["--preset", "ex3", "--set", "novalue", "--out", d],
        vec!["--preset", "ex3", "--tol", "-1", "--out", d],
        vec!["--config", "/nonexistent/run.cfg", "--out", d],
        vec!["--preset", "ex3", "--bogus-flag"],
    ] {
        let out = fracnash(&args);
        assert_eq!(
            code(&out),
            1,
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn unconverged_rows_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = small(dir.path());
    args.extend(["--max-iter", "1", "--tol", "1e-30"].map(String::from));
    let out = run(&args);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stdout).contains("not converged"));
    assert!(dir.path().join("ex3_results.csv").exists());
}

#[test]
fn out_of_range_orders_fail_their_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = fracnash(&[
        "--preset", "ex3", "--gamma", "0.6", "--s", "0.5,1.5", "--n", "10", "--m", "6", "--out", d,
    ]);
    assert_eq!(code(&out), 2);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.ends_with("[ok]")).count(), 1);
    assert_eq!(stdout.lines().filter(|l| l.contains("error:")).count(), 1);
}

#[test]
fn no_control_skips_iterations() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = small(dir.path());
    args.push("--no-control".into());
    let out = run(&args);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout)
        .lines()
        .all(|l| !l.starts_with("gamma=") || l.contains("iters=0")));
}

#[test]
fn oracle_check_passes() {
    let out = fracnash(&[
        "--preset",
        "ex4",
        "--gamma",
        "0.8",
        "--s",
        "0.5",
        "--oracle-check",
        "--set",
        "oracle.cap=60",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("gamma,s,n,m,dofs,disagreement"));
    assert_eq!(stdout.lines().count(), 2);
}
