use std::path::Path;
use std::process::{Command, Output};

fn edr_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edr-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("sweep.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn sweep_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "theta_grid = 3\nmethods = [\"three_state\"]\n");
    let out = edr_lab(&["sweep", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("theta,s,eps_direct,eta_direct,eps_three_state,eta_three_state,"));
    assert!(lines[1].starts_with("0,1,0,1.41421356237,0,1.41421356237,"));
}

#[test]
fn sweep_json_to_file_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "theta_grid = 4\nshots = 5000\nseed = 2\n");
    let mut files = Vec::new();
    for name in ["a.json", "b.json"] {
        let path = dir.path().join(name);
        let out = edr_lab(&[
            "sweep",
            "--config",
            &cfg,
            "--format",
            "json",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        files.push(std::fs::read(path).unwrap());
    }
    assert_eq!(files[0], files[1]);
    let text = String::from_utf8(files[0].clone()).unwrap();
    assert!(text.starts_with('[') && text.trim_end().ends_with(']'));
    assert_eq!(text.matches("\"theta\":").count(), 4);
}

#[test]
fn sweep_set_overrides_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "theta_grid = 3\nmethods = []\n");
    let out = edr_lab(&[
        "sweep",
        "--config",
        &cfg,
        "--set",
        "theta_grid=5",
        "--set",
        "relations=[\"ozawa\"]",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 6);
    assert_eq!(
        text.lines().next().unwrap(),
        "theta,s,eps_direct,eta_direct,rel_ozawa_lhs,rel_ozawa_rhs,rel_ozawa_slack"
    );
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "methods = [\"nope\"]\n");
    let out = edr_lab(&["sweep", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("weak_exact"));
    assert_eq!(edr_lab(&["sweep"]).status.code(), Some(1));
    assert_eq!(
        edr_lab(&["bounds", "--eps", "x", "--eta", "1", "--C", "1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn io_errors_exit_3() {
    let out = edr_lab(&["sweep", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(out.status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "theta_grid = 2\nmethods = []\n");
    let out = edr_lab(&["sweep", "--config", &cfg, "--output", "/nonexistent/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/dir/out.csv"));
}

#[test]
fn bounds_at_eighth_pi() {
    let eps = 2.0 * std::f64::consts::FRAC_PI_8.sin();
    let eta = eps;
    let out = edr_lab(&[
        "bounds",
        "--eps",
        &eps.to_string(),
        "--eta",
        &eta.to_string(),
        "--C",
        "1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let line = |name: &str| text.lines().find(|l| l.starts_with(name)).unwrap().to_string();
    assert!(line("heisenberg_ed").ends_with("violated"));
    assert!(line("ozawa ").ends_with("holds"));
    assert!(line("branciard2").contains(" 1 "));
    assert!(line("busch_qubit").contains("1.17157287525"));
    assert!(!text.contains("ozawa0"));
    let with_cross = stdout(&edr_lab(&[
        "bounds", "--eps", "0", "--eta", "1.4", "--C", "1", "--cross", "1",
    ]));
    assert!(with_cross
        .lines()
        .any(|l| l.starts_with("ozawa0") && l.ends_with("holds")));
}

#[test]
fn bounds_rejects_negative_input() {
    let out = edr_lab(&["bounds", "--eps=-1", "--eta", "1", "--C", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn shots_prints_estimates() {
    let out = edr_lab(&[
        "shots",
        "--theta",
        "0.39269908169872414",
        "--shots",
        "100000",
        "--seed",
        "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("(exact 0.76536686473)"));
    let again = stdout(&edr_lab(&[
        "shots",
        "--theta",
        "0.39269908169872414",
        "--shots",
        "100000",
        "--seed",
        "3",
    ]));
    assert_eq!(text, again);
    assert_eq!(
        edr_lab(&["shots", "--theta", "2", "--shots", "10"]).status.code(),
        Some(1)
    );
}

#[test]
fn fock_check_passes() {
    let out = edr_lab(&["fock-check"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("fock-check passed"));
}
