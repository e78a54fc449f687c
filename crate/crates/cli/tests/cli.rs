use std::path::Path;
use std::process::{Command, Output};

fn fracnls(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracnls"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn selftest_passes() {
    let d = tempfile::tempdir().unwrap();
    let o = fracnls(&["selftest"], d.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
}

#[test]
fn audit_gap_reports_positive_minimum() {
    let d = tempfile::tempdir().unwrap();
    let o = fracnls(
        &[
            "audit-gap",
            "--alpha",
            "0.75",
            "--jmax",
            "10",
            "--kmax",
            "10",
            "--nmax",
            "100",
        ],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&read(d.path(), "freq_lower_bound.json")).unwrap();
    let min = json["extremals"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["label"] == "min_ratio")
        .unwrap()["value"]
        .as_f64()
        .unwrap();
    assert!(min > 0.0);
    assert!(read(d.path(), "freq_lower_bound_config.toml").contains("n_max = 100"));
}

#[test]
fn simulate_conserves_mass() {
    let d = tempfile::tempdir().unwrap();
    let o = fracnls(
        &[
            "simulate", "--alpha", "0.75", "--mu", "-1", "--sigma", "1.2", "--M", "128", "--T",
            "0.2", "--dt", "1e-3",
        ],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = read(d.path(), "simulate_trajectory.csv");
    let mut rows = csv.lines();
    assert_eq!(
        rows.next().unwrap(),
        "t,mass,kinetic,potential,energy,L4,Linf"
    );
    let mass: Vec<f64> = rows
        .map(|r| r.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let drift = mass
        .iter()
        .map(|m| (m / mass[0] - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(drift <= 1e-10, "{drift}");
}

#[test]
fn usage_and_configuration_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(
        fracnls(&["simulate", "--bogus"], d.path()).status.code(),
        Some(2)
    );
    assert_eq!(fracnls(&["nosuch"], d.path()).status.code(), Some(2));
    let o = fracnls(&["audit-gap", "--alpha", "1.2"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha out of (1/2,1)"));
    let cfg = d.path().join("bad.toml");
    std::fs::write(&cfg, "[highlow.config]\ns = 0.8\ns0 = 0.85\n").unwrap();
    let o = fracnls(&["--config", cfg.to_str().unwrap(), "highlow"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("s0 < s < alpha"));
}

#[test]
fn failing_audit_exits_1() {
    let d = tempfile::tempdir().unwrap();
    // at s = 0 the ratio does not blow up on a short ladder, so the probe fails
    let o = fracnls(&["audit-strichartz", "--ladder", "16,32"], d.path());
    assert_eq!(
        o.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
}

#[test]
fn config_echo_reproduces_run_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = a.path().join("in.toml");
    std::fs::write(
        &cfg,
        "[highlow]\nm = 128\ncutoffs = [8, 16]\n\n[highlow.config]\nstages = 2\n",
    )
    .unwrap();
    let o = fracnls(
        &[
            "--threads",
            "1",
            "--config",
            cfg.to_str().unwrap(),
            "highlow",
        ],
        a.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let echo = a.path().join("highlow_config.toml");
    let o = fracnls(
        &[
            "--threads",
            "3",
            "--config",
            echo.to_str().unwrap(),
            "highlow",
        ],
        b.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    for f in [
        "highlow.json",
        "highlow_stages.csv",
        "highlow_scaling.csv",
        "highlow_config.toml",
    ] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}
