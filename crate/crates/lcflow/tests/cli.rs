use std::path::Path;
use std::process::Command;

fn lcflow(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lcflow"))
        .args(args)
        .output()
        .unwrap()
}

fn with_out(args: &[&str], dir: &Path) -> std::process::Output {
    let mut a = args.to_vec();
    let d = dir.display().to_string();
    a.extend(["--out", &d, "--threads", "1"]);
    lcflow(&a)
}

#[test]
fn profile_writes_reports_and_log() {
    let dir = tempfile::tempdir().unwrap();
    let o = with_out(&["profile", "--L", "-0.75", "--nodes", "801"], dir.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# schema lcflow-report 1"));
    assert_eq!(lines.next(), Some("# command profile"));
    assert!(csv.contains("# config L = -0.75"));
    assert!(csv.contains("z,s,ds,d2s,ode_residual,first_integral_defect"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 802);

    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("profile.json")).unwrap())
            .unwrap();
    assert_eq!(v["command"], "profile");
    assert_eq!(v["summary"]["passed"], true);

    let log = std::fs::read_to_string(dir.path().join("profile.log.jsonl")).unwrap();
    let events: Vec<serde_json::Value> = log
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(events.first().unwrap()["event"], "start");
    assert_eq!(events.last().unwrap()["event"], "finish");
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# coarse\nL = -1.0\nnodes = 401\n").unwrap();
    let o = with_out(
        &["profile", "--config", conf.to_str().unwrap(), "--nodes=201"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(csv.contains("# config L = -1.0"));
    assert!(csv.contains("# config nodes = 201"));
}

#[test]
fn slab_simulation_writes_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let o = with_out(
        &[
            "simulate",
            "--eps",
            "0.1",
            "--nodes",
            "64",
            "--t_end",
            "0.005",
            "--record_every",
            "10",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(dir.path().join("simulate.qfld").metadata().unwrap().len() > 0);
    assert!(dir.path().join("simulate.csv").exists());
}

#[test]
fn invalid_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["profile", "--gamma", "1"][..],
        &["launch"][..],
        &["profile", "--L"][..],
        &["profile", "--nodes", "many"][..],
        &["profile", "--L", "-2"][..],
        &["thm-spectral", "--eps", "1e-9,1e-10,1e-11"][..],
    ] {
        let o = with_out(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
    assert_eq!(lcflow(&[]).status.code(), Some(2));
    assert_eq!(lcflow(&["--help"]).status.code(), Some(0));
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // a grid far too coarse for the fundamental solutions
    let o = with_out(
        &["fundamentals", "--y_max", "400", "--nodes", "41"],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let log = std::fs::read_to_string(dir.path().join("fundamentals.log.jsonl")).unwrap();
    assert!(log.lines().last().unwrap().contains("\"error\""));
}
