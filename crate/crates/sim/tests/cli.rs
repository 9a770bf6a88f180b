use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sim")).args(args).output().expect("sim runs")
}

fn write_scenario(dir: &Path, body: &str) -> String {
    let path = dir.join("scenario.cfg");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn run_writes_artifacts_and_replay_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), "duration = 120\nuplink.cadence = 30\n");
    let out = dir.path().join("out");
    let o = sim(&["run", "--scenario", &scenario, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["state.csv", "energy.csv", "links.csv", "logbook.ndjson", "summary.json", "station.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let r = sim(&["replay", "--artifacts", out.to_str().unwrap()]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(r.stdout, fs::read(out.join("summary.json")).unwrap());
}

#[test]
fn seed_and_duration_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), "");
    let out = dir.path().join("out");
    let o = sim(&[
        "run", "--scenario", &scenario, "--out", out.to_str().unwrap(), "--seed", "9", "--duration", "10",
    ]);
    assert_eq!(code(&o), 0);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["duration_s"], 10.0);
    assert_eq!(summary["state_rows"], 10);
}

#[test]
fn tampered_summary_fails_replay() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), "duration = 20\n");
    let out = dir.path().join("out");
    assert_eq!(code(&sim(&["run", "--scenario", &scenario, "--out", out.to_str().unwrap()])), 0);
    let state = out.join("state.csv");
    let text = fs::read_to_string(&state).unwrap();
    let cut: Vec<&str> = text.lines().take(5).collect();
    fs::write(&state, cut.join("\n") + "\n").unwrap();
    let r = sim(&["replay", "--artifacts", out.to_str().unwrap()]);
    assert_eq!(code(&r), 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    assert_eq!(code(&sim(&["run", "--out", out])), 2);
    assert_eq!(code(&sim(&["launch"])), 2);
    assert_eq!(code(&sim(&["run", "--scenario", "/nonexistent/x.cfg", "--out", out])), 2);

    let bad = write_scenario(dir.path(), "wave.period = -1\nfoo.bar = 2\n");
    let o = sim(&["run", "--scenario", &bad, "--out", out]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("foo.bar"));

    let invalid = write_scenario(dir.path(), "wave.period = -1\n");
    let o = sim(&["run", "--scenario", &invalid, "--out", out]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("wave.period"));

    let ok = write_scenario(dir.path(), "");
    let o = sim(&["sweep", "--param", "wing_colour", "--values", "1,2", "--scenario", &ok, "--out", out]);
    assert_eq!(code(&o), 2);
    let o = sim(&["run", "--scenario", &ok, "--out", out, "--duration", "1.001"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), "sweep.run_duration = 20\n");
    let out = dir.path().join("sweep");
    let o = sim(&[
        "sweep", "--param", "limit_angle", "--values", "10,15,20,25,30", "--scenario", &scenario, "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("sweep_limit_angle.csv")).unwrap();
    let thrust: Vec<f64> = table
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(thrust.len(), 5);
    let best = (0..5).max_by(|&a, &b| thrust[a].total_cmp(&thrust[b])).unwrap();
    assert_eq!(best, 2);
}
