use std::collections::BTreeMap;

use glider_core::comms::logbook::LogRecord;
use glider_core::harness::{replay, run, HarnessError};
use glider_core::scenario::{parse_scenario, ScenarioError};

fn artifacts(text: &str) -> glider_core::harness::RunArtifacts {
    run(&parse_scenario(text).expect("scenario parses")).expect("run succeeds")
}

fn data_lines(csv: &str) -> usize {
    csv.lines().filter(|l| !l.starts_with('#')).count() - 1
}

#[test]
fn zero_duration_writes_headers_only() {
    let a = artifacts("duration = 0\n");
    assert_eq!(data_lines(&a.state_csv), 0);
    assert_eq!(data_lines(&a.energy_csv), 0);
    assert!(a.state_csv.starts_with("# glider-state v1\n"));
    assert!(a.energy_csv.starts_with("# glider-energy v1 "));
    assert!(a.links_csv.starts_with("# glider-links v1\n"));
}

#[test]
fn hour_run_moves_and_reports() {
    let a = artifacts("duration = 3600\n");
    assert_eq!(data_lines(&a.state_csv), 3600);
    let m = &a.summary.motion;
    assert!(m.mean_surge_speed > 0.1, "{}", m.mean_surge_speed);
    assert!(m.min_tether_tension >= 0.0);
    assert!(a.summary.links.telemetry_delivered >= 6);
    assert!(a.summary.energy.ledger_residual_wh.abs() < 1e-6);
    for (name, body) in a.files() {
        assert!(!body.contains("NaN") && !body.contains("inf"), "{name}");
    }
}

#[test]
fn same_seed_same_bytes_other_seed_differs() {
    let a = artifacts("duration = 300\nseed = 5\n");
    let b = artifacts("duration = 300\nseed = 5\n");
    let c = artifacts("duration = 300\nseed = 6\n");
    assert_eq!(a.files(), b.files());
    assert_ne!(a.logbook, c.logbook);
}

#[test]
fn replay_recomputes_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let a = artifacts("duration = 600\n");
    a.write_to(dir.path()).unwrap();
    assert_eq!(replay(dir.path()).unwrap(), a.summary);

    let path = dir.path().join("energy.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let last = lines.len() - 1;
    let edited = lines[last].replacen(",0.", ",1.", 1);
    lines[last] = &edited;
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    assert!(matches!(replay(dir.path()), Err(HarnessError::Replay(_))));
}

#[test]
fn logbook_holds_four_readings_per_sample() {
    let a = artifacts("duration = 60\nsensors.sample_interval = 5\n");
    let mut per_t: BTreeMap<String, usize> = BTreeMap::new();
    for line in a.logbook.lines() {
        if let LogRecord::Sample { t, .. } = serde_json::from_str::<LogRecord>(line).unwrap() {
            *per_t.entry(format!("{t}")).or_default() += 1;
        }
    }
    assert_eq!(per_t.len(), 12);
    assert!(per_t.values().all(|&n| n == 4));
}

#[test]
fn capsize_event_is_flagged() {
    let a = artifacts("duration = 120\nevents.capsize_at = 60\n");
    assert!(a.summary.motion.capsized_rows > 0);
    assert!(a.logbook.contains("capsize"));
}

#[test]
fn invalid_scenarios_name_every_key() {
    let err = parse_scenario("dt = 0.03\nwave.period = 0\nsat.window_open = -1\n").unwrap_err();
    let ScenarioError::Invalid(issues) = err else {
        panic!("expected validation issues")
    };
    let keys: Vec<&str> = issues.iter().map(|i| i.key.as_str()).collect();
    for key in ["record_interval", "sensors.sample_interval", "wave.period", "sat"] {
        assert!(keys.contains(&key), "{keys:?}");
    }
}
