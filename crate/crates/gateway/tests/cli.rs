use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn riverhelm(args: &[&Path]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riverhelm")).args(args).output().expect("binary runs")
}

#[test]
fn validate_exit_codes() {
    let ok = riverhelm(&[Path::new("validate"), &root().join("corpus/valid/five_node.mdl.xml")]);
    assert_eq!(ok.status.code(), Some(0));

    let bad = riverhelm(&[Path::new("validate"), &root().join("corpus/invalid/underpopulated_single.mdl.xml")]);
    assert_eq!(bad.status.code(), Some(1));
    let err = String::from_utf8_lossy(&bad.stderr);
    assert!(err.contains("FLOW_UNDERPOPULATED"), "{err}");
    // path:line:col: RULE id
    let first = err.lines().next().unwrap();
    let fields: Vec<&str> = first.rsplitn(2, ": ").collect();
    assert_eq!(fields[1].rsplit(':').count(), 3, "{first}");

    let missing = riverhelm(&[Path::new("validate"), Path::new("/no/such/map.mdl.xml")]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn scenario_exit_codes_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let map = root().join("corpus/valid/five_node.mdl.xml");
    let report = dir.path().join("report.json");
    let out = Command::new(env!("CARGO_BIN_EXE_riverhelm"))
        .arg("scenario")
        .arg(&map)
        .arg(root().join("scenarios/place_a_to_c.jsonl"))
        .arg("--report")
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["passed"], true);

    let failing = dir.path().join("fail.jsonl");
    std::fs::write(
        &failing,
        "{\"t\": 0, \"action\": \"spawn\", \"robot\": \"r1\", \"at\": \"A\"}\n\
         {\"t\": 30, \"action\": \"assert\", \"robot\": \"r1\", \"near\": \"E\", \"within\": 5}\n",
    )
    .unwrap();
    assert_eq!(riverhelm(&[Path::new("scenario"), &map, &failing]).status.code(), Some(1));

    let broken = dir.path().join("broken.jsonl");
    std::fs::write(&broken, "{\"t\": 0, \"action\": \"warp\"}\n").unwrap();
    let out = riverhelm(&[Path::new("scenario"), &map, &broken]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn replay_rebuilds_registry_from_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("fleet.jsonl");
    let map = root().join("corpus/valid/five_node.mdl.xml");
    let out = Command::new(env!("CARGO_BIN_EXE_riverhelm"))
        .arg("scenario")
        .arg(&map)
        .arg(root().join("scenarios/sensor_autopark.jsonl"))
        .arg("--log")
        .arg(&log)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = riverhelm(&[Path::new("replay"), &log]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let robots: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(robots[0]["state"]["id"], "r1");
    assert_eq!(robots[0]["state"]["parked_at"], "E");
}

#[test]
fn bundled_scenarios_pass() {
    let map = root().join("corpus/valid/five_node.mdl.xml");
    for entry in std::fs::read_dir(root().join("scenarios")).unwrap() {
        let script = entry.unwrap().path();
        let out = riverhelm(&[Path::new("scenario"), &map, &script]);
        assert_eq!(out.status.code(), Some(0), "{}: {}", script.display(), String::from_utf8_lossy(&out.stdout));
    }
}
