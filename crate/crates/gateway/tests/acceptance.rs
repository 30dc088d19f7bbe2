//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Runs entirely in-process with no UI.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use riverhelm::config::{ApiConfig, Deployment};
use riverhelm::journal::{read_log, Journal};
use riverhelm::replay::replay_log;
use riverhelm::scenario::run_script;
use riverhelm::service::start;
use riverhelm::session::Session;
use riverhelm_core::agent::{MenuItem, UIEvent};
use riverhelm_core::fleet::{Fleet, FleetConfig, FleetRecord};
use riverhelm_core::geo::{GeoCoordinate, Vec2};
use riverhelm_core::guard::{Cause, ExceptionGuard, GuardConfig, GuardState, Observation};
use riverhelm_core::mdl::query::flow_length_m;
use riverhelm_core::mdl::{
    parse_mdl, route_to, serialize_mdl, FlowSegment, Landmark, LandmarkKind, MapDocument, QueryError,
};
use riverhelm_core::sim::{FailureFlag, RoboticCommand, RobotSpec};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn five_node() -> Arc<MapDocument> {
    let text = std::fs::read_to_string(root().join("corpus/valid/five_node.mdl.xml")).unwrap();
    Arc::new(parse_mdl(&text).unwrap().map)
}

fn main() {
    let checks: [Check; 7] = [
        ("polling", polling),
        ("mdl_corpus", mdl_corpus),
        ("guard_truth_table", truth_table),
        ("safety_fuzz", safety_fuzz),
        ("end_to_end_placement", end_to_end),
        ("routing_oracle", routing_oracle),
        ("replay_determinism", replay_determinism),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        println!("PASS headless: every check above ran in-process without a UI");
    } else {
        println!("FAIL headless: {failed} check(s) failed");
        std::process::exit(1);
    }
}

fn polling() -> Outcome {
    let t0 = Instant::now();
    let mut fleet = Fleet::new(five_node(), FleetConfig::default()).map_err(|e| e.to_string())?;
    let a = fleet.map().landmark("A").unwrap().position;
    fleet.spawn(RobotSpec::new("r1", a)).map_err(|e| e.to_string())?;
    fleet.advance_to(150.0);
    let elapsed = t0.elapsed();
    let times: Vec<f64> = fleet
        .drain_records()
        .into_iter()
        .filter_map(|r| match r.record {
            FleetRecord::GpsFix(f) => Some(f.timestamp),
            _ => None,
        })
        .collect();
    let want: Vec<f64> = (1..=10).map(|k| 15.0 * k as f64).collect();
    if times != want {
        return Err(format!("poll times {times:?}"));
    }
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("10 polls at t=15..150 in {elapsed:?}"))
}

fn mdl_corpus() -> Outcome {
    let mut invalid = 0;
    let mut underpopulated = 0;
    let mut problems = Vec::new();
    for path in listing(&root().join("corpus/invalid")) {
        let expected = std::fs::read_to_string(path.with_file_name(
            path.file_name().unwrap().to_string_lossy().replace(".mdl.xml", ".expected"),
        ))
        .map_err(|e| format!("{}: {e}", path.display()))?;
        let expected = expected.trim();
        invalid += 1;
        match parse_mdl(&std::fs::read_to_string(&path).unwrap()) {
            Ok(_) => problems.push(format!("{} accepted", path.display())),
            Err(e) if e.rule_ids().contains(&expected) => {
                if expected == "FLOW_UNDERPOPULATED" {
                    underpopulated += 1;
                }
            }
            Err(e) => problems.push(format!("{}: want {expected}, got {:?}", path.display(), e.rule_ids())),
        }
    }
    let mut valid = 0;
    for path in listing(&root().join("corpus/valid")) {
        valid += 1;
        let text = std::fs::read_to_string(&path).unwrap();
        match parse_mdl(&text) {
            Ok(f) => match serialize_mdl(&f.map, &f.annotations) {
                Ok(out) if out == text => {}
                Ok(_) => problems.push(format!("{}: round trip differs", path.display())),
                Err(e) => problems.push(format!("{}: {e}", path.display())),
            },
            Err(e) => problems.push(format!("{}: rejected: {e}", path.display())),
        }
    }
    if underpopulated < 3 {
        problems.push(format!("only {underpopulated} FLOW_UNDERPOPULATED cases"));
    }
    if invalid == 0 || valid == 0 {
        problems.push("empty corpus".into());
    }
    if problems.is_empty() {
        Ok(format!("{invalid} invalid rejected ({underpopulated} underpopulated), {valid} valid round-tripped"))
    } else {
        Err(problems.join("; "))
    }
}

fn listing(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .map(|rd| rd.filter_map(|e| e.ok().map(|e| e.path())).collect())
        .unwrap_or_default();
    v.retain(|p| p.to_string_lossy().ends_with(".mdl.xml"));
    v.sort();
    v
}

/// Flag bits: 1 communication, 2 gps, 4 sensor power, 8 propulsion.
fn expected_state(flags: u8, anchor_confirmed: bool, park_timeout_reached: bool) -> GuardState {
    if flags == 0 {
        return GuardState::Nominal;
    }
    let drivable = flags & (1 | 8) == 0;
    match (anchor_confirmed, drivable) {
        (true, true) if park_timeout_reached => GuardState::AutoParking,
        (true, _) => GuardState::Anchored,
        (false, true) => GuardState::AutoParking,
        (false, false) => GuardState::Distress,
    }
}

fn truth_table() -> Outcome {
    let cfg = GuardConfig::default();
    let mut mismatches = Vec::new();
    let mut cases = 0;
    for flags in 0u8..16 {
        for confirmed in [true, false] {
            for timeout in [true, false] {
                cases += 1;
                let mut g = ExceptionGuard::new(cfg);
                g.register("r", 0.0).unwrap();
                let observed = [(2, Observation::GpsFailed), (4, Observation::SensorPowerFailed), (8, Observation::PropulsionFailed)];
                for (bit, o) in observed {
                    if flags & bit != 0 {
                        g.observe("r", o, 5.0).unwrap();
                    }
                }
                if flags & 1 != 0 {
                    g.observe("r", Observation::CommSilent, 15.0).unwrap();
                    g.tick(15.0 + cfg.comm_timeout);
                }
                let t = 15.0 + cfg.comm_timeout + 1.0;
                let o = if confirmed { Observation::AnchorConfirmed } else { Observation::AnchorRefused };
                g.observe("r", o, t).unwrap();
                g.tick(if timeout { t + cfg.park_timeout } else { t + cfg.park_timeout / 2.0 });
                let got = g.status("r").unwrap().state;
                let want = expected_state(flags, confirmed, timeout);
                if got != want {
                    mismatches.push(format!("flags={flags:04b} confirmed={confirmed} timeout={timeout}: {got:?} != {want:?}"));
                }
            }
        }
    }
    if mismatches.is_empty() {
        Ok(format!("{cases} cases, 0 mismatches"))
    } else {
        Err(mismatches.join("; "))
    }
}

const FLAGS: [FailureFlag; 4] = [FailureFlag::Communication, FailureFlag::Gps, FailureFlag::SensorPower, FailureFlag::Propulsion];
const ITEMS: [MenuItem; 5] = [MenuItem::DragPlace, MenuItem::Park, MenuItem::ComputeOptimalFlow, MenuItem::Anchor, MenuItem::Release];

fn random_event(rng: &mut StdRng, id: &str, map: &MapDocument) -> UIEvent {
    let robot_id = id.to_string();
    match rng.random_range(0..4) {
        0 => UIEvent::ClickOnRobot { robot_id },
        1 => {
            let lm = &map.landmarks[rng.random_range(0..map.landmarks.len())];
            let jitter = Vec2::new(rng.random_range(-80.0..80.0), rng.random_range(-80.0..80.0));
            UIEvent::DragRobot { robot_id, target: lm.position.offset_m(jitter) }
        }
        2 => UIEvent::PlaceRobot { robot_id },
        _ => UIEvent::MenuSelect { robot_id, item: ITEMS[rng.random_range(0..ITEMS.len())] },
    }
}

/// Checks the two safety invariants after one fleet operation.
fn check_safety(held: &[(String, GeoCoordinate)], after: &mut Fleet, seed: u64) -> Result<(), String> {
    for (id, position) in held {
        if after.world().robot(id).unwrap().position != *position {
            return Err(format!("seed {seed}: {id} moved while held at t={}", after.time()));
        }
    }
    for rec in after.drain_records() {
        if let FleetRecord::ExceptionEvent(e) = rec.record {
            let entering = e.to == GuardState::AutoParking && e.from != GuardState::AutoParking;
            if entering && (e.causes.contains(&Cause::Communication) || e.causes.contains(&Cause::Propulsion)) {
                return Err(format!("seed {seed}: {e:?}"));
            }
        }
    }
    Ok(())
}

fn safety_fuzz() -> Outcome {
    const SCRIPTS: u64 = 1000;
    let map = five_node();
    let mut autoparks = 0;
    let mut held_steps = 0u64;
    for seed in 0..SCRIPTS {
        let mut rng = StdRng::seed_from_u64(seed);
        let cfg = FleetConfig::default();
        let mut fleet = Fleet::new(Arc::clone(&map), cfg).map_err(|e| e.to_string())?;
        let robots = ["r1", "r2"];
        for id in robots {
            let lm = &map.landmarks[rng.random_range(0..map.landmarks.len())];
            let mut spec = RobotSpec::new(id, lm.position);
            spec.anchor_operational = rng.random_bool(0.8);
            spec.fuel = rng.random_range(0.3..1.0);
            fleet.spawn(spec).map_err(|e| e.to_string())?;
        }
        let horizon = rng.random_range(300.0..900.0);
        while fleet.time() < horizon {
            let id = robots[rng.random_range(0..robots.len())];
            let before = held(&fleet);
            match rng.random_range(0..10) {
                0 => {
                    let flag = FLAGS[rng.random_range(0..FLAGS.len())];
                    let _ = fleet.inject_failure(id, flag, rng.random_bool(0.7));
                }
                1..=3 => {
                    let ev = random_event(&mut rng, id, &map);
                    let _ = fleet.ui_event(ev);
                }
                4 => {
                    let _ = fleet.acknowledge(id, "op");
                }
                _ => {
                    for _ in 0..rng.random_range(1..40) {
                        let before = held(&fleet);
                        fleet.step_once();
                        held_steps += before.len() as u64;
                        check_safety(&before, &mut fleet, seed)?;
                    }
                    continue;
                }
            }
            check_safety(&before, &mut fleet, seed)?;
        }
        autoparks += fleet
            .guard()
            .statuses()
            .filter(|(_, s)| matches!(s.state, GuardState::AutoParking | GuardState::Parked))
            .count();
    }
    if held_steps == 0 || autoparks == 0 {
        return Err(format!("fuzz never exercised holds ({held_steps}) or auto-parking ({autoparks})"));
    }
    Ok(format!("{SCRIPTS} scripts, {held_steps} held robot-steps, {autoparks} robots ended auto-parking or parked"))
}

/// Robots that are anchored or parked, with their positions.
fn held(fleet: &Fleet) -> Vec<(String, GeoCoordinate)> {
    fleet
        .world()
        .robots()
        .filter(|r| r.anchored || r.parked_at.is_some())
        .map(|r| (r.id.clone(), r.position))
        .collect()
}

fn end_to_end() -> Outcome {
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(async {
        let cfg = ApiConfig {
            listen: "127.0.0.1:1".parse().unwrap(),
            map: root().join("corpus/valid/five_node.mdl.xml"),
            log: None,
            simulation_controls: false,
            time_scale: 400.0,
            robots: vec![Deployment { robot_id: "r1".into(), landmark_id: "A".into() }],
            fleet: FleetConfig::default(),
        };
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.map_err(|e| e.to_string())?;
        let handle = start(&cfg, listener).await.map_err(|e| e.to_string())?;
        let result = drive_placement(&format!("http://{}", handle.addr)).await;
        handle.stop().await;
        result
    })
}

async fn drive_placement(base: &str) -> Outcome {
    let map = five_node();
    let c = map.landmark("C").unwrap().position;
    let client = reqwest::Client::new();
    let post = |ev: UIEvent| {
        client.post(format!("{base}/api/robots/r1/events")).body(serde_json::to_string(&ev).unwrap()).send()
    };
    let t0 = Instant::now();
    let r = post(UIEvent::DragRobot { robot_id: "r1".into(), target: c }).await.map_err(|e| e.to_string())?;
    if !r.status().is_success() {
        return Err(format!("drag: {}", r.status()));
    }
    let r = post(UIEvent::PlaceRobot { robot_id: "r1".into() }).await.map_err(|e| e.to_string())?;
    let resp: serde_json::Value = r.json().await.map_err(|e| e.to_string())?;
    let commands: Vec<RoboticCommand> =
        serde_json::from_value(resp["commands"].clone()).map_err(|e| format!("{resp}: {e}"))?;
    let hops = edges_in_flow_graph(&map, "A", &commands)?;

    let mut dist = f64::INFINITY;
    while t0.elapsed() < Duration::from_secs(5) {
        let robots: Vec<serde_json::Value> = client
            .get(format!("{base}/api/robots"))
            .send()
            .await
            .map_err(|e| e.to_string())?
            .json()
            .await
            .map_err(|e| e.to_string())?;
        let pos: GeoCoordinate = serde_json::from_value(robots[0]["position"].clone()).map_err(|e| e.to_string())?;
        dist = pos.distance_m(&c);
        if dist <= 5.0 {
            return Ok(format!("reached C ({dist:.2} m) over {hops} flow edges in {:?}", t0.elapsed()));
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    Err(format!("still {dist:.1} m from C after 5 s"))
}

/// Maps each MoveTo target to a landmark and checks consecutive landmarks
/// are adjacent waypoints of some flow.
fn edges_in_flow_graph(map: &MapDocument, start: &str, commands: &[RoboticCommand]) -> Result<usize, String> {
    let mut at = start.to_string();
    let mut hops = 0;
    for cmd in commands {
        let RoboticCommand::MoveTo { target, .. } = cmd else { continue };
        let lm = map
            .landmarks
            .iter()
            .find(|l| l.position.distance_m(target) < 0.5)
            .ok_or_else(|| format!("MoveTo {target:?} is not a landmark"))?;
        if lm.id == at {
            continue;
        }
        let adjacent = map
            .flows
            .iter()
            .any(|f| f.waypoint_ids.windows(2).any(|w| w[0] == at && w[1] == lm.id));
        if !adjacent {
            return Err(format!("{at} -> {} is not a flow edge", lm.id));
        }
        at = lm.id.clone();
        hops += 1;
    }
    if hops == 0 {
        return Err(format!("no movement dispatched: {commands:?}"));
    }
    Ok(hops)
}

fn random_graph(rng: &mut StdRng) -> MapDocument {
    let n = rng.random_range(2..=10);
    let mut doc = MapDocument { id: "g".into(), ..Default::default() };
    for i in 0..n {
        doc.landmarks.push(Landmark {
            id: format!("N{i}"),
            kind: if i == 0 { LandmarkKind::FuelRendezvousTerminal } else { LandmarkKind::Marker },
            position: GeoCoordinate::new(
                riverhelm_core::mdl::quantize_degrees(45.0 + rng.random_range(-0.03..0.03)),
                riverhelm_core::mdl::quantize_degrees(7.0 + rng.random_range(-0.03..0.03)),
            ),
            label: String::new(),
        });
    }
    for k in 0..rng.random_range(0..3 * n) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a == b {
            continue;
        }
        let mut wps = vec![format!("N{a}")];
        let v = rng.random_range(0..n);
        if rng.random_bool(0.3) && v != a && v != b {
            wps.push(format!("N{v}"));
        }
        wps.push(format!("N{b}"));
        doc.flows.push(FlowSegment {
            id: format!("E{k:02}"),
            from_id: wps[0].clone(),
            to_id: wps[wps.len() - 1].clone(),
            waypoint_ids: wps,
            v_from: Vec2::ZERO,
            v_to: Vec2::ZERO,
        });
    }
    doc.canonicalize();
    doc
}

/// Cheapest simple path by enumeration.
fn brute_force(doc: &MapDocument, from: &str, to: &str) -> Option<f64> {
    fn walk(doc: &MapDocument, at: &str, to: &str, path: &mut Vec<String>, cost: f64, best: &mut Option<f64>) {
        if at == to {
            *best = Some(best.map_or(cost, |b: f64| b.min(cost)));
            return;
        }
        for f in &doc.flows {
            if f.from_id != at || path.contains(&f.to_id) {
                continue;
            }
            path.push(f.to_id.clone());
            walk(doc, &f.to_id, to, path, cost + flow_length_m(doc, f).unwrap(), best);
            path.pop();
        }
    }
    let mut best = None;
    walk(doc, from, to, &mut vec![from.to_string()], 0.0, &mut best);
    best
}

fn routing_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut pairs = 0;
    let mut routed = 0;
    for g in 0..50 {
        let doc = random_graph(&mut rng);
        for a in &doc.landmarks {
            for b in &doc.landmarks {
                pairs += 1;
                match (route_to(&doc, &a.id, &b.id), brute_force(&doc, &a.id, &b.id)) {
                    (Ok(r), Some(best)) if r.cost_m == best => routed += 1,
                    (Err(QueryError::NoRoute { .. }), None) => {}
                    (got, want) => return Err(format!("graph {g} {} -> {}: {got:?} vs {want:?}", a.id, b.id)),
                }
            }
        }
    }
    Ok(format!("50 graphs, {pairs} pairs ({routed} routable) match exactly"))
}

const REPLAY_SCRIPT: &str = r#"
{"t": 0, "action": "spawn", "robot": "r1", "at": "A"}
{"t": 0, "action": "spawn", "robot": "r2", "at": "B", "fuel": 0.6}
{"t": 2, "action": "command", "event": {"type": "drag_robot", "robot_id": "r1", "target": {"lat": 12.0, "lon": 77.004}}}
{"t": 3, "action": "command", "event": {"type": "place_robot", "robot_id": "r1"}}
{"t": 20, "action": "inject_failure", "robot": "r2", "flag": "sensor_power"}
{"t": 140, "action": "inject_failure", "robot": "r1", "flag": "communication"}
{"t": 260, "action": "inject_failure", "robot": "r1", "flag": "communication", "value": false}
{"t": 280, "action": "command", "robot": "r1", "acknowledge": "op"}
{"t": 290, "action": "command", "event": {"type": "menu_select", "robot_id": "r1", "item": "park"}}
{"t": 900, "action": "assert", "robot": "r2", "parked": true}
"#;

fn replay_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let log = dir.path().join("fleet.jsonl");
    let journal = Journal::create(Some(&log)).map_err(|e| e.to_string())?;
    let mut session = Session::new(five_node(), FleetConfig::default(), journal).map_err(|e| e.to_string())?;
    let report = run_script(&mut session, REPLAY_SCRIPT).map_err(|e| e.to_string())?;
    let live = session.fleet().registry().clone();
    drop(session);
    let records = read_log(&log).map_err(|e| e.to_string())?;
    let replayed = replay_log(&records).map_err(|e| e.to_string())?;
    let a = serde_json::to_string(&live).unwrap();
    let b = serde_json::to_string(replayed.registry()).unwrap();
    if live != *replayed.registry() || a != b {
        return Err("replayed registry differs from the live one".into());
    }
    if live.len() != 2 || !report.passed {
        return Err(format!("scenario did not exercise the fleet: {report:?}"));
    }
    Ok(format!("{} records replayed to an identical registry", records.len()))
}
