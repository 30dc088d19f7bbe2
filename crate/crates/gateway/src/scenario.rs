//! Headless scenario runner on the simulated clock.
//!
//! A script is JSON lines, one timed action per line:
//!
//! ```text
//! {"t": 0,   "action": "spawn", "robot": "r1", "at": "A"}
//! {"t": 0,   "action": "inject_failure", "robot": "r1", "flag": "communication"}
//! {"t": 5,   "action": "command", "event": {"type": "click_on_robot", "robot_id": "r1"}, "expect": "robot_faulted"}
//! {"t": 60,  "action": "assert", "robot": "r1", "state": "Anchoring"}
//! {"t": 900, "action": "assert", "robot": "r1", "near": "C", "within": 5}
//! {"t": 950, "action": "command", "robot": "r1", "acknowledge": "op-7"}
//! ```
//!
//! Lines run in order of `t` (file order among equal times). Blank lines and
//! lines starting with `//` are skipped.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use riverhelm_core::agent::{InterpreterResponse, UIEvent};
use riverhelm_core::fleet::{FleetConfig, FleetError, FleetInput};
use riverhelm_core::geo::GeoCoordinate;
use riverhelm_core::guard::{Cause, GuardState};
use riverhelm_core::mdl::{parse_mdl, MapDocument};
use riverhelm_core::sim::{FailureFlag, RobotSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::journal::Journal;
use crate::session::{Session, SessionError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("map: {0}")]
    Map(String),
    #[error("script line {line}: {message}")]
    Script { line: usize, message: String },
    #[error(transparent)]
    Session(#[from] SessionError),
}

#[derive(Debug, Clone, Deserialize)]
struct ScriptLine {
    t: f64,
    #[serde(flatten)]
    action: Action,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
enum Action {
    Spawn {
        robot: String,
        #[serde(default)]
        at: Option<String>,
        #[serde(default)]
        position: Option<GeoCoordinate>,
        #[serde(default)]
        fuel: Option<f64>,
        #[serde(default)]
        anchor_operational: Option<bool>,
    },
    InjectFailure {
        robot: String,
        flag: FailureFlag,
        #[serde(default = "yes")]
        value: bool,
    },
    SetAnchor {
        robot: String,
        operational: bool,
    },
    Command {
        #[serde(default)]
        robot: Option<String>,
        #[serde(default)]
        event: Option<UIEvent>,
        #[serde(default)]
        acknowledge: Option<String>,
        /// Response type or error name the command must produce.
        #[serde(default)]
        expect: Option<String>,
    },
    Assert(Check),
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Check {
    robot: String,
    #[serde(default)]
    state: Option<String>,
    #[serde(default)]
    near: Option<String>,
    #[serde(default)]
    within: Option<f64>,
    #[serde(default)]
    anchored: Option<bool>,
    #[serde(default)]
    parked: Option<bool>,
    #[serde(default)]
    causes_include: Vec<Cause>,
    #[serde(default)]
    causes_exclude: Vec<Cause>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionResult {
    pub line: usize,
    pub t: f64,
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub passed: bool,
    pub final_time: f64,
    pub assertions: Vec<AssertionResult>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

pub fn load_map(path: &Path) -> Result<MapDocument, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
    parse_mdl(&text).map(|f| f.map).map_err(|e| ScenarioError::Map(e.to_string()))
}

/// Runs a script file against a map file, logging to `log` if given.
pub fn run_scenario_files(map: &Path, script: &Path, log: Option<&Path>) -> Result<Report, ScenarioError> {
    let doc = load_map(map)?;
    let text = std::fs::read_to_string(script)
        .map_err(|source| ScenarioError::Io { path: script.display().to_string(), source })?;
    let journal = Journal::create(log)
        .map_err(|source| ScenarioError::Io { path: log.map(|p| p.display().to_string()).unwrap_or_default(), source })?;
    let mut session = Session::new(Arc::new(doc), FleetConfig::default(), journal)?;
    run_script(&mut session, &text)
}

/// Runs `script` on an existing session.
pub fn run_script(session: &mut Session, script: &str) -> Result<Report, ScenarioError> {
    let mut lines = parse_script(script)?;
    lines.sort_by(|a, b| a.1.t.total_cmp(&b.1.t));
    let mut results = Vec::new();
    for (line, sl) in lines {
        session.advance_to(sl.t)?;
        let now = session.fleet().time();
        let outcome = execute(session, &sl.action, line)?;
        if let Some((check, passed, detail)) = outcome {
            results.push(AssertionResult { line, t: now, check, passed, detail });
        }
    }
    Ok(Report {
        passed: results.iter().all(|r| r.passed),
        final_time: session.fleet().time(),
        assertions: results,
    })
}

fn parse_script(script: &str) -> Result<Vec<(usize, ScriptLine)>, ScenarioError> {
    let mut out = Vec::new();
    for (i, raw) in script.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with("//") {
            continue;
        }
        let sl: ScriptLine =
            serde_json::from_str(s).map_err(|e| ScenarioError::Script { line, message: e.to_string() })?;
        if !(sl.t.is_finite() && sl.t >= 0.0) {
            return Err(ScenarioError::Script { line, message: "t must be a non-negative number".into() });
        }
        if let Action::Command { event, acknowledge, .. } = &sl.action {
            if event.is_some() == acknowledge.is_some() {
                return Err(ScenarioError::Script { line, message: "command needs exactly one of event, acknowledge".into() });
            }
        }
        out.push((line, sl));
    }
    Ok(out)
}

type Outcome = Option<(String, bool, String)>;

fn execute(session: &mut Session, action: &Action, line: usize) -> Result<Outcome, ScenarioError> {
    let script_err = |message: String| ScenarioError::Script { line, message };
    match action {
        Action::Spawn { robot, at, position, fuel, anchor_operational } => {
            let position = match (at, position) {
                (Some(id), None) => session
                    .fleet()
                    .map()
                    .landmark(id)
                    .map(|l| l.position)
                    .ok_or_else(|| script_err(format!("unknown landmark {id}")))?,
                (None, Some(p)) => *p,
                _ => return Err(script_err("spawn needs exactly one of at, position".into())),
            };
            let mut spec = RobotSpec::new(robot.clone(), position);
            spec.fuel = fuel.unwrap_or(spec.fuel);
            spec.anchor_operational = anchor_operational.unwrap_or(true);
            session.apply(FleetInput::Spawn(spec)).map_err(|e| script_err(e.to_string()))?;
            Ok(None)
        }
        Action::InjectFailure { robot, flag, value } => {
            let input = FleetInput::InjectFailure { robot_id: robot.clone(), flag: *flag, value: *value };
            session.apply(input).map_err(|e| script_err(e.to_string()))?;
            Ok(None)
        }
        Action::SetAnchor { robot, operational } => {
            let input = FleetInput::SetAnchorOperational { robot_id: robot.clone(), operational: *operational };
            session.apply(input).map_err(|e| script_err(e.to_string()))?;
            Ok(None)
        }
        Action::Command { robot, event, acknowledge, expect } => {
            let (input, label) = match (event, acknowledge) {
                (Some(ev), _) => (FleetInput::Ui(ev.clone()), format!("command {}", event_name(ev))),
                (None, Some(op)) => {
                    let robot_id = robot.clone().ok_or_else(|| script_err("acknowledge needs robot".into()))?;
                    (FleetInput::Acknowledge { robot_id, operator_id: op.clone() }, "acknowledge".to_string())
                }
                (None, None) => unreachable!("checked while parsing"),
            };
            let got = match session.apply(input) {
                Ok(Some(resp)) => response_name(&resp).to_string(),
                Ok(None) => "acknowledged".to_string(),
                Err(SessionError::Fleet(e)) => error_name(&e),
                Err(e) => return Err(e.into()),
            };
            Ok(expect.as_ref().map(|want| {
                (format!("{label} -> {want}"), *want == got, format!("got {got}"))
            }))
        }
        Action::Assert(c) => Ok(Some(check(session, c))),
    }
}

fn event_name(ev: &UIEvent) -> &'static str {
    match ev {
        UIEvent::ClickOnRobot { .. } => "click_on_robot",
        UIEvent::DragRobot { .. } => "drag_robot",
        UIEvent::PlaceRobot { .. } => "place_robot",
        UIEvent::MenuSelect { .. } => "menu_select",
    }
}

fn response_name(r: &InterpreterResponse) -> &'static str {
    match r {
        InterpreterResponse::ContextMenu { .. } => "context_menu",
        InterpreterResponse::DragStarted => "drag_started",
        InterpreterResponse::Dispatched { .. } => "dispatched",
        InterpreterResponse::Rejected { .. } => "rejected",
    }
}

fn error_name(e: &FleetError) -> String {
    use riverhelm_core::agent::AgentError;
    use riverhelm_core::guard::GuardError;
    match e {
        FleetError::Agent(AgentError::UnknownRobot { .. }) => "unknown_robot".into(),
        FleetError::Agent(AgentError::InvalidEventSequence) => "invalid_event_sequence".into(),
        FleetError::Agent(AgentError::OffMap) => "off_map".into(),
        FleetError::Agent(AgentError::RobotFaulted { .. }) => "robot_faulted".into(),
        FleetError::Guard(GuardError::NotAcknowledgeable { .. }) => "not_acknowledgeable".into(),
        FleetError::Guard(GuardError::UnknownRobot(_)) | FleetError::Sim(_) => "unknown_robot".into(),
        other => other.to_string(),
    }
}

fn check(session: &Session, c: &Check) -> (String, bool, String) {
    let fleet = session.fleet();
    let mut parts = Vec::new();
    let mut failures = Vec::new();
    let (Some(robot), Some(status)) = (fleet.world().robot(&c.robot), fleet.guard().status(&c.robot)) else {
        return (format!("{} exists", c.robot), false, "unknown robot".into());
    };
    if let Some(want) = &c.state {
        parts.push(format!("state={want}"));
        match GuardState::from_name(want) {
            Some(s) if s == status.state => {}
            Some(_) => failures.push(format!("state is {}", status.state.as_str())),
            None => failures.push(format!("no state named {want}")),
        }
    }
    if let Some(id) = &c.near {
        let within = c.within.unwrap_or(fleet.config().sim.arrival_radius_m);
        parts.push(format!("near {id} within {within} m"));
        match fleet.map().landmark(id) {
            Some(l) => {
                let d = robot.position.distance_m(&l.position);
                if d > within {
                    failures.push(format!("{d:.2} m from {id}"));
                }
            }
            None => failures.push(format!("no landmark {id}")),
        }
    }
    if let Some(want) = c.anchored {
        parts.push(format!("anchored={want}"));
        if robot.anchored != want {
            failures.push(format!("anchored is {}", robot.anchored));
        }
    }
    if let Some(want) = c.parked {
        parts.push(format!("parked={want}"));
        if robot.parked_at.is_some() != want {
            failures.push(format!("parked_at is {:?}", robot.parked_at));
        }
    }
    let causes: BTreeSet<Cause> = status.causes.clone();
    for cause in &c.causes_include {
        parts.push(format!("cause {cause:?}"));
        if !causes.contains(cause) {
            failures.push(format!("causes {causes:?} lack {cause:?}"));
        }
    }
    for cause in &c.causes_exclude {
        parts.push(format!("no cause {cause:?}"));
        if causes.contains(cause) {
            failures.push(format!("causes {causes:?} include {cause:?}"));
        }
    }
    let label = format!("{}: {}", c.robot, parts.join(", "));
    if failures.is_empty() {
        (label, true, String::new())
    } else {
        (label, false, failures.join("; "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use riverhelm_core::geo::Vec2;
    use riverhelm_core::mdl::{FlowSegment, Landmark, LandmarkKind};

    fn session() -> Session {
        let lm = |id: &str, lon: f64, kind| Landmark {
            id: id.into(),
            kind,
            position: GeoCoordinate::new(12.0, lon),
            label: String::new(),
        };
        let doc = MapDocument {
            id: "m".into(),
            name: String::new(),
            landmarks: vec![lm("A", 77.0, LandmarkKind::Marker), lm("T", 77.002, LandmarkKind::FuelRendezvousTerminal)],
            flows: vec![FlowSegment {
                id: "f".into(),
                from_id: "A".into(),
                to_id: "T".into(),
                waypoint_ids: vec!["A".into(), "T".into()],
                v_from: Vec2::ZERO,
                v_to: Vec2::ZERO,
            }],
            scale_regions: vec![],
        };
        Session::new(Arc::new(doc), FleetConfig::default(), Journal::new(None)).unwrap()
    }

    #[test]
    fn empty_script_passes() {
        let r = run_script(&mut session(), "").unwrap();
        assert!(r.passed);
        assert!(r.assertions.is_empty());
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn comm_failure_anchors_by_timeout() {
        let script = r#"
            {"t": 0, "action": "spawn", "robot": "r1", "at": "A"}
            {"t": 0, "action": "inject_failure", "robot": "r1", "flag": "communication"}
            {"t": 46, "action": "assert", "robot": "r1", "state": "Anchoring", "causes_include": ["communication"]}
        "#;
        let r = run_script(&mut session(), script).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn auto_parking_with_failed_propulsion_is_reported_as_failure() {
        let script = r#"
            {"t": 0, "action": "spawn", "robot": "r1", "at": "A", "anchor_operational": false}
            {"t": 0, "action": "inject_failure", "robot": "r1", "flag": "propulsion"}
            {"t": 100, "action": "assert", "robot": "r1", "state": "AutoParking"}
            {"t": 100, "action": "assert", "robot": "r1", "state": "Distress"}
        "#;
        let r = run_script(&mut session(), script).unwrap();
        assert!(!r.passed);
        assert_eq!(r.exit_code(), 1);
        assert!(!r.assertions[0].passed);
        assert!(r.assertions[1].passed, "{:?}", r.assertions[1]);
    }

    #[test]
    fn command_expectations() {
        let script = r#"
            {"t": 0, "action": "spawn", "robot": "r1", "at": "A"}
            {"t": 1, "action": "command", "event": {"type": "place_robot", "robot_id": "r1"}, "expect": "invalid_event_sequence"}
            {"t": 1, "action": "command", "event": {"type": "click_on_robot", "robot_id": "ghost"}, "expect": "unknown_robot"}
        "#;
        let r = run_script(&mut session(), script).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn script_errors_carry_the_line() {
        let e = run_script(&mut session(), "\n{\"t\": 1, \"action\": \"dance\"}").unwrap_err();
        assert!(matches!(e, ScenarioError::Script { line: 2, .. }), "{e}");
    }
}
