//! Per-robot exception handling.
//!
//! Any reported failure makes the guard take the robot away from the
//! operator and anchor it. If anchoring is impossible the robot is sent to
//! the nearest fuel rendezvous terminal, provided it can still be driven
//! (propulsion and communication intact); otherwise it is in distress. A
//! robot that stays anchored past `park_timeout` is auto-parked the same way.
//! The operator returns the robot to normal service with [`ExceptionGuard::acknowledge`]
//! once every failure has cleared.
//!
//! ```text
//!   Nominal --failure--> Anchoring --anchor ok--> Anchored --park_timeout--> AutoParking --park ok--> Parked
//!                           |                                                  ^     |
//!                           +--refused/anchor_timeout (can drive)--------------+     |
//!                           +--refused/anchor_timeout (cannot drive)--> Distress     |
//!                           ^----------------propulsion/comm lost--------------------+
//! ```

mod table;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use table::{transition, Action, Outcome, Trigger};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GuardState {
    Nominal,
    Anchoring,
    Anchored,
    AutoParking,
    Parked,
    Distress,
}

impl GuardState {
    pub const ALL: [GuardState; 6] = [
        GuardState::Nominal,
        GuardState::Anchoring,
        GuardState::Anchored,
        GuardState::AutoParking,
        GuardState::Parked,
        GuardState::Distress,
    ];

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.as_str().eq_ignore_ascii_case(s))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GuardState::Nominal => "Nominal",
            GuardState::Anchoring => "Anchoring",
            GuardState::Anchored => "Anchored",
            GuardState::AutoParking => "AutoParking",
            GuardState::Parked => "Parked",
            GuardState::Distress => "Distress",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cause {
    Communication,
    Gps,
    SensorPower,
    Propulsion,
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observation {
    GpsOk,
    GpsFailed,
    /// A command went unanswered.
    CommSilent,
    SensorPowerFailed,
    PropulsionFailed,
    AnchorConfirmed,
    AnchorRefused,
    ParkConfirmed,
    /// The robot reports every failure flag clear.
    FlagsCleared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionStatus {
    pub state: GuardState,
    /// Causes recorded since the robot left `Nominal`. Cleared only by
    /// acknowledgement.
    pub causes: BTreeSet<Cause>,
    /// Time the current state was entered.
    pub since: f64,
}

impl ExceptionStatus {
    pub fn nominal(since: f64) -> Self {
        Self { state: GuardState::Nominal, causes: BTreeSet::new(), since }
    }

    /// Applies one logged event.
    pub fn apply(&mut self, e: &ExceptionEvent) {
        if e.from != e.to {
            self.since = e.timestamp;
        }
        self.state = e.to;
        self.causes = e.causes.clone();
    }

    /// Rebuilds a status from its event log.
    pub fn replay<'a>(initial_since: f64, events: impl IntoIterator<Item = &'a ExceptionEvent>) -> Self {
        let mut s = Self::nominal(initial_since);
        for e in events {
            s.apply(e);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GuardConfig {
    pub comm_timeout: f64,
    pub anchor_timeout: f64,
    pub park_timeout: f64,
}

impl Default for GuardConfig {
    fn default() -> Self {
        Self { comm_timeout: 45.0, anchor_timeout: 60.0, park_timeout: 300.0 }
    }
}

impl GuardConfig {
    /// All timeouts positive and `comm_timeout` at least one poll interval.
    pub fn check(&self, poll_interval: f64) -> Result<(), GuardError> {
        let positive = [self.comm_timeout, self.anchor_timeout, self.park_timeout]
            .iter()
            .all(|t| t.is_finite() && *t > 0.0);
        if !positive || self.comm_timeout < poll_interval {
            return Err(GuardError::BadConfig);
        }
        Ok(())
    }
}

/// One row of the exception window feed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionEvent {
    pub robot_id: String,
    pub from: GuardState,
    pub to: GuardState,
    pub causes: BTreeSet<Cause>,
    pub timestamp: f64,
}

/// Side effect for the fleet to carry out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardDirective {
    pub robot_id: String,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum GuardError {
    #[error("unknown robot {0}")]
    UnknownRobot(String),
    #[error("robot {0} is already supervised")]
    AlreadyRegistered(String),
    #[error("cannot acknowledge robot in state {state:?}: {reason}")]
    NotAcknowledgeable { state: GuardState, reason: String },
    #[error("guard timeouts must be positive and comm_timeout at least one poll interval")]
    BadConfig,
}

#[derive(Debug, Clone, PartialEq)]
struct Cell {
    status: ExceptionStatus,
    /// Failures currently reported as raised.
    gps: bool,
    sensor_power: bool,
    propulsion: bool,
    /// A poll went unanswered since the last contact.
    silent: bool,
    last_contact: f64,
}

impl Cell {
    fn flags_raised(&self) -> bool {
        self.gps || self.sensor_power || self.propulsion || self.silent
    }
}

/// Exception state machines for every supervised robot.
#[derive(Debug, Clone, PartialEq)]
pub struct ExceptionGuard {
    config: GuardConfig,
    cells: BTreeMap<String, Cell>,
    directives: Vec<GuardDirective>,
}

impl ExceptionGuard {
    pub fn new(config: GuardConfig) -> Self {
        Self { config, cells: BTreeMap::new(), directives: Vec::new() }
    }

    pub fn config(&self) -> &GuardConfig {
        &self.config
    }

    /// Starts supervising a robot, in `Nominal` with contact at `now`.
    pub fn register(&mut self, robot_id: &str, now: f64) -> Result<(), GuardError> {
        if self.cells.contains_key(robot_id) {
            return Err(GuardError::AlreadyRegistered(robot_id.to_string()));
        }
        self.cells.insert(
            robot_id.to_string(),
            Cell {
                status: ExceptionStatus::nominal(now),
                gps: false,
                sensor_power: false,
                propulsion: false,
                silent: false,
                last_contact: now,
            },
        );
        Ok(())
    }

    pub fn status(&self, robot_id: &str) -> Option<&ExceptionStatus> {
        self.cells.get(robot_id).map(|c| &c.status)
    }

    pub fn statuses(&self) -> impl Iterator<Item = (&str, &ExceptionStatus)> {
        self.cells.iter().map(|(k, c)| (k.as_str(), &c.status))
    }

    /// True when the guard, not the operator, currently controls the robot.
    pub fn owns(&self, robot_id: &str) -> bool {
        self.status(robot_id).is_some_and(|s| s.state != GuardState::Nominal)
    }

    /// Whether [`ExceptionGuard::acknowledge`] would succeed now.
    pub fn acknowledgeable(&self, robot_id: &str) -> bool {
        self.cells.get(robot_id).is_some_and(|c| {
            matches!(c.status.state, GuardState::Anchored | GuardState::Parked | GuardState::Distress)
                && !c.flags_raised()
        })
    }

    /// Side effects requested since the last call.
    pub fn take_directives(&mut self) -> Vec<GuardDirective> {
        core::mem::take(&mut self.directives)
    }

    /// Feeds one observation, then evaluates any deadline it makes due.
    pub fn observe(&mut self, robot_id: &str, obs: Observation, now: f64) -> Result<Vec<ExceptionEvent>, GuardError> {
        let cell = self.cells.get_mut(robot_id).ok_or_else(|| GuardError::UnknownRobot(robot_id.to_string()))?;
        match obs {
            Observation::CommSilent => cell.silent = true,
            _ => {
                cell.silent = false;
                cell.last_contact = now;
            }
        }
        match obs {
            Observation::GpsOk => cell.gps = false,
            Observation::GpsFailed => cell.gps = true,
            Observation::SensorPowerFailed => cell.sensor_power = true,
            Observation::PropulsionFailed => cell.propulsion = true,
            Observation::FlagsCleared => {
                cell.gps = false;
                cell.sensor_power = false;
                cell.propulsion = false;
            }
            _ => {}
        }
        let mut events = Vec::new();
        self.fire(robot_id, Trigger::Observed(obs), now, &mut events);
        self.check_deadlines(robot_id, now, &mut events);
        Ok(events)
    }

    /// Evaluates time-based transitions for every robot. Calling it twice
    /// with the same `now` yields nothing the second time.
    pub fn tick(&mut self, now: f64) -> Vec<ExceptionEvent> {
        let ids: Vec<String> = self.cells.keys().cloned().collect();
        let mut events = Vec::new();
        for id in ids {
            self.check_deadlines(&id, now, &mut events);
        }
        events
    }

    /// Returns a recovered robot to operator control.
    pub fn acknowledge(&mut self, robot_id: &str, operator_id: &str, now: f64) -> Result<ExceptionEvent, GuardError> {
        let _ = operator_id;
        let cell = self.cells.get_mut(robot_id).ok_or_else(|| GuardError::UnknownRobot(robot_id.to_string()))?;
        let state = cell.status.state;
        if !matches!(state, GuardState::Anchored | GuardState::Parked | GuardState::Distress) {
            return Err(GuardError::NotAcknowledgeable { state, reason: "state is transitional".to_string() });
        }
        if cell.flags_raised() {
            return Err(GuardError::NotAcknowledgeable { state, reason: "failure flags still raised".to_string() });
        }
        let event = ExceptionEvent {
            robot_id: robot_id.to_string(),
            from: state,
            to: GuardState::Nominal,
            causes: BTreeSet::new(),
            timestamp: now,
        };
        cell.status.apply(&event);
        Ok(event)
    }

    fn check_deadlines(&mut self, robot_id: &str, now: f64, events: &mut Vec<ExceptionEvent>) {
        let cfg = self.config;
        loop {
            let Some(cell) = self.cells.get(robot_id) else { return };
            let s = &cell.status;
            let due = if cell.silent
                && now - cell.last_contact >= cfg.comm_timeout
                && !s.causes.contains(&Cause::Communication)
            {
                Trigger::CommTimeout
            } else if s.state == GuardState::Anchoring && now - s.since >= cfg.anchor_timeout {
                Trigger::AnchorTimeout
            } else if s.state == GuardState::Anchored && now - s.since >= cfg.park_timeout {
                Trigger::ParkTimeout
            } else {
                return;
            };
            if !self.fire(robot_id, due, now, events) {
                return;
            }
        }
    }

    /// Applies one trigger; returns whether the status changed.
    fn fire(&mut self, robot_id: &str, trigger: Trigger, now: f64, events: &mut Vec<ExceptionEvent>) -> bool {
        let Some(cell) = self.cells.get_mut(robot_id) else { return false };
        let mut causes = cell.status.causes.clone();
        if let Some(c) = trigger.cause() {
            causes.insert(c);
        }
        let can_drive = !causes.contains(&Cause::Propulsion) && !causes.contains(&Cause::Communication);
        let out = transition(cell.status.state, trigger, can_drive);
        let mut new_causes = cell.status.causes.clone();
        if let Some(c) = out.add {
            new_causes.insert(c);
        }
        if out.next == cell.status.state && new_causes == cell.status.causes {
            return false;
        }
        let event = ExceptionEvent {
            robot_id: robot_id.to_string(),
            from: cell.status.state,
            to: out.next,
            causes: new_causes,
            timestamp: now,
        };
        cell.status.apply(&event);
        if let Some(action) = out.action {
            self.directives.push(GuardDirective { robot_id: robot_id.to_string(), action });
        }
        events.push(event);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn guard() -> ExceptionGuard {
        let mut g = ExceptionGuard::new(GuardConfig::default());
        g.register("r", 0.0).unwrap();
        g
    }

    fn state(g: &ExceptionGuard) -> GuardState {
        g.status("r").unwrap().state
    }

    #[test]
    fn gps_ok_in_nominal_is_silent() {
        let mut g = guard();
        assert!(g.observe("r", Observation::GpsOk, 15.0).unwrap().is_empty());
        assert_eq!(state(&g), GuardState::Nominal);
    }

    #[test]
    fn persistent_comm_silence_anchors() {
        let mut g = guard();
        assert!(g.observe("r", Observation::CommSilent, 15.0).unwrap().is_empty());
        assert!(g.observe("r", Observation::CommSilent, 30.0).unwrap().is_empty());
        let ev = g.observe("r", Observation::CommSilent, 45.0).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!((ev[0].from, ev[0].to), (GuardState::Nominal, GuardState::Anchoring));
        assert_eq!(ev[0].causes.iter().copied().collect::<Vec<_>>(), vec![Cause::Communication]);
        assert_eq!(g.take_directives(), vec![GuardDirective { robot_id: "r".into(), action: Action::Anchor }]);
    }

    #[test]
    fn refused_anchor_with_healthy_drive_auto_parks() {
        let mut g = guard();
        g.observe("r", Observation::SensorPowerFailed, 15.0).unwrap();
        let ev = g.observe("r", Observation::AnchorRefused, 16.0).unwrap();
        assert_eq!(ev[0].to, GuardState::AutoParking);
        let d = g.take_directives();
        assert_eq!(d.iter().map(|d| d.action).collect::<Vec<_>>(), vec![Action::Anchor, Action::AutoPark]);
    }

    #[test]
    fn refused_anchor_without_propulsion_is_distress() {
        let mut g = guard();
        g.observe("r", Observation::PropulsionFailed, 15.0).unwrap();
        g.observe("r", Observation::AnchorRefused, 16.0).unwrap();
        assert_eq!(state(&g), GuardState::Distress);
    }

    #[test]
    fn park_timeout_and_tick_idempotence() {
        let mut g = guard();
        g.observe("r", Observation::GpsFailed, 10.0).unwrap();
        g.observe("r", Observation::AnchorConfirmed, 12.0).unwrap();
        assert!(g.tick(100.0).is_empty());
        let ev = g.tick(312.0);
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].to, GuardState::AutoParking);
        assert!(ev[0].causes.contains(&Cause::Timeout));
        assert!(g.tick(312.0).is_empty());
    }

    #[test]
    fn anchored_with_dead_propulsion_never_auto_parks() {
        let mut g = guard();
        g.observe("r", Observation::PropulsionFailed, 10.0).unwrap();
        g.observe("r", Observation::AnchorConfirmed, 12.0).unwrap();
        assert!(g.tick(10_000.0).is_empty());
        assert_eq!(state(&g), GuardState::Anchored);
    }

    #[test]
    fn anchor_timeout_escalates() {
        let mut g = guard();
        g.observe("r", Observation::GpsFailed, 10.0).unwrap();
        assert!(g.tick(69.0).is_empty());
        let ev = g.tick(70.0);
        assert_eq!(ev[0].to, GuardState::AutoParking);
    }

    #[test]
    fn acknowledge_rules() {
        let mut g = guard();
        g.observe("r", Observation::GpsFailed, 10.0).unwrap();
        assert!(matches!(g.acknowledge("r", "op", 11.0), Err(GuardError::NotAcknowledgeable { .. })));
        g.observe("r", Observation::AnchorConfirmed, 12.0).unwrap();
        g.observe("r", Observation::GpsFailed, 25.0).unwrap();
        assert!(!g.acknowledgeable("r"));
        assert!(matches!(g.acknowledge("r", "op", 26.0), Err(GuardError::NotAcknowledgeable { .. })));
        g.observe("r", Observation::FlagsCleared, 40.0).unwrap();
        assert!(g.acknowledgeable("r"));
        let ev = g.acknowledge("r", "op", 41.0).unwrap();
        assert_eq!((ev.from, ev.to), (GuardState::Anchored, GuardState::Nominal));
        assert_eq!(g.status("r").unwrap(), &ExceptionStatus::nominal(41.0));
        assert_eq!(g.acknowledge("x", "op", 1.0), Err(GuardError::UnknownRobot("x".into())));
    }

    #[test]
    fn event_log_replays_to_current_status() {
        let mut g = guard();
        let mut log = Vec::new();
        log.extend(g.observe("r", Observation::SensorPowerFailed, 15.0).unwrap());
        log.extend(g.observe("r", Observation::GpsFailed, 30.0).unwrap());
        log.extend(g.observe("r", Observation::AnchorConfirmed, 31.0).unwrap());
        log.extend(g.tick(400.0));
        log.extend(g.observe("r", Observation::ParkConfirmed, 500.0).unwrap());
        assert_eq!(ExceptionStatus::replay(0.0, &log), *g.status("r").unwrap());
        assert_eq!(g.status("r").unwrap().state, GuardState::Parked);
    }

    #[test]
    fn config_check() {
        assert!(GuardConfig::default().check(15.0).is_ok());
        assert_eq!(GuardConfig::default().check(60.0), Err(GuardError::BadConfig));
        let c = GuardConfig { park_timeout: 0.0, ..Default::default() };
        assert_eq!(c.check(15.0), Err(GuardError::BadConfig));
    }
}
