//! One simulated fleet: world, agents and guard advanced together on a
//! fixed-step simulated clock.
//!
//! Everything observable is appended to an outbox of timestamped
//! [`FleetRecord`]s, in the order it happened. Inputs are recorded too, so
//! feeding the `Control` and `UiEvent` records of one run into a fresh fleet
//! built from the same map and config reproduces the run exactly.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::planner::{plan_park, plan_park_direct};
use crate::agent::{
    AgentConfig, AgentError, CommandOrigin, CommandQueue, Interpreter, InterpreterResponse, Poller, PollerConfig,
    Registry, RegistryEntry, SentCommand, UIEvent,
};
use crate::guard::{Action, ExceptionEvent, ExceptionGuard, GuardConfig, GuardError, Observation};
use crate::mdl::query::nearest_flow;
use crate::mdl::{annotate_for_robot, MapDocument, MdlAnnotation};
use crate::sim::{CommandError, FailureFlag, GpsFix, RobotSpec, RoboticCommand, SimConfig, SimError, World};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FleetConfig {
    pub sim: SimConfig,
    pub guard: GuardConfig,
    pub poller: PollerConfig,
    pub agent: AgentConfig,
    /// Simulated seconds per step.
    pub step_seconds: f64,
}

impl Default for FleetConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig::default(),
            guard: GuardConfig::default(),
            poller: PollerConfig::default(),
            agent: AgentConfig::default(),
            step_seconds: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FleetError {
    #[error(transparent)]
    Guard(#[from] GuardError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("poll intervals and the step length must be positive")]
    BadConfig,
}

/// Something done to the fleet from outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "input", rename_all = "snake_case")]
pub enum FleetInput {
    Spawn(RobotSpec),
    Ui(UIEvent),
    InjectFailure { robot_id: String, flag: FailureFlag, value: bool },
    SetAnchorOperational { robot_id: String, operational: bool },
    Acknowledge { robot_id: String, operator_id: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum FleetRecord {
    UiEvent {
        event: UIEvent,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        response: Option<InterpreterResponse>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error: Option<AgentError>,
    },
    Command(SentCommand),
    GpsFix(GpsFix),
    RobotSnapshot(RegistryEntry),
    ExceptionEvent(ExceptionEvent),
    Control(FleetInput),
}

impl FleetRecord {
    pub fn kind(&self) -> &'static str {
        match self {
            FleetRecord::UiEvent { .. } => "ui_event",
            FleetRecord::Command(_) => "command",
            FleetRecord::GpsFix(_) => "gps_fix",
            FleetRecord::RobotSnapshot(_) => "robot_snapshot",
            FleetRecord::ExceptionEvent(_) => "exception_event",
            FleetRecord::Control(_) => "control",
        }
    }

    /// The input this record replays, if it is one.
    pub fn as_input(&self) -> Option<FleetInput> {
        match self {
            FleetRecord::Control(i) => Some(i.clone()),
            FleetRecord::UiEvent { event, .. } => Some(FleetInput::Ui(event.clone())),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedRecord {
    pub timestamp: f64,
    pub record: FleetRecord,
}

#[derive(Debug)]
pub struct Fleet {
    config: FleetConfig,
    world: World,
    registry: Registry,
    poller: Poller,
    guard: ExceptionGuard,
    queue: CommandQueue,
    interpreter: Interpreter,
    history: BTreeMap<String, Vec<ExceptionEvent>>,
    outbox: Vec<TimedRecord>,
}

impl Fleet {
    pub fn new(map: Arc<MapDocument>, config: FleetConfig) -> Result<Self, FleetError> {
        if !config.poller.is_valid() || !(config.step_seconds > 0.0 && config.step_seconds.is_finite()) {
            return Err(FleetError::BadConfig);
        }
        let slowest = config.poller.overrides.values().fold(config.poller.interval, |a, b| a.max(*b));
        config.guard.check(slowest)?;
        Ok(Self {
            world: World::new(Arc::clone(&map), config.sim),
            registry: Registry::new(),
            poller: Poller::new(config.poller.clone()),
            guard: ExceptionGuard::new(config.guard),
            queue: CommandQueue::new(),
            interpreter: Interpreter::new(map, config.agent),
            history: BTreeMap::new(),
            outbox: Vec::new(),
            config,
        })
    }

    pub fn config(&self) -> &FleetConfig {
        &self.config
    }

    pub fn time(&self) -> f64 {
        self.world.time()
    }

    pub fn map(&self) -> &Arc<MapDocument> {
        self.world.map()
    }

    /// Ground truth; agents never read it.
    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn guard(&self) -> &ExceptionGuard {
        &self.guard
    }

    pub fn queue(&self) -> &CommandQueue {
        &self.queue
    }

    pub fn exceptions(&self, robot_id: &str) -> &[ExceptionEvent] {
        self.history.get(robot_id).map_or(&[], Vec::as_slice)
    }

    pub fn drain_records(&mut self) -> Vec<TimedRecord> {
        core::mem::take(&mut self.outbox)
    }

    /// Where each known robot sits on the map, from its last-known position.
    /// Robots outside every flow corridor get an empty annotation.
    pub fn annotations(&self) -> Vec<MdlAnnotation> {
        let doc = self.world.map();
        self.registry
            .iter()
            .map(|e| {
                let id = &e.state.id;
                nearest_flow(doc, &e.state.position)
                    .and_then(|(f, _)| {
                        annotate_for_robot(doc, id, &f.id, &e.state.position, self.config.sim.corridor_m).ok()
                    })
                    .unwrap_or_else(|| MdlAnnotation {
                        robot_id: id.clone(),
                        landmarks_passed: Vec::new(),
                        lookahead_landmark: None,
                        active_flow: None,
                    })
            })
            .collect()
    }

    pub fn apply(&mut self, input: FleetInput) -> Result<Option<InterpreterResponse>, FleetError> {
        let out = match &input {
            FleetInput::Ui(ev) => return Ok(Some(self.ui_event(ev.clone())?)),
            FleetInput::Spawn(spec) => self.spawn_inner(spec),
            FleetInput::InjectFailure { robot_id, flag, value } => {
                self.world.inject_failure(robot_id, *flag, *value).map_err(FleetError::from)
            }
            FleetInput::SetAnchorOperational { robot_id, operational } => {
                self.world.set_anchor_operational(robot_id, *operational).map_err(FleetError::from)
            }
            FleetInput::Acknowledge { robot_id, operator_id } => {
                let now = self.time();
                self.guard.acknowledge(robot_id, operator_id, now).map(|ev| self.push_events([ev])).map_err(Into::into)
            }
        };
        out?;
        self.record(FleetRecord::Control(input));
        Ok(None)
    }

    pub fn spawn(&mut self, spec: RobotSpec) -> Result<(), FleetError> {
        self.apply(FleetInput::Spawn(spec)).map(|_| ())
    }

    pub fn inject_failure(&mut self, robot_id: &str, flag: FailureFlag, value: bool) -> Result<(), FleetError> {
        self.apply(FleetInput::InjectFailure { robot_id: robot_id.to_string(), flag, value }).map(|_| ())
    }

    pub fn acknowledge(&mut self, robot_id: &str, operator_id: &str) -> Result<(), FleetError> {
        self.apply(FleetInput::Acknowledge { robot_id: robot_id.to_string(), operator_id: operator_id.to_string() })
            .map(|_| ())
    }

    /// Interprets an operator event. A dispatched plan replaces whatever the
    /// robot was doing.
    pub fn ui_event(&mut self, event: UIEvent) -> Result<InterpreterResponse, AgentError> {
        let result = self.interpreter.handle_event(&self.registry, &self.guard, &event);
        let robot_id = event.robot_id().to_string();
        self.record(FleetRecord::UiEvent { event, response: result.clone().ok(), error: result.clone().err() });
        if let Ok(InterpreterResponse::Dispatched { commands }) = &result {
            self.queue.load(&robot_id, commands.clone(), CommandOrigin::Operator);
            let out = self.queue.advance(&mut self.world);
            self.absorb_queue(out);
            self.run_directives();
        }
        result
    }

    fn spawn_inner(&mut self, spec: &RobotSpec) -> Result<(), FleetError> {
        let now = self.time();
        if self.guard.status(&spec.id).is_some() {
            return Err(SimError::DuplicateRobot(spec.id.clone()).into());
        }
        self.world.spawn(spec.clone())?;
        self.guard.register(&spec.id, now)?;
        self.poller.register(&spec.id, now);
        let state = self.world.robot(&spec.id).cloned().ok_or_else(|| SimError::UnknownRobot(spec.id.clone()))?;
        self.registry.insert(state);
        Ok(())
    }

    /// Steps until the next step would pass `t`.
    pub fn advance_to(&mut self, t: f64) {
        // Compare against a tolerance so accumulated step sums do not skip
        // a step that lands exactly on `t`.
        while self.time() + self.config.step_seconds <= t + 1e-9 {
            self.step_once();
        }
    }

    pub fn step_once(&mut self) {
        self.world.step(self.config.step_seconds);
        let now = self.time();
        let out = self.queue.advance(&mut self.world);
        self.absorb_queue(out);

        let report = self.poller.poll_loop_tick(&mut self.world, &mut self.registry, now);
        for t in &report.telemetry {
            self.record(FleetRecord::GpsFix(t.fix.clone()));
            if let Some(e) = self.registry.get(&t.fix.robot_id) {
                self.record(FleetRecord::RobotSnapshot(e.clone()));
            }
        }
        self.observe_all(report.observations);
        let events = self.guard.tick(now);
        self.push_events(events);
        self.run_directives();
    }

    fn absorb_queue(&mut self, out: crate::agent::QueueOutput) {
        for s in out.sent {
            self.record(FleetRecord::Command(s));
        }
        self.observe_all(out.observations);
    }

    fn observe_all(&mut self, obs: Vec<(String, Observation)>) {
        let now = self.time();
        for (id, o) in obs {
            if let Ok(events) = self.guard.observe(&id, o, now) {
                self.push_events(events);
            }
        }
    }

    fn push_events(&mut self, events: impl IntoIterator<Item = ExceptionEvent>) {
        for e in events {
            self.history.entry(e.robot_id.clone()).or_default().push(e.clone());
            self.record(FleetRecord::ExceptionEvent(e));
        }
    }

    fn run_directives(&mut self) {
        loop {
            let directives = self.guard.take_directives();
            if directives.is_empty() {
                return;
            }
            for d in directives {
                match d.action {
                    Action::Anchor => self.guard_anchor(&d.robot_id),
                    Action::AutoPark => self.guard_park(&d.robot_id),
                }
            }
        }
    }

    fn guard_anchor(&mut self, id: &str) {
        self.queue.clear(id);
        let result = self.world.execute_command(id, &RoboticCommand::Anchor);
        let obs = match &result {
            Ok(_) => Some(Observation::AnchorConfirmed),
            // Unheard: the anchor and comm deadlines take it from here.
            Err(CommandError::CommTimeout) | Err(CommandError::UnknownRobot { .. }) => None,
            Err(_) => Some(Observation::AnchorRefused),
        };
        self.record(FleetRecord::Command(SentCommand {
            robot_id: id.to_string(),
            command: RoboticCommand::Anchor,
            result,
            origin: CommandOrigin::Guard,
        }));
        if let Some(o) = obs {
            self.observe_all(alloc::vec![(id.to_string(), o)]);
        }
    }

    fn guard_park(&mut self, id: &str) {
        let Some(entry) = self.registry.get(id) else { return };
        let mut robot = entry.state.clone();
        // The guard may have anchored it since the last poll; releasing an
        // anchor that is not down is harmless.
        robot.anchored = true;
        let doc = Arc::clone(self.world.map());
        let commands = match plan_park(&doc, &self.config.agent, &robot) {
            Ok(p) => p.commands,
            Err(_) => plan_park_direct(&doc, &self.config.agent, &robot).unwrap_or_default(),
        };
        self.queue.load(id, commands, CommandOrigin::Guard);
        let out = self.queue.advance(&mut self.world);
        self.absorb_queue(out);
    }

    fn record(&mut self, record: FleetRecord) {
        self.outbox.push(TimedRecord { timestamp: self.time(), record });
    }
}

/// Rebuilds a fleet by re-applying the inputs found in `records` at their
/// timestamps, then stepping to the last timestamp seen.
pub fn replay(
    map: Arc<MapDocument>,
    config: FleetConfig,
    records: impl IntoIterator<Item = TimedRecord>,
) -> Result<Fleet, FleetError> {
    let mut fleet = Fleet::new(map, config)?;
    let mut end = 0.0f64;
    for r in records {
        end = end.max(r.timestamp);
        if let Some(input) = r.record.as_input() {
            fleet.advance_to(r.timestamp);
            // Inputs that failed live fail identically here; only
            // successful ones were logged as control records anyway.
            let _ = fleet.apply(input);
        }
    }
    fleet.advance_to(end);
    fleet.drain_records();
    Ok(fleet)
}
