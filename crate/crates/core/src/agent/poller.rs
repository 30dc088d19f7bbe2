use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::registry::Registry;
use super::CommandLink;
use crate::guard::Observation;
use crate::sim::{Ack, CommandError, FailureFlags, GpsFix, RoboticCommand, Telemetry};

/// GPS polling cadence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PollerConfig {
    /// Seconds between `GetCoordinates` polls.
    pub interval: f64,
    /// Per-robot intervals.
    pub overrides: BTreeMap<String, f64>,
}

impl Default for PollerConfig {
    fn default() -> Self {
        Self { interval: 15.0, overrides: BTreeMap::new() }
    }
}

impl PollerConfig {
    pub fn interval_for(&self, robot_id: &str) -> f64 {
        self.overrides.get(robot_id).copied().unwrap_or(self.interval)
    }

    pub fn is_valid(&self) -> bool {
        core::iter::once(&self.interval)
            .chain(self.overrides.values())
            .all(|i| i.is_finite() && *i > 0.0)
    }
}

/// What one tick of the poll loop produced.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PollReport {
    pub fixes: Vec<GpsFix>,
    pub telemetry: Vec<Telemetry>,
    /// Per-robot health observations for the exception guard.
    pub observations: Vec<(String, Observation)>,
}

#[derive(Debug, Clone, PartialEq)]
struct Schedule {
    next: f64,
    interval: f64,
    /// The previous poll saw a failure or got no answer.
    unhealthy: bool,
}

/// Fixed-rate `GetCoordinates` scheduler.
///
/// Each robot's deadlines are `start + k·interval`; a late tick catches up
/// with one poll per missed deadline, so a horizon `T` always yields
/// `floor(T / interval)` polls.
#[derive(Debug, Clone, PartialEq)]
pub struct Poller {
    config: PollerConfig,
    schedules: BTreeMap<String, Schedule>,
}

impl Poller {
    pub fn new(config: PollerConfig) -> Self {
        Self { config, schedules: BTreeMap::new() }
    }

    pub fn config(&self) -> &PollerConfig {
        &self.config
    }

    /// First poll of a robot registered at `now` is due at `now + interval`.
    pub fn register(&mut self, robot_id: &str, now: f64) {
        let interval = self.config.interval_for(robot_id);
        self.schedules
            .insert(robot_id.to_string(), Schedule { next: now + interval, interval, unhealthy: false });
    }

    pub fn next_deadline(&self, robot_id: &str) -> Option<f64> {
        self.schedules.get(robot_id).map(|s| s.next)
    }

    /// Polls every robot whose deadline is at or before `now`.
    pub fn poll_loop_tick(&mut self, link: &mut dyn CommandLink, registry: &mut Registry, now: f64) -> PollReport {
        let mut report = PollReport::default();
        for (id, sched) in self.schedules.iter_mut() {
            while sched.next <= now {
                sched.next += sched.interval;
                let obs = &mut report.observations;
                match link.send(id, &RoboticCommand::GetCoordinates) {
                    Ok(Ack::Telemetry(t)) => {
                        registry.record(&t);
                        obs.push((id.clone(), Observation::GpsOk));
                        let bad = push_health(id, &t.state.failures, obs);
                        if !bad && sched.unhealthy {
                            obs.push((id.clone(), Observation::FlagsCleared));
                        }
                        sched.unhealthy = bad;
                        report.fixes.push(t.fix.clone());
                        report.telemetry.push(t);
                    }
                    Err(CommandError::GpsUnavailable { health }) => {
                        obs.push((id.clone(), Observation::GpsFailed));
                        push_health(id, &health, obs);
                        sched.unhealthy = true;
                    }
                    Err(CommandError::CommTimeout) => {
                        obs.push((id.clone(), Observation::CommSilent));
                        sched.unhealthy = true;
                    }
                    // Robot gone or an unexpected answer: nothing to report.
                    Ok(Ack::Accepted) | Err(_) => {}
                }
            }
        }
        report
    }
}

fn push_health(id: &str, health: &FailureFlags, obs: &mut Vec<(String, Observation)>) -> bool {
    if health.sensor_power {
        obs.push((id.to_string(), Observation::SensorPowerFailed));
    }
    if health.propulsion {
        obs.push((id.to_string(), Observation::PropulsionFailed));
    }
    health.any()
}
