use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::types::{
    Ack, CommandError, FailureFlag, GpsFix, Guidance, RobotSpec, RobotState, RoboticCommand, SimConfig, SimError,
    Telemetry,
};
use crate::geo::{GeoCoordinate, LocalFrame, Vec2};
use crate::mdl::query::FlowGeometry;
use crate::mdl::MapDocument;

#[derive(Debug, Clone, PartialEq)]
struct SimRobot {
    state: RobotState,
    guidance: Option<Guidance>,
    anchor_operational: bool,
}

/// The simulated river and its robots.
///
/// `World` is a single-owner value: mutate it through `&mut self` and hand
/// out clones as immutable snapshots.
#[derive(Debug, Clone)]
pub struct World {
    map: Arc<MapDocument>,
    flows: Arc<Vec<(String, FlowGeometry)>>,
    config: SimConfig,
    robots: BTreeMap<String, SimRobot>,
    time: f64,
    rng: ChaCha8Rng,
}

impl PartialEq for World {
    fn eq(&self, other: &Self) -> bool {
        self.time.to_bits() == other.time.to_bits()
            && self.config == other.config
            && self.robots == other.robots
            && self.rng == other.rng
            && self.map == other.map
    }
}

impl World {
    pub fn new(map: Arc<MapDocument>, config: SimConfig) -> Self {
        let flows = map
            .flows
            .iter()
            .filter_map(|f| FlowGeometry::new(&map, f).ok().map(|g| (f.id.clone(), g)))
            .collect();
        Self {
            flows: Arc::new(flows),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            map,
            config,
            robots: BTreeMap::new(),
            time: 0.0,
        }
    }

    pub fn map(&self) -> &Arc<MapDocument> {
        &self.map
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Simulation time in seconds.
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn spawn(&mut self, spec: RobotSpec) -> Result<(), SimError> {
        if self.robots.contains_key(&spec.id) {
            return Err(SimError::DuplicateRobot(spec.id));
        }
        if !spec.position.is_valid() || !(0.0..=1.0).contains(&spec.fuel) {
            return Err(SimError::InvalidRobot(spec.id));
        }
        let state = RobotState {
            id: spec.id.clone(),
            position: spec.position,
            velocity: Vec2::ZERO,
            anchored: false,
            parked_at: None,
            fuel: spec.fuel,
            failures: Default::default(),
            last_fix_time: None,
        };
        self.robots.insert(spec.id, SimRobot { state, guidance: None, anchor_operational: spec.anchor_operational });
        Ok(())
    }

    /// Ground truth for a robot. Agents never read this; tests and the
    /// scenario runner do.
    pub fn robot(&self, id: &str) -> Option<&RobotState> {
        self.robots.get(id).map(|r| &r.state)
    }

    pub fn robots(&self) -> impl Iterator<Item = &RobotState> {
        self.robots.values().map(|r| &r.state)
    }

    pub fn guidance(&self, id: &str) -> Option<Guidance> {
        self.robots.get(id).and_then(|r| r.guidance)
    }

    pub fn set_anchor_operational(&mut self, id: &str, operational: bool) -> Result<(), SimError> {
        let r = self.robots.get_mut(id).ok_or_else(|| SimError::UnknownRobot(id.to_string()))?;
        r.anchor_operational = operational;
        Ok(())
    }

    /// Sets or clears a failure flag. Takes effect on the next command or step.
    pub fn inject_failure(&mut self, id: &str, flag: FailureFlag, value: bool) -> Result<(), SimError> {
        let r = self.robots.get_mut(id).ok_or_else(|| SimError::UnknownRobot(id.to_string()))?;
        r.state.failures.set(flag, value);
        Ok(())
    }

    /// Drift velocity at `p`: the interpolated vector of the nearest flow,
    /// or zero outside every flow's corridor.
    pub fn ambient_flow(&self, p: &GeoCoordinate) -> Vec2 {
        let mut best: Option<(&str, f64, &FlowGeometry)> = None;
        let mut best_t = 0.0;
        for (id, g) in self.flows.iter() {
            let pr = g.project(p);
            let better = match best {
                None => true,
                Some((bid, bd, _)) => pr.distance_m < bd || (pr.distance_m == bd && id.as_str() < bid),
            };
            if better {
                best = Some((id.as_str(), pr.distance_m, g));
                best_t = pr.t;
            }
        }
        match best {
            Some((id, d, _)) if d <= self.config.corridor_m => self
                .map
                .flow(id)
                .map_or(Vec2::ZERO, |f| f.v_from.lerp(f.v_to, best_t)),
            _ => Vec2::ZERO,
        }
    }

    /// Advances every robot by `dt` seconds. Non-positive or non-finite `dt`
    /// leaves the world unchanged.
    pub fn step(&mut self, dt: f64) {
        if dt <= 0.0 || !dt.is_finite() {
            return;
        }
        let ids: Vec<String> = self.robots.keys().cloned().collect();
        for id in ids {
            let pos = self.robots[&id].state.position;
            let ambient = self.ambient_flow(&pos);
            let cfg = self.config;
            let r = self.robots.get_mut(&id).expect("id taken from the map");
            if r.state.anchored || r.state.parked_at.is_some() {
                r.state.velocity = Vec2::ZERO;
                continue;
            }
            let mut commanded = Vec2::ZERO;
            if let Some(g) = r.guidance {
                if !r.state.failures.propulsion && r.state.fuel > 0.0 {
                    let to = LocalFrame::at(&pos).to_plane(&g.target);
                    let dist = to.norm();
                    if dist > 0.0 {
                        let speed = g.speed.min(dist / dt);
                        commanded = to * (speed / dist);
                        let mut burn = cfg.fuel_per_m * speed * dt;
                        if burn > r.state.fuel {
                            commanded = commanded * (r.state.fuel / burn);
                            burn = r.state.fuel;
                        }
                        r.state.fuel = (r.state.fuel - burn).max(0.0);
                    }
                }
            }
            let velocity = commanded + ambient;
            r.state.position = pos.offset_m(velocity * dt);
            r.state.velocity = velocity;
            if let Some(g) = r.guidance {
                if r.state.position.distance_m(&g.target) <= cfg.arrival_radius_m {
                    r.guidance = None;
                    r.state.position.depth = g.target.depth;
                }
            }
        }
        self.time += dt;
    }

    /// Delivers a robotic command to a robot.
    pub fn execute_command(&mut self, id: &str, cmd: &RoboticCommand) -> Result<Ack, CommandError> {
        let cfg = self.config;
        let time = self.time;
        let noise = if cfg.gps_noise_m > 0.0 && matches!(cmd, RoboticCommand::GetCoordinates) {
            Vec2::new(self.uniform(-cfg.gps_noise_m, cfg.gps_noise_m), self.uniform(-cfg.gps_noise_m, cfg.gps_noise_m))
        } else {
            Vec2::ZERO
        };
        let map = Arc::clone(&self.map);
        let r = self
            .robots
            .get_mut(id)
            .ok_or_else(|| CommandError::UnknownRobot { id: id.to_string() })?;
        if r.state.failures.communication {
            return Err(CommandError::CommTimeout);
        }
        match cmd {
            RoboticCommand::GetCoordinates => {
                if r.state.failures.gps {
                    return Err(CommandError::GpsUnavailable { health: r.state.failures });
                }
                let position = if noise == Vec2::ZERO { r.state.position } else { r.state.position.offset_m(noise) };
                r.state.last_fix_time = Some(time);
                let fix = GpsFix { robot_id: id.to_string(), position, timestamp: time };
                let mut state = r.state.clone();
                state.position = position;
                Ok(Ack::Telemetry(Telemetry { fix, state }))
            }
            RoboticCommand::MoveTo { target, speed } => {
                if !(*speed > 0.0 && *speed <= cfg.max_speed) {
                    return Err(CommandError::InvalidSpeed { speed: *speed });
                }
                if !target.is_valid() {
                    return Err(CommandError::InvalidTarget);
                }
                if r.state.anchored {
                    return Err(CommandError::AnchorEngaged);
                }
                r.state.parked_at = None;
                if r.state.position.distance_m(target) <= cfg.arrival_radius_m {
                    r.guidance = None;
                } else {
                    r.guidance = Some(Guidance { target: *target, speed: *speed });
                }
                Ok(Ack::Accepted)
            }
            RoboticCommand::Anchor => {
                if !r.anchor_operational {
                    return Err(CommandError::AnchorRefused { reason: "anchor mechanism inoperative".to_string() });
                }
                if r.state.position.depth > cfg.max_anchor_depth_m {
                    return Err(CommandError::AnchorRefused { reason: "water too deep to anchor".to_string() });
                }
                r.state.anchored = true;
                r.state.parked_at = None;
                r.guidance = None;
                r.state.velocity = Vec2::ZERO;
                Ok(Ack::Accepted)
            }
            RoboticCommand::ReleaseAnchor => {
                r.state.anchored = false;
                Ok(Ack::Accepted)
            }
            RoboticCommand::Park { terminal } => {
                let lm = map
                    .landmark(terminal)
                    .filter(|l| l.kind.is_parking())
                    .ok_or_else(|| CommandError::UnknownTerminal { terminal: terminal.clone() })?;
                let d = r.state.position.distance_m(&lm.position);
                if d > cfg.arrival_radius_m {
                    return Err(CommandError::NotAtTerminal { terminal: terminal.clone(), distance_m: d });
                }
                r.state.parked_at = Some(terminal.clone());
                r.state.anchored = false;
                r.guidance = None;
                r.state.velocity = Vec2::ZERO;
                Ok(Ack::Accepted)
            }
            RoboticCommand::Halt => {
                r.guidance = None;
                Ok(Ack::Accepted)
            }
        }
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let unit = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        lo + (hi - lo) * unit
    }
}
