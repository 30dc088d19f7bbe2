//! `key = value` service configuration.
//!
//! ```text
//! # comments start with '#'
//! listen = 127.0.0.1:8080
//! map = river.mdl.xml          # relative to this file
//! log = fleet.log.jsonl
//! poll_interval = 15           # or "none" for the default
//! comm_timeout = 45
//! anchor_timeout = 60
//! park_timeout = 300
//! step_seconds = 1
//! time_scale = 1               # simulated seconds per wall-clock second
//! simulation_controls = false
//! seed = 0
//! gps_noise_m = 0
//! robot = sub-1@A              # repeatable: robot id @ landmark id
//! ```

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use riverhelm_core::fleet::FleetConfig;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

/// A robot placed at a landmark when the service starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deployment {
    pub robot_id: String,
    pub landmark_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiConfig {
    pub listen: SocketAddr,
    pub map: PathBuf,
    pub log: Option<PathBuf>,
    pub simulation_controls: bool,
    /// Simulated seconds per wall-clock second.
    pub time_scale: f64,
    pub robots: Vec<Deployment>,
    pub fleet: FleetConfig,
}

impl ApiConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let cfg = Self::parse(&text, base)?;
        cfg.check_paths()?;
        Ok(cfg)
    }

    /// Parses config text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut listen = None;
        let mut map = None;
        let mut log = None;
        let mut simulation_controls = false;
        let mut time_scale = 1.0;
        let mut robots = Vec::new();
        let mut fleet = FleetConfig::default();

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split_once('#').map_or(raw, |(c, _)| c).trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError::Line { line, message };
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected key = value, got {content:?}")))?;
            let num = || -> Result<f64, ConfigError> {
                let v = f64::from_str(value).map_err(|_| err(format!("{key}: not a number: {value:?}")))?;
                if v.is_finite() && v > 0.0 {
                    Ok(v)
                } else {
                    Err(err(format!("{key} must be positive")))
                }
            };
            match key {
                "listen" => {
                    let addr = SocketAddr::from_str(value).map_err(|_| err(format!("bad listen address {value:?}")))?;
                    if addr.port() == 0 {
                        return Err(err("listen port must be in 1..=65535".into()));
                    }
                    listen = Some(addr);
                }
                "map" => map = Some(base.join(value)),
                "log" => log = Some(base.join(value)),
                "poll_interval" => {
                    if value != "none" {
                        fleet.poller.interval = num()?;
                    }
                }
                "comm_timeout" => fleet.guard.comm_timeout = num()?,
                "anchor_timeout" => fleet.guard.anchor_timeout = num()?,
                "park_timeout" => fleet.guard.park_timeout = num()?,
                "step_seconds" => fleet.step_seconds = num()?,
                "time_scale" => time_scale = num()?,
                "simulation_controls" => {
                    simulation_controls = bool::from_str(value).map_err(|_| err(format!("{key}: expected true or false")))?
                }
                "seed" => fleet.sim.seed = u64::from_str(value).map_err(|_| err(format!("bad seed {value:?}")))?,
                "gps_noise_m" => {
                    fleet.sim.gps_noise_m =
                        f64::from_str(value).ok().filter(|v| *v >= 0.0).ok_or_else(|| err("gps_noise_m must be >= 0".into()))?
                }
                "robot" => {
                    let (robot_id, landmark_id) = value
                        .split_once('@')
                        .map(|(r, l)| (r.trim(), l.trim()))
                        .filter(|(r, l)| !r.is_empty() && !l.is_empty())
                        .ok_or_else(|| err(format!("robot: expected id@landmark, got {value:?}")))?;
                    robots.push(Deployment { robot_id: robot_id.into(), landmark_id: landmark_id.into() });
                }
                _ => return Err(err(format!("unknown key {key:?}"))),
            }
        }
        fleet.guard.check(fleet.poller.interval).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(Self {
            listen: listen.ok_or_else(|| ConfigError::Invalid("missing listen".into()))?,
            map: map.ok_or_else(|| ConfigError::Invalid("missing map".into()))?,
            log,
            simulation_controls,
            time_scale,
            robots,
            fleet,
        })
    }

    fn check_paths(&self) -> Result<(), ConfigError> {
        if !self.map.is_file() {
            return Err(ConfigError::Invalid(format!("map file {} not found", self.map.display())));
        }
        if let Some(log) = &self.log {
            let dir = log.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
            if !dir.is_dir() {
                return Err(ConfigError::Invalid(format!("log directory {} not found", dir.display())));
            }
        }
        Ok(())
    }
}
