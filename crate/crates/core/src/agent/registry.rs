use alloc::collections::BTreeMap;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::sim::{GpsFix, RobotState, Telemetry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistryEntry {
    /// Last state the robot reported, positioned at its last fix.
    pub state: RobotState,
    pub last_fix: Option<GpsFix>,
}

/// Last-known robot positions, written only by the poller.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Registry {
    entries: BTreeMap<String, RegistryEntry>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Seeds a robot with its deployment state.
    pub fn insert(&mut self, state: RobotState) {
        self.entries.insert(state.id.clone(), RegistryEntry { state, last_fix: None });
    }

    pub fn record(&mut self, t: &Telemetry) {
        self.entries.insert(
            t.fix.robot_id.clone(),
            RegistryEntry { state: t.state.clone(), last_fix: Some(t.fix.clone()) },
        );
    }

    /// Overwrites an entry wholesale; used when rebuilding from a log.
    pub fn restore(&mut self, entry: RegistryEntry) {
        self.entries.insert(entry.state.id.clone(), entry);
    }

    pub fn get(&self, id: &str) -> Option<&RegistryEntry> {
        self.entries.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &RegistryEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
