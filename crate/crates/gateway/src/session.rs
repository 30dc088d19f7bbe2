//! A fleet bound to its event log.

use std::io;
use std::sync::Arc;

use riverhelm_core::fleet::{Fleet, FleetConfig, FleetError, FleetInput};
use riverhelm_core::mdl::MapDocument;
use riverhelm_core::agent::InterpreterResponse;
use thiserror::Error;

use crate::journal::{Journal, LogRecord, SessionHeader, SESSION_KIND};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Fleet(#[from] FleetError),
    #[error("event log: {0}")]
    Io(#[from] io::Error),
}

/// Every change to the fleet goes through here so that the log sees it.
#[derive(Debug)]
pub struct Session {
    fleet: Fleet,
    journal: Journal,
    /// Records written but not yet handed out by [`Session::take_new`].
    fresh: Vec<LogRecord>,
}

impl Session {
    pub fn new(map: Arc<MapDocument>, config: FleetConfig, journal: Journal) -> Result<Self, SessionError> {
        let header = SessionHeader { map: (*map).clone(), config: config.clone() };
        let fleet = Fleet::new(map, config)?;
        let mut s = Self { fleet, journal, fresh: Vec::new() };
        let payload = serde_json::to_value(&header).map_err(io::Error::other)?;
        let r = s.journal.append(0.0, SESSION_KIND, payload)?;
        s.fresh.push(r);
        Ok(s)
    }

    pub fn fleet(&self) -> &Fleet {
        &self.fleet
    }

    pub fn apply(&mut self, input: FleetInput) -> Result<Option<InterpreterResponse>, SessionError> {
        let out = self.fleet.apply(input);
        self.sync()?;
        Ok(out?)
    }

    pub fn advance_to(&mut self, t: f64) -> Result<(), SessionError> {
        self.fleet.advance_to(t);
        self.sync()
    }

    pub fn step_once(&mut self) -> Result<(), SessionError> {
        self.fleet.step_once();
        self.sync()
    }

    /// Log records produced since the last call, in seq order.
    pub fn take_new(&mut self) -> Vec<LogRecord> {
        std::mem::take(&mut self.fresh)
    }

    fn sync(&mut self) -> Result<(), SessionError> {
        for r in self.fleet.drain_records() {
            let rec = self.journal.append_fleet(r)?;
            self.fresh.push(rec);
        }
        self.journal.flush()?;
        Ok(())
    }
}
