//! Rebuilds a fleet from its event log.

use std::sync::Arc;

use riverhelm_core::fleet::{self, Fleet, FleetError};
use thiserror::Error;

use crate::journal::{LogRecord, SessionHeader, SESSION_KIND};

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("log does not start with a session record")]
    NoHeader,
    #[error("bad session record: {0}")]
    BadHeader(serde_json::Error),
    #[error("seq not strictly increasing at {0}")]
    OutOfOrder(u64),
    #[error(transparent)]
    Fleet(#[from] FleetError),
}

pub fn replay_log(records: &[LogRecord]) -> Result<Fleet, ReplayError> {
    let (head, rest) = records.split_first().ok_or(ReplayError::NoHeader)?;
    if head.kind != SESSION_KIND {
        return Err(ReplayError::NoHeader);
    }
    let header: SessionHeader = serde_json::from_value(head.payload.clone()).map_err(ReplayError::BadHeader)?;
    let mut last = head.seq;
    for r in rest {
        if r.seq <= last {
            return Err(ReplayError::OutOfOrder(r.seq));
        }
        last = r.seq;
    }
    Ok(fleet::replay(Arc::new(header.map), header.config, rest.iter().filter_map(LogRecord::to_fleet))?)
}
