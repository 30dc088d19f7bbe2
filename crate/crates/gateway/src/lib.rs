//! Gateway around [`riverhelm_core`]: configuration, the append-only event
//! log, replay, the scenario runner, MDL validation and the HTTP service.

pub mod config;
pub mod journal;
pub mod replay;
pub mod scenario;
pub mod service;
pub mod session;
pub mod validate;
