//! Core logic for steering a fleet of biomimetic river submarines.
//!
//! Everything in this crate is pure and deterministic: no IO, no clocks,
//! no threads. It builds on `core` + `alloc` only, so it can run on the
//! vehicle side as well as behind the [`riverhelm`] gateway.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`geo`] | coordinates, planar vectors, local equirectangular frames |
//! | [`mdl`] | Map Definition Language: model, XML parser/serializer, validator, queries, routing |
//! | [`sim`] | discrete-time river/robot simulator with failure injection |
//! | [`agent`] | UI event interpreter, GPS poller, command queues, optimizer plugin |
//! | [`guard`] | per-robot exception state machine |
//! | [`fleet`] | the message fabric wiring the above together on a simulated clock |
//!
//! [`riverhelm`]: https://docs.rs/riverhelm

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod agent;
pub mod fleet;
pub mod geo;
pub mod guard;
pub mod mdl;
pub mod sim;

pub use geo::{GeoCoordinate, Vec2};
pub use mdl::{parse_mdl, serialize_mdl, MapDocument, MdlAnnotation, MdlFile};
