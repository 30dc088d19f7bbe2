//! Map Definition Language (MDL).
//!
//! MDL is a strict XML dialect describing a river map as a graph:
//!
//! ```xml
//! <Map id="reach-1" name="Test reach">
//!   <ScaleRegion id="R1" south="12.0000000" west="77.0000000" north="12.1000000" east="77.1000000" scale="5000"/>
//!   <Landmark id="A" kind="marker" lat="12.0100000" lon="77.0100000" depth="0" label="Weir"/>
//!   <Flow id="F1" from="A" to="B" v_from="1,0" v_to="0.5,0.2">
//!     <Waypoint ref="A"/>
//!     <Waypoint ref="B"/>
//!   </Flow>
//!   <Annotation robot="sub1" flow="F1" lookahead="B">
//!     <Passed ref="A"/>
//!   </Annotation>
//! </Map>
//! ```
//!
//! Landmark kinds are `marker`, `flow_obstacle`, `static_obstacle`,
//! `parking_area` and `fuel_rendezvous_terminal`. Flow vectors are
//! `east,north` in m/s and vary linearly along each flow.

mod error;
mod model;
mod parse;
pub mod query;
pub mod route;
mod serialize;
mod validate;
mod xml;

pub use error::{AnnotationRefError, MdlError, ParseCode, ParseError, QueryError, Rule, Span, ValidationError};
pub use model::{FlowSegment, GeoBounds, Landmark, LandmarkKind, MapDocument, MdlAnnotation, MdlFile, ScaleRegion};
pub use parse::{parse_mdl, parse_mdl_bytes, quantize_degrees, COORDINATE_DECIMALS};
pub use query::{annotate_for_robot, flow_at, project_onto_flow, query_scale, DEFAULT_CORRIDOR_M};
pub use route::{route_to, Route};
pub use serialize::serialize_mdl;
pub use validate::{is_valid_id, validate, validate_map};
