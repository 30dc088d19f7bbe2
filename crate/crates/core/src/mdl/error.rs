use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Structural problems found while reading the XML.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ParseCode {
    MalformedXml,
    UnknownElement,
    UnknownAttribute,
    MissingAttribute,
    BadValue,
}

impl ParseCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseCode::MalformedXml => "MALFORMED_XML",
            ParseCode::UnknownElement => "UNKNOWN_ELEMENT",
            ParseCode::UnknownAttribute => "UNKNOWN_ATTRIBUTE",
            ParseCode::MissingAttribute => "MISSING_ATTRIBUTE",
            ParseCode::BadValue => "BAD_VALUE",
        }
    }
}

/// Malformed or non-conforming markup. Lines and columns are 1-based,
/// columns count characters.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{line}:{col}: {}: {message}", code.as_str())]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub code: ParseCode,
    pub message: String,
}

/// Invariant rules checked by the validator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Rule {
    /// A flow lists fewer than two waypoints.
    FlowUnderpopulated,
    /// A reference names a landmark or flow that does not exist.
    DanglingRef,
    DuplicateId,
    NoFuelTerminal,
    BadCoordinate,
    /// Id does not match `[A-Za-z0-9_-]+`.
    BadId,
    /// Flow whose endpoints coincide.
    SelfLoopFlow,
    /// Waypoint list does not start at `from` and end at `to`.
    WaypointEndpointMismatch,
    DuplicateWaypoint,
    DegenerateRegion,
    BadScale,
    BadFlowVector,
    /// Annotation lists a passed landmark twice or looks ahead to a passed one.
    InconsistentAnnotation,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::FlowUnderpopulated => "FLOW_UNDERPOPULATED",
            Rule::DanglingRef => "DANGLING_REF",
            Rule::DuplicateId => "DUPLICATE_ID",
            Rule::NoFuelTerminal => "NO_FUEL_TERMINAL",
            Rule::BadCoordinate => "BAD_COORDINATE",
            Rule::BadId => "BAD_ID",
            Rule::SelfLoopFlow => "SELF_LOOP_FLOW",
            Rule::WaypointEndpointMismatch => "WAYPOINT_ENDPOINT_MISMATCH",
            Rule::DuplicateWaypoint => "DUPLICATE_WAYPOINT",
            Rule::DegenerateRegion => "DEGENERATE_REGION",
            Rule::BadScale => "BAD_SCALE",
            Rule::BadFlowVector => "BAD_FLOW_VECTOR",
            Rule::InconsistentAnnotation => "INCONSISTENT_ANNOTATION",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Source position of the element a diagnostic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub struct ValidationError {
    pub rule: Rule,
    pub offending_id: String,
    pub span: Option<Span>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(s) = self.span {
            write!(f, "{}:{}: ", s.line, s.col)?;
        }
        write!(f, "{} ({})", self.rule, self.offending_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MdlError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{} validation error(s), first: {}", .0.len(), .0[0])]
    Invalid(Vec<ValidationError>),
}

impl MdlError {
    /// Rule ids of every diagnostic, in report order.
    pub fn rule_ids(&self) -> Vec<&'static str> {
        match self {
            MdlError::Parse(e) => alloc::vec![e.code.as_str()],
            MdlError::Invalid(v) => v.iter().map(|e| e.rule.as_str()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("annotation for robot {robot_id} references unknown id {missing_id}")]
pub struct AnnotationRefError {
    pub robot_id: String,
    pub missing_id: String,
}

/// Failures of the geometric and graph queries.
#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum QueryError {
    #[error("point lies in no scale region")]
    NoScaleRegion,
    #[error("unknown flow {0}")]
    UnknownFlow(String),
    #[error("unknown landmark {0}")]
    UnknownLandmark(String),
    #[error("fraction {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("robot is {distance:.1} m from the flow, beyond the corridor")]
    OffRoute { distance: f64 },
    #[error("corridor radius must be positive")]
    BadCorridor,
    #[error("no route from {from} to {to}")]
    NoRoute { from: String, to: String },
}
