//! Planar pseudo-segment families: a combinatorial model (directed curves
//! with rotation systems), a polyline front end, face tracing and the
//! quasi-grid machinery built on touch classes.
//!
//! The geometric layer is generic over the scalar; [`Polyline64`] and
//! friends fix it to `f64`.

pub mod arrangement;
pub mod format;
pub mod geometry;
pub mod model;
pub mod quasigrid;

pub use arrangement::{
    build_arrangement, compute_tc, contract_endpoints, Arrangement, ArrangementError, Contraction,
};
pub use model::{
    classify_meeting, count_meetings, validate_family, CombinatorialFamily, Containment, CurveId,
    CurveSpec, DirectedCurve, Direction, FaceRef, Hub, HubEnd, HubId, Meeting, MeetingEnd,
    MeetingEvent, MeetingId, MeetingKind, Passage, Side, Terminal, ValidationReport, Violation,
};

pub type Polyline64 = geometry::Polyline<f64>;
pub type Polyline32 = geometry::Polyline<f32>;
pub type Point64 = geometry::Point<f64>;
pub type Point32 = geometry::Point<f32>;
pub type GeometricMeeting64 = geometry::GeometricMeeting<f64>;
