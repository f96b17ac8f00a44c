//! End-to-end analysis pipelines built purely from the generic operators:
//! boundary tracing of binary images ([`tracer`]) and trajectory-shape
//! classification of point clouds ([`orbit`]).

pub mod orbit;
pub mod tracer;

pub use orbit::{classify_orbit, OrbitParams, OrbitReport, OrbitStats};
pub use tracer::{
    is_junction, layer_specs, segment_colinear, trace_boundaries, ContourOut, SegmentOut,
    TraceResult, TracerParams,
};
