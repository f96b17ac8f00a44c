//! Multi-layer structural analysis of spatial data.
//!
//! The library turns numerical fields — binary images, sampled point sets,
//! grids of measurements — into symbolic descriptions of their structure
//! by repeating one computational pattern per abstraction layer:
//!
//! 1. **aggregate** objects into a neighborhood graph (grid adjacency,
//!    k-nearest neighbors, minimum spanning tree, Delaunay triangulation,
//!    or any pairwise predicate),
//! 2. **classify** the graph into labeled equivalence classes by cutting
//!    edges whose dissimilarity exceeds a threshold,
//! 3. **redescribe** each class as a single higher-level object, which
//!    becomes input to the next layer.
//!
//! Supporting operators — `localize`, `search`, `incremental_analyze`,
//! `consistent`, `pairwise_consistent` — inspect and traverse the graphs
//! between layers. Two ready-made pipelines demonstrate the pattern: a
//! boundary tracer that lifts binary pixels to segments, junctions, and
//! closed contours, and an orbit classifier that labels 2-D point clouds
//! by the shape of their minimum spanning tree.
//!
//! Modules:
//! - [`object`], [`field`]: the value types — spatial objects with geometry
//!   and properties, grid fields, point sets, metrics.
//! - [`geometry`]: measures, intersection, containment, boundary and
//!   coboundary, convolution.
//! - [`ngraph`]: the neighborhood graph and its constructors.
//! - [`rules`]: ordered rule sets used for labeling and consistency.
//! - [`operators`]: the generic layer operators.
//! - [`pipelines`]: the boundary tracer and the orbit classifier.

pub mod error;
pub mod field;
pub mod geometry;
pub mod ngraph;
pub mod object;
pub mod operators;
pub mod pipelines;
pub mod rules;

pub use error::{Error, Result};
pub use field::{
    emit_grid_text, field_cells, load_grid_text, load_pgm, load_points_csv, GridField, Metric,
    PointSet,
};
pub use geometry::{
    boundary, coboundary, contain, contiguous, convolve, intersect_polylines, intersect_regions,
    intrinsic_geometry, Boundary, Containee, Intersection, Mask, Polyline, Region, Shape,
};
pub use ngraph::{Edge, NGraph, Partition};
pub use object::{ObjectKind, PropValue, Props, SpatialObject};
pub use operators::{
    aggregate, classify, consistent, contour_rules, incremental_analyze, localize, localize_ids,
    pairwise_consistent, redescribe, run_layer, search, Combiner, DescType, DescTypes, Enumerate,
    Frontier, LabeledClass, LabeledPartition, LayerSpec, LayerTrace, Path, Transition,
    LAYER_OPERATORS,
};
pub use pipelines::{
    classify_orbit, is_junction, layer_specs, segment_colinear, trace_boundaries, ContourOut,
    OrbitParams, OrbitReport, OrbitStats, SegmentOut, TraceResult, TracerParams,
};
pub use rules::{ClassRule, ClassRules, ClassView, LabelRule, LabelRules, PairRules, RuleSet};
