//! Boundary tracing over binary images, run as two identical abstraction
//! layers. Layer 1 turns pixels into path-ordered boundary segments and
//! junction points; layer 2 turns segments into contours by chaining
//! colinear neighbors. Both layers are plain [`LayerSpec`] values executed
//! by [`crate::operators::run_layer`]; this module contains no clustering
//! code of its own, only the parameter closures and the output packaging.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::GridField;
use crate::geometry::{angle_mod180_deg, dist, P2};
use crate::ngraph::NGraph;
use crate::object::{ObjectKind, PropValue, SpatialObject};
use crate::operators::{
    consistent, contour_rules, run_layer, Combiner, DescTypes, LabeledClass, LayerSpec,
    LayerTrace,
};
use crate::rules::{ClassRules, ClassView};

/// Tuning knobs of the boundary tracer. Distances are in pixels, the angle
/// in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracerParams {
    /// Dissimilarity cutoff for grouping pixels (any value in (0, 1) acts
    /// the same, because pixel dissimilarity is 0 or 1).
    pub threshold1: f64,
    /// Dissimilarity cutoff for grouping segments (same remark).
    pub threshold2: f64,
    /// Maximum pixel-to-pixel distance for two segments to count as
    /// neighbors.
    pub separation: f64,
    /// Maximum endpoint gap for colinearity and for closing a contour.
    pub delta: f64,
    /// Maximum tangent angle difference (degrees) for colinearity.
    pub epsilon: f64,
}

impl Default for TracerParams {
    fn default() -> Self {
        TracerParams {
            threshold1: 0.5,
            threshold2: 0.5,
            separation: 2.5,
            delta: 2.5,
            epsilon: 30.0,
        }
    }
}

impl TracerParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("threshold1", self.threshold1),
            ("threshold2", self.threshold2),
            ("separation", self.separation),
            ("delta", self.delta),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Argument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 90.0) {
            return Err(Error::Argument(format!(
                "epsilon must lie in (0, 90) degrees, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// True iff the pixel holds 1 and more than two of its 4-neighbors hold 1.
pub fn is_junction(grid: &GridField, row: usize, col: usize) -> bool {
    if grid.get(row, col) != 1.0 {
        return false;
    }
    let mut ones = 0;
    if row > 0 && grid.get(row - 1, col) == 1.0 {
        ones += 1;
    }
    if row + 1 < grid.height() && grid.get(row + 1, col) == 1.0 {
        ones += 1;
    }
    if col > 0 && grid.get(row, col - 1) == 1.0 {
        ones += 1;
    }
    if col + 1 < grid.width() && grid.get(row, col + 1) == 1.0 {
        ones += 1;
    }
    ones > 2
}

/// Outward unit tangent of a path-ordered point list at one end.
fn end_tangent(points: &[P2], at_end: bool) -> [f64; 2] {
    if points.len() < 2 {
        return [0.0, 0.0];
    }
    let (tip, inner) = if at_end {
        (points[points.len() - 1], points[points.len() - 2])
    } else {
        (points[0], points[1])
    };
    let d = [tip[0] - inner[0], tip[1] - inner[1]];
    let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
    [d[0] / n, d[1] / n]
}

/// True iff two multi-point segments have some endpoint pair closer than
/// `delta` whose outward tangents differ by at most `epsilon` degrees
/// (compared modulo 180°). Segments of a single point never qualify.
pub fn segment_colinear(
    s1: &SpatialObject,
    s2: &SpatialObject,
    delta: f64,
    epsilon: f64,
) -> bool {
    let (Some(p1), Some(p2)) = (s1.points2(), s2.points2()) else {
        return false;
    };
    if p1.len() < 2 || p2.len() < 2 {
        return false;
    }
    for e1 in [false, true] {
        for e2 in [false, true] {
            let a = if e1 { p1[p1.len() - 1] } else { p1[0] };
            let b = if e2 { p2[p2.len() - 1] } else { p2[0] };
            if dist(a, b) <= delta {
                let t1 = end_tangent(&p1, e1);
                let t2 = end_tangent(&p2, e2);
                if angle_mod180_deg(t1, t2) <= epsilon {
                    return true;
                }
            }
        }
    }
    false
}

/// True iff the object was marked as a closed pixel ring when it was built.
fn is_ring(o: &SpatialObject) -> bool {
    matches!(o.props.get("ring"), Some(PropValue::Bool(true)))
}

/// Order a class of 4-connected pixels into a path: start from the
/// smallest-index degree-1 pixel (smallest-index pixel for a closed ring)
/// and repeatedly step to the unvisited class neighbor, preferring the
/// smaller cell index on the one ambiguous first step of a ring.
fn order_pixels(members: &[usize], width: usize) -> Vec<(usize, usize)> {
    let cells: BTreeSet<usize> = members.iter().copied().collect();
    let neighbors = |i: usize| -> Vec<usize> {
        let (r, c) = (i / width, i % width);
        let mut out = Vec::new();
        if r > 0 && cells.contains(&(i - width)) {
            out.push(i - width);
        }
        if c > 0 && cells.contains(&(i - 1)) {
            out.push(i - 1);
        }
        if c + 1 < width && cells.contains(&(i + 1)) {
            out.push(i + 1);
        }
        if cells.contains(&(i + width)) {
            out.push(i + width);
        }
        out.sort_unstable();
        out
    };
    let start = cells
        .iter()
        .copied()
        .find(|&i| neighbors(i).len() == 1)
        .unwrap_or_else(|| *cells.iter().next().expect("class is nonempty"));
    let mut path = vec![start];
    let mut visited: BTreeSet<usize> = BTreeSet::new();
    visited.insert(start);
    let mut cur = start;
    loop {
        let next = neighbors(cur).into_iter().find(|n| !visited.contains(n));
        match next {
            Some(n) => {
                visited.insert(n);
                path.push(n);
                cur = n;
            }
            None => break,
        }
    }
    debug_assert_eq!(path.len(), cells.len(), "pixel class is a path or ring");
    path.into_iter().map(|i| (i / width, i % width)).collect()
}

/// Greedily chain the member segments of one class into a single point
/// sequence, always attaching the unused segment endpoint nearest to
/// either end of the growing chain. Ties break lexicographically on
/// (gap, member index, chain end before chain start, segment start before
/// segment end), so the walk is deterministic.
fn chain_members(members: &[usize], g: &NGraph, delta: f64) -> (Vec<P2>, bool) {
    let pts: Vec<Vec<P2>> = members
        .iter()
        .map(|&m| g.node(m).points2().expect("segments carry 2-D points"))
        .collect();
    let mut chain: std::collections::VecDeque<P2> = pts[0].iter().copied().collect();
    let mut used = vec![false; members.len()];
    used[0] = true;
    for _ in 1..members.len() {
        let back = *chain.back().expect("chain is nonempty");
        let front = *chain.front().expect("chain is nonempty");
        // (gap, member position, side 0=back 1=front, endpoint 0=first 1=last)
        let mut best: Option<(f64, usize, u8, u8)> = None;
        for (m, p) in pts.iter().enumerate() {
            if used[m] {
                continue;
            }
            for (e, &tip) in [p[0], p[p.len() - 1]].iter().enumerate() {
                for (side, anchor) in [(0u8, back), (1u8, front)] {
                    let cand = (dist(anchor, tip), m, side, e as u8);
                    let better = match &best {
                        None => true,
                        Some(b) => {
                            (cand.0, cand.1, cand.2, cand.3)
                                < (b.0, b.1, b.2, b.3)
                        }
                    };
                    if better {
                        best = Some(cand);
                    }
                }
            }
        }
        let (_, m, side, e) = best.expect("an unused member remains");
        used[m] = true;
        let seq = pts[m].clone();
        match (side, e) {
            // Append so the attaching endpoint sits next to the chain back.
            (0, 0) => chain.extend(seq),
            (0, 1) => chain.extend(seq.into_iter().rev()),
            // Prepend so the attaching endpoint sits next to the chain front.
            (1, 0) => {
                for p in seq {
                    chain.push_front(p);
                }
            }
            (1, 1) => {
                for p in seq.into_iter().rev() {
                    chain.push_front(p);
                }
            }
            _ => unreachable!(),
        }
    }
    let closed = dist(
        *chain.front().expect("chain is nonempty"),
        *chain.back().expect("chain is nonempty"),
    ) <= delta;
    (chain.into_iter().collect(), closed)
}

/// Build the two layer descriptions the tracer runs: pixels → segments and
/// junctions, then segments → contours. Fails on a non-binary or
/// multi-channel grid or invalid parameters.
pub fn layer_specs(grid: &GridField, params: &TracerParams) -> Result<[LayerSpec; 2]> {
    params.validate()?;
    if grid.channels() != 1 {
        return Err(Error::Input(format!(
            "boundary tracing needs a single-channel grid, got {} channels",
            grid.channels()
        )));
    }
    for r in 0..grid.height() {
        for c in 0..grid.width() {
            let v = grid.get(r, c);
            if v != 0.0 && v != 1.0 {
                return Err(Error::Input(format!(
                    "boundary tracing needs a binary grid; cell ({r}, {c}) holds {v}"
                )));
            }
        }
    }
    let width = grid.width();
    let height = grid.height();
    let values: Vec<f64> = (0..height)
        .flat_map(|r| (0..width).map(move |c| (r, c)))
        .map(|(r, c)| grid.get(r, c))
        .collect();
    let junctions: BTreeSet<usize> = (0..height)
        .flat_map(|r| (0..width).map(move |c| (r, c)))
        .filter(|&(r, c)| is_junction(grid, r, c))
        .map(|(r, c)| r * width + c)
        .collect();

    // Layer 1: pixels into same-value runs, cut at junctions.
    let v1 = values.clone();
    let j1 = junctions.clone();
    let cluster1 = move |_: &NGraph, u: usize, v: usize| -> f64 {
        if v1[u] == v1[v] && !j1.contains(&u) && !j1.contains(&v) {
            0.0
        } else {
            1.0
        }
    };
    let v2 = values.clone();
    let j2 = junctions.clone();
    let v3 = values;
    let rules1 = ClassRules::new()
        .rule("junction", move |view: &ClassView| {
            view.members.len() == 1 && j2.contains(&view.members[0])
        })
        .rule("segment", move |view: &ClassView| {
            view.members.iter().all(|&m| v2[m] == 1.0)
        })
        .rule("background", move |view: &ClassView| {
            view.members.iter().all(|&m| v3[m] == 0.0)
        });
    let mut desc1 = DescTypes::new();
    desc1.insert(
        "segment".into(),
        Box::new(move |class: &LabeledClass, _: &NGraph| {
            let path = order_pixels(&class.members, width);
            // A walk that ends 4-adjacent to its start covered a closed ring
            // (open paths start at a degree-1 pixel, so their ends cannot
            // touch); rings have no free ends and must not chain.
            let ring = path.len() >= 3 && {
                let (r0, c0) = path[0];
                let (r1, c1) = path[path.len() - 1];
                r0.abs_diff(r1) + c0.abs_diff(c1) == 1
            };
            Ok(SpatialObject::new(
                ObjectKind::Segment,
                path.into_iter()
                    .map(|(r, c)| vec![c as f64, r as f64])
                    .collect(),
            )
            .with_prop("class_id", class.id as i64)
            .with_prop("ring", ring))
        }),
    );
    desc1.insert(
        "junction".into(),
        Box::new(move |class: &LabeledClass, _: &NGraph| {
            let i = class.members[0];
            Ok(SpatialObject::new(
                ObjectKind::Junction,
                vec![vec![(i % width) as f64, (i / width) as f64]],
            )
            .with_prop("class_id", class.id as i64))
        }),
    );
    let layer1 = LayerSpec {
        name: "pixels-to-segments".into(),
        combiner: Combiner::Grid4 { width, height },
        cluster_proc: Box::new(cluster1),
        threshold: params.threshold1,
        class_rules: rules1,
        keep: Box::new(|c: &LabeledClass| c.label == "segment" || c.label == "junction"),
        desc_types: desc1,
    };

    // Layer 2: segments into contours by proximity then colinearity.
    let separation = params.separation;
    let (delta, epsilon) = (params.delta, params.epsilon);
    let link = move |_: usize, a: &SpatialObject, _: usize, b: &SpatialObject| {
        let (Some(pa), Some(pb)) = (a.points2(), b.points2()) else {
            return None;
        };
        let gap = pa
            .iter()
            .flat_map(|&p| pb.iter().map(move |&q| dist(p, q)))
            .fold(f64::INFINITY, f64::min);
        (gap <= separation).then_some(Some(gap))
    };
    let cluster2 = move |g: &NGraph, u: usize, v: usize| -> f64 {
        let (a, b) = (g.node(u), g.node(v));
        // The two ends of a ring segment are an artifact of where the walk
        // cut the cycle, not real endpoints, so a ring never merges.
        if is_ring(a) || is_ring(b) {
            return 1.0;
        }
        if segment_colinear(a, b, delta, epsilon) {
            0.0
        } else {
            1.0
        }
    };
    let rules2 = ClassRules::new().rule("contour", |view: &ClassView| {
        view.all_members(|_, o| o.kind == ObjectKind::Segment && o.geom.len() > 1)
    });
    let chain_delta = params.delta;
    let mut desc2 = DescTypes::new();
    desc2.insert(
        "contour".into(),
        Box::new(move |class: &LabeledClass, g: &NGraph| {
            let (points, closed) = chain_members(&class.members, g, chain_delta);
            Ok(SpatialObject::new(
                ObjectKind::Contour,
                points.into_iter().map(|p| vec![p[0], p[1]]).collect(),
            )
            .with_prop(
                "members",
                class
                    .members
                    .iter()
                    .map(|&m| crate::object::PropValue::Int(m as i64))
                    .collect::<Vec<_>>(),
            )
            .with_prop("closed", closed))
        }),
    );
    let layer2 = LayerSpec {
        name: "segments-to-contours".into(),
        combiner: Combiner::Predicate {
            name: "proximity".into(),
            link: Box::new(link),
        },
        cluster_proc: Box::new(cluster2),
        threshold: params.threshold2,
        class_rules: rules2,
        keep: Box::new(|c: &LabeledClass| c.label == "contour"),
        desc_types: desc2,
    };
    Ok([layer1, layer2])
}

/// One path-ordered boundary segment, as emitted: pixels as `[row, col]`
/// and the outward unit tangents at the two ends as `[drow, dcol]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentOut {
    pub pixels: Vec<[i64; 2]>,
    pub tangents: [[f64; 2]; 2],
}

/// One contour, as emitted: member indices into the segment list
/// (ascending), plus the closed and legal verdicts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourOut {
    pub segments: Vec<usize>,
    pub closed: bool,
    pub legal: bool,
}

#[derive(Serialize)]
struct TraceDoc<'a> {
    junctions: &'a [[i64; 2]],
    segments: &'a [SegmentOut],
    contours: &'a [ContourOut],
}

/// Full tracer output: the emitted junctions, segments, and contours, plus
/// every intermediate layer result for inspection.
#[derive(Debug)]
pub struct TraceResult {
    pub junctions: Vec<[i64; 2]>,
    pub segments: Vec<SegmentOut>,
    pub contours: Vec<ContourOut>,
    pub layer1: LayerTrace,
    pub layer2: LayerTrace,
}

impl TraceResult {
    /// Deterministic JSON document with `junctions`, `segments`, and
    /// `contours` keys.
    pub fn to_json(&self) -> String {
        let doc = TraceDoc {
            junctions: &self.junctions,
            segments: &self.segments,
            contours: &self.contours,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("trace output serializes");
        s.push('\n');
        s
    }

    /// One-line overview, e.g. `contours=2 legal=2 segments=5 junctions=2`.
    pub fn summary(&self) -> String {
        let legal = self.contours.iter().filter(|c| c.legal).count();
        format!(
            "contours={} legal={} segments={} junctions={}",
            self.contours.len(),
            legal,
            self.segments.len(),
            self.junctions.len()
        )
    }

    /// Total pixels accounted for: segment pixels plus junction pixels.
    pub fn accounted_pixels(&self) -> usize {
        self.segments.iter().map(|s| s.pixels.len()).sum::<usize>() + self.junctions.len()
    }
}

fn rc_of(point: &[f64]) -> [i64; 2] {
    [point[1].round() as i64, point[0].round() as i64]
}

/// Trace the boundaries of a binary grid: run the two layers of
/// [`layer_specs`] and apply the contour consistency rule to each result.
pub fn trace_boundaries(grid: &GridField, params: &TracerParams) -> Result<TraceResult> {
    let [spec1, spec2] = layer_specs(grid, params)?;
    let layer1 = run_layer(crate::field::field_cells(grid), &spec1)?;
    let layer2 = run_layer(layer1.objects.clone(), &spec2)?;

    let junctions: Vec<[i64; 2]> = layer1
        .objects
        .iter()
        .filter(|o| o.kind == ObjectKind::Junction)
        .map(|o| rc_of(&o.geom[0]))
        .collect();
    // Rank of each layer-2 node among the segment-kind nodes, so contour
    // members can reference positions in the emitted segment list.
    let mut seg_rank = vec![None; layer2.graph.len()];
    let mut segments = Vec::new();
    for (i, o) in layer2.graph.nodes().iter().enumerate() {
        if o.kind == ObjectKind::Segment {
            seg_rank[i] = Some(segments.len());
            let pts = o.points2().expect("segments carry 2-D points");
            let t0 = end_tangent(&pts, false);
            let t1 = end_tangent(&pts, true);
            segments.push(SegmentOut {
                pixels: o.geom.iter().map(|p| rc_of(p)).collect(),
                tangents: [[t0[1], t0[0]], [t1[1], t1[0]]],
            });
        }
    }
    let rules = contour_rules();
    let contours: Vec<ContourOut> = layer2
        .kept
        .classes
        .iter()
        .zip(&layer2.objects)
        .map(|(class, obj)| ContourOut {
            segments: class
                .members
                .iter()
                .map(|&m| seg_rank[m].expect("contour members are segments"))
                .collect(),
            closed: obj
                .prop("closed")
                .and_then(|p| p.as_bool())
                .unwrap_or(false),
            legal: consistent(obj, &rules),
        })
        .collect();
    Ok(TraceResult {
        junctions,
        segments,
        contours,
        layer1,
        layer2,
    })
}
