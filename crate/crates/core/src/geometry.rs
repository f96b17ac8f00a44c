//! Plane geometry over the object representations the pipelines produce:
//! polylines, regions (pixel sets or simple polygons), masks, and the
//! operations on them — intrinsic measurements, containment, intersection,
//! boundary and its inverse, convolution, and contiguity.
//!
//! All tolerance-based comparisons use [`GEOM_EPS`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::field::GridField;
use crate::object::{ObjectKind, PropValue, SpatialObject};

/// Global geometric tolerance.
pub const GEOM_EPS: f64 = 1e-9;

pub type P2 = [f64; 2];

pub fn dist(a: P2, b: P2) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm(a: P2) -> f64 {
    dot(a, a).sqrt()
}

/// Angle between two directions in degrees, identified modulo 180° (an
/// undirected line direction), in `[0, 90]`.
pub fn angle_mod180_deg(u: P2, v: P2) -> f64 {
    let nu = norm(u);
    let nv = norm(v);
    if nu <= GEOM_EPS || nv <= GEOM_EPS {
        return 0.0;
    }
    let c = (dot(u, v) / (nu * nv)).abs().clamp(0.0, 1.0);
    c.acos().to_degrees()
}

/// An ordered chain of 2-D points; `closed` adds the implicit edge from the
/// last point back to the first (do not repeat the first point).
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<P2>,
    closed: bool,
}

impl Polyline {
    pub fn new(points: Vec<P2>, closed: bool) -> Result<Self> {
        let min = if closed { 3 } else { 2 };
        if points.len() < min {
            return Err(Error::IllFormed(format!(
                "{} polyline needs at least {} points, got {}",
                if closed { "closed" } else { "open" },
                min,
                points.len()
            )));
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::IllFormed("non-finite polyline coordinate".into()));
        }
        let n = points.len();
        let pairs = if closed { n } else { n - 1 };
        for i in 0..pairs {
            if dist(points[i], points[(i + 1) % n]) <= GEOM_EPS {
                return Err(Error::IllFormed(format!(
                    "consecutive duplicate points at index {i}"
                )));
            }
        }
        Ok(Polyline { points, closed })
    }

    pub fn points(&self) -> &[P2] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn length(&self) -> f64 {
        let n = self.points.len();
        let edges = if self.closed { n } else { n - 1 };
        (0..edges)
            .map(|i| dist(self.points[i], self.points[(i + 1) % n]))
            .sum()
    }

    /// Per-vertex curvature: the inverse circumradius of each vertex and its
    /// two neighbors. Endpoints of an open chain (and collinear triples)
    /// report 0.
    pub fn curvature(&self) -> Vec<f64> {
        let n = self.points.len();
        let mut out = vec![0.0; n];
        let range = if self.closed { 0..n } else { 1..n - 1 };
        for i in range {
            let p = self.points[(i + n - 1) % n];
            let q = self.points[i];
            let r = self.points[(i + 1) % n];
            out[i] = circumcurvature(p, q, r);
        }
        out
    }

    /// True if any two non-adjacent edges cross (or adjacent edges overlap
    /// beyond their shared endpoint).
    pub fn self_intersects(&self) -> bool {
        polyline_self_intersects(&self.points, self.closed)
    }
}

/// Inverse circumradius of the circle through three points; 0 when collinear.
fn circumcurvature(p: P2, q: P2, r: P2) -> f64 {
    let a = dist(p, q);
    let b = dist(q, r);
    let c = dist(r, p);
    let area2 = cross(sub(q, p), sub(r, p)).abs();
    if a * b * c <= GEOM_EPS {
        return 0.0;
    }
    // R = abc / (4 * area)  =>  1/R = 2 * |cross| / (abc)
    2.0 * area2 / (a * b * c)
}

/// A connected area: either a set of unit pixel cells addressed `(row, col)`
/// (each cell covering the closed unit square centered on its coordinates),
/// or a simple polygon.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Pixels(BTreeSet<(i64, i64)>),
    Polygon(Vec<P2>),
}

impl Region {
    /// A pixel region must be non-empty and 4-connected.
    pub fn from_pixels(cells: BTreeSet<(i64, i64)>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Empty("pixel region has no cells".into()));
        }
        if !pixels_connected(&cells) {
            return Err(Error::IllFormed("pixel region is not 4-connected".into()));
        }
        Ok(Region::Pixels(cells))
    }

    /// A polygon region must be a simple closed polygon (vertices in order,
    /// first vertex not repeated).
    pub fn polygon(points: Vec<P2>) -> Result<Self> {
        let pl = Polyline::new(points, true)?;
        if pl.self_intersects() {
            return Err(Error::IllFormed("polygon is self-intersecting".into()));
        }
        Ok(Region::Polygon(pl.points().to_vec()))
    }
}

fn pixels_connected(cells: &BTreeSet<(i64, i64)>) -> bool {
    let start = match cells.iter().next() {
        Some(&p) => p,
        None => return true,
    };
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([start]);
    seen.insert(start);
    while let Some((r, c)) = queue.pop_front() {
        for (nr, nc) in [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)] {
            if cells.contains(&(nr, nc)) && seen.insert((nr, nc)) {
                queue.push_back((nr, nc));
            }
        }
    }
    seen.len() == cells.len()
}

/// A convolution mask: odd-sized in both axes so it has a center cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    width: usize,
    height: usize,
    weights: Vec<f64>,
}

impl Mask {
    pub fn new(width: usize, height: usize, weights: Vec<f64>) -> Result<Self> {
        if width % 2 == 0 || height % 2 == 0 || width == 0 || height == 0 {
            return Err(Error::Argument(format!(
                "mask must be odd-sized in both axes, got {width}x{height}"
            )));
        }
        if weights.len() != width * height {
            return Err(Error::Argument(format!(
                "expected {} weights, got {}",
                width * height,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Argument("non-finite mask weight".into()));
        }
        Ok(Mask {
            width,
            height,
            weights,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.width + col]
    }
}

/// The measurable shapes `intrinsic_geometry` accepts.
pub enum Shape<'a> {
    Curve(&'a Polyline),
    Area(&'a Region),
}

/// Measure named intrinsic properties of a shape.
///
/// Curves support `length` and `curvature` (a per-vertex list); areas support
/// `area`, `perimeter`, and `centroid`. Asking for a property the shape kind
/// does not define is an argument error.
pub fn intrinsic_geometry(shape: Shape, props: &[&str]) -> Result<BTreeMap<String, PropValue>> {
    let mut out = BTreeMap::new();
    for &name in props {
        let value = match (&shape, name) {
            (Shape::Curve(pl), "length") => PropValue::Real(pl.length()),
            (Shape::Curve(pl), "curvature") => {
                PropValue::List(pl.curvature().into_iter().map(PropValue::Real).collect())
            }
            (Shape::Area(r), "area") => PropValue::Real(region_area(r)),
            (Shape::Area(r), "perimeter") => PropValue::Real(region_perimeter(r)),
            (Shape::Area(r), "centroid") => {
                let c = region_centroid(r);
                PropValue::List(vec![PropValue::Real(c[0]), PropValue::Real(c[1])])
            }
            _ => {
                return Err(Error::Argument(format!(
                    "property {name:?} is not defined for this shape kind"
                )))
            }
        };
        out.insert(name.to_string(), value);
    }
    Ok(out)
}

fn region_area(r: &Region) -> f64 {
    match r {
        Region::Pixels(cells) => cells.len() as f64,
        Region::Polygon(pts) => shoelace_area(pts).abs(),
    }
}

fn region_perimeter(r: &Region) -> f64 {
    match r {
        Region::Pixels(cells) => {
            // Unit cell edges adjacent to a non-region cell.
            let mut edges = 0usize;
            for &(row, col) in cells {
                for nb in [(row - 1, col), (row + 1, col), (row, col - 1), (row, col + 1)] {
                    if !cells.contains(&nb) {
                        edges += 1;
                    }
                }
            }
            edges as f64
        }
        Region::Polygon(pts) => {
            let n = pts.len();
            (0..n).map(|i| dist(pts[i], pts[(i + 1) % n])).sum()
        }
    }
}

fn region_centroid(r: &Region) -> P2 {
    match r {
        Region::Pixels(cells) => {
            let n = cells.len() as f64;
            let (sx, sy) = cells
                .iter()
                .fold((0.0, 0.0), |(sx, sy), &(row, col)| (sx + col as f64, sy + row as f64));
            [sx / n, sy / n]
        }
        Region::Polygon(pts) => {
            // Area-weighted polygon centroid.
            let n = pts.len();
            let a = shoelace_area(pts);
            if a.abs() <= GEOM_EPS {
                // Degenerate: fall back to the vertex mean.
                let (sx, sy) = pts.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
                return [sx / n as f64, sy / n as f64];
            }
            let (mut cx, mut cy) = (0.0, 0.0);
            for i in 0..n {
                let p = pts[i];
                let q = pts[(i + 1) % n];
                let w = cross(p, q);
                cx += (p[0] + q[0]) * w;
                cy += (p[1] + q[1]) * w;
            }
            [cx / (6.0 * a), cy / (6.0 * a)]
        }
    }
}

/// Signed polygon area (positive for counter-clockwise vertex order).
pub fn shoelace_area(pts: &[P2]) -> f64 {
    let n = pts.len();
    0.5 * (0..n)
        .map(|i| cross(pts[i], pts[(i + 1) % n]))
        .sum::<f64>()
}

/// Even-odd point-in-polygon. Points on the boundary are *not* contained.
pub fn point_in_polygon(p: P2, poly: &[P2]) -> bool {
    if point_on_polygon_boundary(p, poly) {
        return false;
    }
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        // Edge straddles the horizontal line through p (half-open rule).
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if x > p[0] {
                inside = !inside;
            }
        }
    }
    inside
}

fn point_on_polygon_boundary(p: P2, poly: &[P2]) -> bool {
    let n = poly.len();
    (0..n).any(|i| point_on_segment(p, poly[i], poly[(i + 1) % n]))
}

fn point_on_segment(p: P2, a: P2, b: P2) -> bool {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let len = norm(ab);
    if len <= GEOM_EPS {
        return dist(p, a) <= GEOM_EPS;
    }
    if cross(ab, ap).abs() / len > GEOM_EPS {
        return false;
    }
    let t = dot(ap, ab) / (len * len);
    (-GEOM_EPS..=1.0 + GEOM_EPS).contains(&t)
}

/// What two shapes have in common.
#[derive(Debug, Clone, PartialEq)]
pub enum Intersection {
    Empty,
    /// Isolated crossing points, sorted by `(x, y)`.
    Points(Vec<P2>),
    /// A collinear overlap between two segments.
    Segment([P2; 2]),
    /// Common cells of two pixel regions.
    Pixels(BTreeSet<(i64, i64)>),
    /// Overlap polygon of two polygon regions.
    Polygon(Vec<P2>),
}

/// Intersect two closed segments. Returns a point, a collinear overlap
/// segment, or nothing.
pub fn segment_intersect(a0: P2, a1: P2, b0: P2, b1: P2) -> Intersection {
    let r = sub(a1, a0);
    let s = sub(b1, b0);
    let denom = cross(r, s);
    let qp = sub(b0, a0);
    let scale = norm(r).max(norm(s)).max(1.0);
    if denom.abs() <= GEOM_EPS * scale * scale {
        // Parallel. Collinear if b0 sits on the line through a.
        if cross(qp, r).abs() > GEOM_EPS * scale * scale {
            return Intersection::Empty;
        }
        // Project everything on r and intersect the parameter intervals.
        let rr = dot(r, r);
        if rr <= GEOM_EPS {
            // a is a degenerate point.
            return if point_on_segment(a0, b0, b1) {
                Intersection::Points(vec![a0])
            } else {
                Intersection::Empty
            };
        }
        let t0 = dot(qp, r) / rr;
        let t1 = t0 + dot(s, r) / rr;
        let (lo, hi) = (t0.min(t1), t0.max(t1));
        let lo = lo.max(0.0);
        let hi = hi.min(1.0);
        if hi < lo - GEOM_EPS {
            return Intersection::Empty;
        }
        let p = |t: f64| [a0[0] + t * r[0], a0[1] + t * r[1]];
        if (hi - lo).abs() <= GEOM_EPS {
            return Intersection::Points(vec![p(lo.clamp(0.0, 1.0))]);
        }
        return Intersection::Segment([p(lo), p(hi)]);
    }
    let t = cross(qp, s) / denom;
    let u = cross(qp, r) / denom;
    let tol = GEOM_EPS;
    if (-tol..=1.0 + tol).contains(&t) && (-tol..=1.0 + tol).contains(&u) {
        Intersection::Points(vec![[a0[0] + t * r[0], a0[1] + t * r[1]]])
    } else {
        Intersection::Empty
    }
}

/// All crossing points between two polylines, deduplicated and sorted.
pub fn intersect_polylines(a: &Polyline, b: &Polyline) -> Intersection {
    let mut pts: Vec<P2> = Vec::new();
    let an = a.points().len();
    let bn = b.points().len();
    let a_edges = if a.is_closed() { an } else { an - 1 };
    let b_edges = if b.is_closed() { bn } else { bn - 1 };
    for i in 0..a_edges {
        for j in 0..b_edges {
            let hit = segment_intersect(
                a.points()[i],
                a.points()[(i + 1) % an],
                b.points()[j],
                b.points()[(j + 1) % bn],
            );
            match hit {
                Intersection::Points(ps) => pts.extend(ps),
                Intersection::Segment([p, q]) => {
                    pts.push(p);
                    pts.push(q);
                }
                _ => {}
            }
        }
    }
    dedup_sorted_points(&mut pts);
    if pts.is_empty() {
        Intersection::Empty
    } else {
        Intersection::Points(pts)
    }
}

fn dedup_sorted_points(pts: &mut Vec<P2>) {
    pts.sort_by(|a, b| {
        a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1]))
    });
    let mut out: Vec<P2> = Vec::with_capacity(pts.len());
    for &p in pts.iter() {
        if out.iter().all(|&q| dist(p, q) > GEOM_EPS) {
            out.push(p);
        }
    }
    *pts = out;
}

/// Intersect two regions of the same representation.
///
/// Pixel regions intersect cellwise. Polygon regions are clipped with the
/// Sutherland–Hodgman algorithm, which needs a convex clip polygon: at least
/// one operand must be convex, otherwise the pair is unsupported.
pub fn intersect_regions(a: &Region, b: &Region) -> Result<Intersection> {
    match (a, b) {
        (Region::Pixels(pa), Region::Pixels(pb)) => {
            let common: BTreeSet<(i64, i64)> = pa.intersection(pb).copied().collect();
            if common.is_empty() {
                Ok(Intersection::Empty)
            } else {
                Ok(Intersection::Pixels(common))
            }
        }
        (Region::Polygon(pa), Region::Polygon(pb)) => {
            let (subject, clip) = if polygon_is_convex(pb) {
                (pa, pb)
            } else if polygon_is_convex(pa) {
                (pb, pa)
            } else {
                return Err(Error::Unsupported(
                    "polygon intersection needs at least one convex operand".into(),
                ));
            };
            let out = clip_polygon(subject, clip);
            if out.len() < 3 || shoelace_area(&out).abs() <= GEOM_EPS {
                Ok(Intersection::Empty)
            } else {
                Ok(Intersection::Polygon(out))
            }
        }
        _ => Err(Error::Unsupported(
            "cannot intersect a pixel region with a polygon region".into(),
        )),
    }
}

fn polygon_is_convex(pts: &[P2]) -> bool {
    let n = pts.len();
    if n < 3 {
        return false;
    }
    let mut sign = 0.0f64;
    for i in 0..n {
        let c = cross(
            sub(pts[(i + 1) % n], pts[i]),
            sub(pts[(i + 2) % n], pts[(i + 1) % n]),
        );
        if c.abs() <= GEOM_EPS {
            continue;
        }
        if sign == 0.0 {
            sign = c.signum();
        } else if c.signum() != sign {
            return false;
        }
    }
    true
}

/// Sutherland–Hodgman: clip `subject` against convex `clip`.
fn clip_polygon(subject: &[P2], clip: &[P2]) -> Vec<P2> {
    // Orient the clip polygon counter-clockwise so "inside" is to the left.
    let mut clip: Vec<P2> = clip.to_vec();
    if shoelace_area(&clip) < 0.0 {
        clip.reverse();
    }
    let mut output: Vec<P2> = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % n];
        let edge = sub(b, a);
        let inside = |p: P2| cross(edge, sub(p, a)) >= -GEOM_EPS;
        let input = std::mem::take(&mut output);
        let m = input.len();
        for j in 0..m {
            let cur = input[j];
            let next = input[(j + 1) % m];
            let cur_in = inside(cur);
            let next_in = inside(next);
            if cur_in {
                output.push(cur);
            }
            if cur_in != next_in {
                if let Some(x) = line_segment_cross(a, b, cur, next) {
                    output.push(x);
                }
            }
        }
    }
    // Drop consecutive duplicates introduced by clipping at vertices.
    let mut cleaned: Vec<P2> = Vec::with_capacity(output.len());
    for p in output {
        if cleaned.last().map_or(true, |&q| dist(p, q) > GEOM_EPS) {
            cleaned.push(p);
        }
    }
    if cleaned.len() >= 2 && dist(cleaned[0], *cleaned.last().unwrap()) <= GEOM_EPS {
        cleaned.pop();
    }
    cleaned
}

/// Intersection of the infinite line through (a, b) with segment (p, q).
fn line_segment_cross(a: P2, b: P2, p: P2, q: P2) -> Option<P2> {
    let r = sub(b, a);
    let s = sub(q, p);
    let denom = cross(r, s);
    if denom.abs() <= f64::MIN_POSITIVE {
        return None;
    }
    let t = cross(sub(a, p), r) / -denom;
    Some([p[0] + t * s[0], p[1] + t * s[1]])
}

/// What `contain` tests an outer region against.
pub enum Containee<'a> {
    Point(P2),
    Region(&'a Region),
}

/// True if `inner` lies entirely in the interior of `outer`. Boundary points
/// (and, for pixel regions, boundary cells) do not count as interior.
pub fn contain(outer: &Region, inner: Containee) -> Result<bool> {
    match inner {
        Containee::Point(p) => Ok(region_contains_point(outer, p)),
        Containee::Region(r) => match (outer, r) {
            (Region::Pixels(big), Region::Pixels(small)) => {
                let rim = pixel_boundary(big);
                Ok(small.iter().all(|c| big.contains(c) && !rim.contains(c)))
            }
            (Region::Polygon(big), Region::Polygon(small)) => {
                if !small.iter().all(|&p| point_in_polygon(p, big)) {
                    return Ok(false);
                }
                // No edge of the inner polygon may cross the outer boundary.
                let bn = big.len();
                let sn = small.len();
                for i in 0..sn {
                    for j in 0..bn {
                        match segment_intersect(
                            small[i],
                            small[(i + 1) % sn],
                            big[j],
                            big[(j + 1) % bn],
                        ) {
                            Intersection::Empty => {}
                            _ => return Ok(false),
                        }
                    }
                }
                Ok(true)
            }
            _ => Err(Error::Unsupported(
                "containment between a pixel region and a polygon region".into(),
            )),
        },
    }
}

fn region_contains_point(r: &Region, p: P2) -> bool {
    match r {
        Region::Polygon(pts) => point_in_polygon(p, pts),
        Region::Pixels(cells) => {
            // Every cell whose closed unit square holds p must be a region
            // cell; a point on the outer rim of the union is not interior.
            let r0 = (p[1] - 0.5).ceil() as i64;
            let r1 = (p[1] + 0.5).floor() as i64;
            let c0 = (p[0] - 0.5).ceil() as i64;
            let c1 = (p[0] + 0.5).floor() as i64;
            let mut any = false;
            for row in r0..=r1 {
                for col in c0..=c1 {
                    if (p[0] - col as f64).abs() <= 0.5 && (p[1] - row as f64).abs() <= 0.5 {
                        any = true;
                        if !cells.contains(&(row, col)) {
                            return false;
                        }
                    }
                }
            }
            any
        }
    }
}

/// The boundary of a region: for pixel regions, the cells with at least one
/// 4-neighbor outside the region; for polygon regions, the vertex cycle.
#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    Pixels(BTreeSet<(i64, i64)>),
    Curve(Polyline),
}

pub fn boundary(r: &Region) -> Result<Boundary> {
    match r {
        Region::Pixels(cells) => Ok(Boundary::Pixels(pixel_boundary(cells))),
        Region::Polygon(pts) => Ok(Boundary::Curve(Polyline::new(pts.clone(), true)?)),
    }
}

fn pixel_boundary(cells: &BTreeSet<(i64, i64)>) -> BTreeSet<(i64, i64)> {
    cells
        .iter()
        .filter(|&&(r, c)| {
            [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
                .iter()
                .any(|nb| !cells.contains(nb))
        })
        .copied()
        .collect()
}

/// The region a closed curve encloses (curve included).
///
/// For a pixel curve — a connected cell set in which every cell has exactly
/// two 4-neighbors in the set — the enclosed region is found by flood-filling
/// the exterior of the bounding box and keeping what the flood cannot reach.
/// A closed simple polyline maps to the polygon region with the same
/// vertices. Open or branching curves are ill-formed.
pub fn coboundary(curve: &Boundary) -> Result<Region> {
    match curve {
        Boundary::Curve(pl) => {
            if !pl.is_closed() {
                return Err(Error::IllFormed("coboundary needs a closed curve".into()));
            }
            Region::polygon(pl.points().to_vec())
        }
        Boundary::Pixels(cells) => {
            if cells.is_empty() {
                return Err(Error::Empty("empty pixel curve".into()));
            }
            if !pixels_connected(cells) {
                return Err(Error::IllFormed("pixel curve is not connected".into()));
            }
            for &(r, c) in cells {
                let deg = [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
                    .iter()
                    .filter(|nb| cells.contains(nb))
                    .count();
                if deg != 2 {
                    return Err(Error::IllFormed(format!(
                        "cell ({r}, {c}) has {deg} curve neighbors, expected 2 on a closed curve"
                    )));
                }
            }
            let (mut rmin, mut rmax, mut cmin, mut cmax) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
            for &(r, c) in cells {
                rmin = rmin.min(r);
                rmax = rmax.max(r);
                cmin = cmin.min(c);
                cmax = cmax.max(c);
            }
            // Flood the exterior over a one-cell margin around the curve.
            let (rmin, rmax, cmin, cmax) = (rmin - 1, rmax + 1, cmin - 1, cmax + 1);
            let mut outside = BTreeSet::new();
            let mut queue = VecDeque::from([(rmin, cmin)]);
            outside.insert((rmin, cmin));
            while let Some((r, c)) = queue.pop_front() {
                for nb @ (nr, nc) in [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)] {
                    if nr < rmin || nr > rmax || nc < cmin || nc > cmax {
                        continue;
                    }
                    if !cells.contains(&nb) && outside.insert(nb) {
                        queue.push_back(nb);
                    }
                }
            }
            let mut region = BTreeSet::new();
            for r in rmin..=rmax {
                for c in cmin..=cmax {
                    if !outside.contains(&(r, c)) {
                        region.insert((r, c));
                    }
                }
            }
            Region::from_pixels(region)
        }
    }
}

/// Convolve a single-channel grid with a mask, clamping reads at the edges
/// (border samples repeat outward). The mask is applied in stored
/// orientation: `out(r, c) = sum m(i, j) * f(r + i - cy, c + j - cx)`.
pub fn convolve(field: &GridField, mask: &Mask) -> Result<GridField> {
    if field.channels() != 1 {
        return Err(Error::Argument(format!(
            "convolve expects a single-channel field, got {} channels",
            field.channels()
        )));
    }
    let (w, h) = (field.width(), field.height());
    let (cy, cx) = (mask.height() as i64 / 2, mask.width() as i64 / 2);
    let mut out = Vec::with_capacity(w * h);
    for r in 0..h as i64 {
        for c in 0..w as i64 {
            let mut acc = 0.0;
            for i in 0..mask.height() as i64 {
                for j in 0..mask.width() as i64 {
                    let rr = (r + i - cy).clamp(0, h as i64 - 1) as usize;
                    let cc = (c + j - cx).clamp(0, w as i64 - 1) as usize;
                    acc += mask.get(i as usize, j as usize) * field.get(rr, cc);
                }
            }
            out.push(acc);
        }
    }
    GridField::new(w, h, 1, out)
}

/// True if the closures of the two regions meet.
///
/// Pixel cells are closed unit squares, so cells meeting at an edge *or* a
/// corner make their regions contiguous. Polygon regions are contiguous when
/// they overlap or their boundaries come within [`GEOM_EPS`].
pub fn contiguous(a: &Region, b: &Region) -> Result<bool> {
    match (a, b) {
        (Region::Pixels(pa), Region::Pixels(pb)) => Ok(pa.iter().any(|&(r, c)| {
            (-1..=1).any(|dr| (-1..=1).any(|dc| pb.contains(&(r + dr, c + dc))))
        })),
        (Region::Polygon(pa), Region::Polygon(pb)) => {
            if pa.iter().any(|&p| point_in_polygon(p, pb))
                || pb.iter().any(|&p| point_in_polygon(p, pa))
            {
                return Ok(true);
            }
            let na = pa.len();
            let nb = pb.len();
            for i in 0..na {
                for j in 0..nb {
                    let d = segment_segment_distance(
                        pa[i],
                        pa[(i + 1) % na],
                        pb[j],
                        pb[(j + 1) % nb],
                    );
                    if d <= GEOM_EPS {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
        _ => Err(Error::Unsupported(
            "contiguity between a pixel region and a polygon region".into(),
        )),
    }
}

fn segment_segment_distance(a0: P2, a1: P2, b0: P2, b1: P2) -> f64 {
    if !matches!(segment_intersect(a0, a1, b0, b1), Intersection::Empty) {
        return 0.0;
    }
    point_segment_distance(a0, b0, b1)
        .min(point_segment_distance(a1, b0, b1))
        .min(point_segment_distance(b0, a0, a1))
        .min(point_segment_distance(b1, a0, a1))
}

fn point_segment_distance(p: P2, a: P2, b: P2) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 <= f64::MIN_POSITIVE {
        return dist(p, a);
    }
    let t = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

/// True if the chain (closed or open) crosses itself: any two non-adjacent
/// edges intersect, or adjacent edges overlap beyond their shared vertex.
pub fn polyline_self_intersects(pts: &[P2], closed: bool) -> bool {
    let n = pts.len();
    if n < 3 {
        return false;
    }
    let edges = if closed { n } else { n - 1 };
    for i in 0..edges {
        for j in (i + 1)..edges {
            let share_start = j == i + 1;
            let share_end = closed && i == 0 && j == edges - 1;
            let (a0, a1) = (pts[i], pts[(i + 1) % n]);
            let (b0, b1) = (pts[j], pts[(j + 1) % n]);
            match segment_intersect(a0, a1, b0, b1) {
                Intersection::Empty => {}
                Intersection::Segment(_) => return true,
                Intersection::Points(ps) => {
                    if share_start || share_end {
                        // Adjacent edges may touch only at the shared vertex.
                        let shared = if share_start { a1 } else { a0 };
                        if ps.iter().any(|&p| dist(p, shared) > GEOM_EPS) {
                            return true;
                        }
                    } else {
                        return true;
                    }
                }
                _ => unreachable!("segment intersection is a point or a segment"),
            }
        }
    }
    false
}

impl SpatialObject {
    /// True if this object's geometric extent holds `p`.
    ///
    /// Pixels are closed-minus-boundary unit cells centered on their
    /// coordinates; region objects with ≥3 geometry points are treated as
    /// simple polygons (even-odd rule, boundary excluded). Other kinds have
    /// no extent.
    pub fn contains_point(&self, p: P2) -> bool {
        match self.kind {
            ObjectKind::Pixel => match self.point2(0) {
                Some(c) => (p[0] - c[0]).abs() < 0.5 && (p[1] - c[1]).abs() < 0.5,
                None => false,
            },
            ObjectKind::Region | ObjectKind::Contour => match self.points2() {
                Some(pts) if pts.len() >= 3 => point_in_polygon(p, &pts),
                _ => false,
            },
            _ => false,
        }
    }
}
