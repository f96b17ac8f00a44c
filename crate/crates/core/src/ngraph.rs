//! Neighborhood graphs: objects as nodes, spatial adjacency as edges.
//!
//! Constructors cover the standard neighborhood structures — explicit
//! predicates, 4-adjacency on grids, k-nearest-neighbor unions, minimum
//! spanning trees, and Delaunay triangulations — and every constructor is
//! deterministic, with ties broken by node index so repeated runs produce
//! identical graphs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GridField, Metric, PointSet};
use crate::geometry::GEOM_EPS;
use crate::object::{ObjectKind, Props, SpatialObject};

/// An undirected edge between node indices, optionally weighted.
/// Endpoints are kept normalized with `u < v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: Option<f64>,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        Edge {
            u: a.min(b),
            v: a.max(b),
            weight: None,
        }
    }

    pub fn weighted(a: usize, b: usize, w: f64) -> Self {
        Edge {
            u: a.min(b),
            v: a.max(b),
            weight: Some(w),
        }
    }

    pub fn other(&self, n: usize) -> usize {
        if n == self.u {
            self.v
        } else {
            self.u
        }
    }
}

impl Serialize for Edge {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = if self.weight.is_some() { 3 } else { 2 };
        let mut seq = serializer.serialize_seq(Some(n))?;
        seq.serialize_element(&self.u)?;
        seq.serialize_element(&self.v)?;
        if let Some(w) = self.weight {
            seq.serialize_element(&w)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Edge {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct EdgeVisitor;
        impl<'de> Visitor<'de> for EdgeVisitor {
            type Value = Edge;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array [u, v] or [u, v, weight]")
            }

            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Edge, A::Error> {
                let u: usize = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let v: usize = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                let weight: Option<f64> = seq.next_element()?;
                if seq.next_element::<serde_json::Value>()?.is_some() {
                    return Err(de::Error::custom("edge array has more than 3 elements"));
                }
                if u == v {
                    return Err(de::Error::custom("self-loop edge"));
                }
                Ok(Edge {
                    u: u.min(v),
                    v: u.max(v),
                    weight,
                })
            }
        }
        deserializer.deserialize_seq(EdgeVisitor)
    }
}

/// A neighborhood graph over a set of spatial objects.
///
/// Carries a provenance tag naming the constructor that built it; the tag is
/// informational and excluded from equality and serialization.
#[derive(Debug, Clone)]
pub struct NGraph {
    nodes: Vec<SpatialObject>,
    edges: Vec<Edge>,
    provenance: String,
}

impl PartialEq for NGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl NGraph {
    /// Build from explicit nodes and edges. Edges are normalized, sorted by
    /// endpoint pair, and deduplicated (first occurrence wins); out-of-range
    /// endpoints, self-loops, and negative or non-finite weights are
    /// rejected.
    pub fn new(nodes: Vec<SpatialObject>, edges: Vec<Edge>) -> Result<Self> {
        let n = nodes.len();
        let mut sorted = edges;
        for e in &sorted {
            if e.u == e.v {
                return Err(Error::IllFormed(format!("self-loop on node {}", e.u)));
            }
            if e.v >= n {
                return Err(Error::IllFormed(format!(
                    "edge ({}, {}) references a node beyond the {} present",
                    e.u, e.v, n
                )));
            }
            if let Some(w) = e.weight {
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::IllFormed(format!(
                        "weight {} on edge ({}, {}) must be finite and non-negative",
                        w, e.u, e.v
                    )));
                }
            }
        }
        sorted.sort_by(|a, b| (a.u, a.v).cmp(&(b.u, b.v)));
        sorted.dedup_by(|next, prev| (next.u, next.v) == (prev.u, prev.v));
        Ok(NGraph {
            nodes,
            edges: sorted,
            provenance: "explicit".into(),
        })
    }

    /// A graph with nodes and no edges.
    pub fn disconnected(nodes: Vec<SpatialObject>) -> Self {
        NGraph {
            nodes,
            edges: Vec::new(),
            provenance: "explicit".into(),
        }
    }

    fn tagged(mut self, tag: &str) -> Self {
        self.provenance = tag.into();
        self
    }

    /// The name of the constructor that built this graph.
    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn nodes(&self) -> &[SpatialObject] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &SpatialObject {
        &self.nodes[i]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Neighbor lists, ascending within each list.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.u == i || e.v == i)
            .count()
    }

    /// Connected components; nodes ascending within each, components ordered
    /// by their smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        self.connected_components(|_, _| true)
            .classes()
            .values()
            .cloned()
            .collect()
    }

    /// Partition the nodes into maximal sets connected through edges that
    /// pass the predicate (called with the edge's index and the edge).
    /// Class ids are the smallest node index in each class.
    pub fn connected_components<F>(&self, edge_pred: F) -> Partition
    where
        F: Fn(usize, &Edge) -> bool,
    {
        let n = self.nodes.len();
        let mut adj = vec![Vec::new(); n];
        for (i, e) in self.edges.iter().enumerate() {
            if edge_pred(i, e) {
                adj[e.u].push(e.v);
                adj[e.v].push(e.u);
            }
        }
        let mut class_of = vec![usize::MAX; n];
        let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for start in 0..n {
            if class_of[start] != usize::MAX {
                continue;
            }
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            class_of[start] = start;
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if class_of[v] == usize::MAX {
                        class_of[v] = start;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            classes.insert(start, comp);
        }
        Partition { class_of, classes }
    }

    /// Same topology with every node object replaced by `proc(index, node)`.
    pub fn map<F>(&self, proc: F) -> NGraph
    where
        F: Fn(usize, &SpatialObject) -> SpatialObject,
    {
        NGraph {
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(i, o)| proc(i, o))
                .collect(),
            edges: self.edges.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Induced subgraph on the nodes passing the mask. Indices are
    /// re-packed; each kept node records where it came from in a
    /// `source_index` property (kept untouched if already present, so
    /// repeated filtering preserves the original identity).
    pub fn filter<F>(&self, mask: F) -> NGraph
    where
        F: Fn(usize, &SpatialObject) -> bool,
    {
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, o) in self.nodes.iter().enumerate() {
            if mask(i, o) {
                remap[i] = nodes.len();
                let mut kept = o.clone();
                kept.props
                    .entry("source_index".to_string())
                    .or_insert_with(|| (i as i64).into());
                nodes.push(kept);
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| remap[e.u] != usize::MAX && remap[e.v] != usize::MAX)
            .map(|e| Edge {
                u: remap[e.u],
                v: remap[e.v],
                weight: e.weight,
            })
            .collect();
        NGraph {
            nodes,
            edges,
            provenance: "filter".into(),
        }
    }

    /// Order-independent fingerprint: node geometries sorted
    /// lexicographically, plus the edge set re-indexed by geometry rank.
    /// Two graphs built from permutations of the same input compare equal
    /// through this form.
    pub fn canonical_form(&self) -> (Vec<Vec<Vec<f64>>>, Vec<(usize, usize)>) {
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by(|&i, &j| cmp_geom(&self.nodes[i].geom, &self.nodes[j].geom).then(i.cmp(&j)));
        let mut rank = vec![0usize; self.nodes.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|e| {
                let (a, b) = (rank[e.u], rank[e.v]);
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        let geoms = order.iter().map(|&i| self.nodes[i].geom.clone()).collect();
        (geoms, edges)
    }

    /// All nodes within `depth` hops of `start`, including `start`.
    pub fn hop_ball(&self, start: usize, depth: usize) -> BTreeSet<usize> {
        let adj = self.adjacency();
        let mut dist = vec![usize::MAX; self.nodes.len()];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        let mut ball = BTreeSet::from([start]);
        while let Some(u) = queue.pop_front() {
            if dist[u] == depth {
                continue;
            }
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    ball.insert(v);
                    queue.push_back(v);
                }
            }
        }
        ball
    }

    /// Indices of edges whose weight stands out from their neighborhood.
    ///
    /// An edge `(u, v)` is flagged when its weight exceeds the mean plus
    /// `k_sigma` population standard deviations of the weights of nearby
    /// edges: those (other than the edge itself) with both endpoints within
    /// `depth` hops of `u` or of `v`. An edge with fewer than two nearby
    /// edges is never flagged. All edges must carry weights.
    pub fn inconsistent_edges(&self, k_sigma: f64, depth: usize) -> Result<Vec<usize>> {
        if !k_sigma.is_finite() {
            return Err(Error::Argument("k_sigma must be finite".into()));
        }
        let weights: Vec<f64> = self
            .edges
            .iter()
            .map(|e| {
                e.weight.ok_or_else(|| {
                    Error::Argument(format!(
                        "edge ({}, {}) has no weight; outlier detection needs weighted edges",
                        e.u, e.v
                    ))
                })
            })
            .collect::<Result<_>>()?;
        let mut flagged = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            let mut near: BTreeSet<usize> = self.hop_ball(e.u, depth);
            near.extend(self.hop_ball(e.v, depth));
            let nearby: Vec<f64> = self
                .edges
                .iter()
                .enumerate()
                .filter(|&(j, f)| j != i && near.contains(&f.u) && near.contains(&f.v))
                .map(|(j, _)| weights[j])
                .collect();
            if nearby.len() < 2 {
                continue;
            }
            let n = nearby.len() as f64;
            let mean = nearby.iter().sum::<f64>() / n;
            let var = nearby.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / n;
            if weights[i] > mean + k_sigma * var.sqrt() {
                flagged.push(i);
            }
        }
        Ok(flagged)
    }

    /// A copy of the graph without the edges at the given indices.
    pub fn without_edges(&self, drop: &BTreeSet<usize>) -> NGraph {
        NGraph {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .enumerate()
                .filter(|(i, _)| !drop.contains(i))
                .map(|(_, e)| e.clone())
                .collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Connect every pair the predicate accepts (all-pairs evaluation; the
    /// predicate is assumed symmetric and is called once per unordered pair
    /// with `i < j`). The predicate returns `Some(weight)` for an edge —
    /// `Some(None)` for an unweighted one — or `None` for no edge.
    pub fn from_predicate<F>(nodes: Vec<SpatialObject>, mut link: F) -> Result<Self>
    where
        F: FnMut(usize, &SpatialObject, usize, &SpatialObject) -> Option<Option<f64>>,
    {
        let mut edges = Vec::new();
        for i in 0..nodes.len() {
            for j in (i + 1)..nodes.len() {
                if let Some(weight) = link(i, &nodes[i], j, &nodes[j]) {
                    edges.push(Edge { u: i, v: j, weight });
                }
            }
        }
        Ok(NGraph::new(nodes, edges)?.tagged("predicate"))
    }

    /// 4-adjacency over every cell of a grid, nodes in row-major order.
    pub fn grid_4(field: &GridField) -> Self {
        let nodes = crate::field::field_cells(field);
        let (w, h) = (field.width(), field.height());
        let mut edges = Vec::new();
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                if c + 1 < w {
                    edges.push(Edge::new(i, i + 1));
                }
                if r + 1 < h {
                    edges.push(Edge::new(i, i + w));
                }
            }
        }
        NGraph::new(nodes, edges)
            .expect("grid adjacency is valid by construction")
            .tagged("grid-4")
    }

    /// Union of each node's `k` nearest neighbors (undirected). Distance
    /// ties are broken by the lower candidate index. Edge weights are the
    /// metric distances.
    pub fn knn(points: &PointSet, k: usize, metric: &Metric) -> Result<Self> {
        if k == 0 {
            return Err(Error::Argument("k must be at least 1".into()));
        }
        if points.is_empty() {
            return Err(Error::Empty("no points to connect".into()));
        }
        if k >= points.len() {
            return Err(Error::Argument(format!(
                "k = {} must be smaller than the number of points ({})",
                k,
                points.len()
            )));
        }
        let n = points.len();
        let nodes = point_nodes(points);
        let mut picked: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut edges = Vec::new();
        for i in 0..n {
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (metric.distance(points.point(i), points.point(j)), j))
                .collect();
            cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for &(d, j) in cand.iter().take(k) {
                if picked.insert((i.min(j), i.max(j))) {
                    edges.push(Edge::weighted(i, j, d));
                }
            }
        }
        Ok(NGraph::new(nodes, edges)?.tagged("knn"))
    }

    /// Minimum spanning tree under the metric (Kruskal). Equal-weight edges
    /// are taken in index order, so the tree is deterministic even when the
    /// minimum is not unique.
    pub fn mst(points: &PointSet, metric: &Metric) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("no points to span".into()));
        }
        let n = points.len();
        let nodes = point_nodes(points);
        let mut all: Vec<Edge> = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                all.push(Edge::weighted(
                    i,
                    j,
                    metric.distance(points.point(i), points.point(j)),
                ));
            }
        }
        all.sort_by(|a, b| {
            a.weight
                .unwrap()
                .total_cmp(&b.weight.unwrap())
                .then((a.u, a.v).cmp(&(b.u, b.v)))
        });
        let mut uf = UnionFind::new(n);
        let mut edges = Vec::with_capacity(n.saturating_sub(1));
        for e in all {
            if uf.union(e.u, e.v) {
                edges.push(e);
                if edges.len() == n - 1 {
                    break;
                }
            }
        }
        Ok(NGraph::new(nodes, edges)?.tagged("mst"))
    }

    /// Delaunay triangulation of 2-D points (Bowyer–Watson). Cocircular
    /// point groups are resolved deterministically by insertion (index)
    /// order. Fails on duplicate points and on inputs that are entirely
    /// collinear (three or more points with no triangle).
    pub fn delaunay(points: &PointSet) -> Result<Self> {
        if points.dim() != 2 {
            return Err(Error::Unsupported(
                "triangulation is only defined for 2-D points".into(),
            ));
        }
        if points.is_empty() {
            return Err(Error::Empty("no points to triangulate".into()));
        }
        let n = points.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let (p, q) = (points.point(i), points.point(j));
                if (p[0] - q[0]).abs() <= 1e-12 && (p[1] - q[1]).abs() <= 1e-12 {
                    return Err(Error::Duplicate(format!(
                        "points {i} and {j} coincide"
                    )));
                }
            }
        }
        let nodes = point_nodes(points);
        if n == 1 {
            return Ok(NGraph::disconnected(nodes).tagged("delaunay"));
        }
        if n == 2 {
            let w = euclid(points.point(0), points.point(1));
            return Ok(NGraph::new(nodes, vec![Edge::weighted(0, 1, w)])?.tagged("delaunay"));
        }
        // All-collinear inputs have no triangulation.
        let a = points.point(0);
        let b = points.point(1);
        let collinear = (2..n).all(|i| {
            let p = points.point(i);
            let c = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
            c.abs() <= 1e-12 * (euclid(a, b) * euclid(a, p)).max(1.0)
        });
        if collinear {
            return Err(Error::Degenerate("all points are collinear".into()));
        }

        // Normalize into the unit box for numerical stability.
        let (mut xmin, mut ymin) = (f64::INFINITY, f64::INFINITY);
        let (mut xmax, mut ymax) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let p = points.point(i);
            xmin = xmin.min(p[0]);
            xmax = xmax.max(p[0]);
            ymin = ymin.min(p[1]);
            ymax = ymax.max(p[1]);
        }
        let scale = (xmax - xmin).max(ymax - ymin).max(GEOM_EPS);
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let p = points.point(i);
                [(p[0] - xmin) / scale, (p[1] - ymin) / scale]
            })
            .collect();
        // Lexicographic scan triangulation: take points left to right, fan
        // each new point to every hull edge it can see, then legalize with
        // local edge flips until every interior edge passes the circle test.
        // No artificial outer vertices are involved, so hull-adjacent
        // triangles come out exact.
        let orient = |a: usize, b: usize, c: usize, pts: &[[f64; 2]]| -> f64 {
            let (pa, pb, pc) = (pts[a], pts[b], pts[c]);
            (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0])
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            pts[i]
                .partial_cmp(&pts[j])
                .expect("normalized coordinates are finite")
        });

        let mut tris: Vec<[usize; 3]> = Vec::new();
        let mut hull: Vec<usize> = Vec::new();
        let mut chain = vec![order[0], order[1]];
        let mut idx = 2;
        // Grow a collinear chain until the first point off its line, which
        // seeds the triangulation with a fan over the whole chain.
        while idx < n {
            let p = order[idx];
            idx += 1;
            if orient(chain[0], chain[1], p, &pts).abs() <= 1e-12 {
                chain.push(p);
                continue;
            }
            for w in chain.windows(2) {
                tris.push(ccw([w[0], w[1], p], &pts));
            }
            hull.extend_from_slice(&chain);
            hull.push(p);
            if orient(chain[0], *chain.last().unwrap(), p, &pts) < 0.0 {
                hull.reverse();
            }
            break;
        }
        if hull.is_empty() {
            return Err(Error::Degenerate("all points are collinear".into()));
        }

        while idx < n {
            let p = order[idx];
            idx += 1;
            let h = hull.len();
            let mut visible: Vec<bool> = (0..h)
                .map(|i| orient(hull[i], hull[(i + 1) % h], p, &pts) < -1e-12)
                .collect();
            if !visible.iter().any(|&v| v) {
                // Within tolerance of the hull boundary: accept any strictly
                // outward view rather than dropping the point.
                visible = (0..h)
                    .map(|i| orient(hull[i], hull[(i + 1) % h], p, &pts) < 0.0)
                    .collect();
            }
            let count = visible.iter().filter(|&&v| v).count();
            if count == 0 || count == h {
                return Err(Error::Degenerate(format!(
                    "point {p} is indistinguishable from the hull boundary"
                )));
            }
            // Convexity makes the visible edges one contiguous cyclic run.
            let start = (0..h)
                .find(|&i| visible[i] && !visible[(i + h - 1) % h])
                .expect("a visible run has a first edge");
            debug_assert!((0..count).all(|k| visible[(start + k) % h]));
            for k in 0..count {
                let i = (start + k) % h;
                tris.push(ccw([hull[i], hull[(i + 1) % h], p], &pts));
            }
            // Keep the arc endpoints, drop the vertices inside the arc, and
            // splice the new point in their place.
            let mut next_hull = Vec::with_capacity(h - count + 2);
            for k in count..=h {
                next_hull.push(hull[(start + k) % h]);
            }
            next_hull.push(p);
            hull = next_hull;
        }

        // Lawson legalization: flip any interior edge whose opposite vertex
        // sits strictly inside the neighboring circumcircle. Every flip
        // strictly improves the triangulation, so this terminates; the
        // budget only guards against pathological float cycling.
        let key = |a: usize, b: usize| (a.min(b), a.max(b));
        let mut alive: Vec<Option<[usize; 3]>> = tris.into_iter().map(Some).collect();
        let mut by_edge: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (t, tri) in alive.iter().enumerate() {
            let [a, b, c] = tri.unwrap();
            for (x, y) in [(a, b), (b, c), (c, a)] {
                by_edge.entry(key(x, y)).or_default().push(t);
            }
        }
        let mut queue: VecDeque<(usize, usize)> = by_edge.keys().copied().collect();
        let mut budget = 20usize.saturating_mul(n).saturating_mul(n);
        while let Some(e) = queue.pop_front() {
            let Some(users) = by_edge.get(&e) else { continue };
            let users: Vec<usize> = users
                .iter()
                .copied()
                .filter(|&t| alive[t].is_some())
                .collect();
            if users.len() != 2 || budget == 0 {
                continue;
            }
            budget -= 1;
            let (t1, t2) = (users[0], users[1]);
            let tri1 = alive[t1].unwrap();
            let tri2 = alive[t2].unwrap();
            let other = |tri: [usize; 3]| {
                tri.into_iter()
                    .find(|&v| v != e.0 && v != e.1)
                    .expect("a triangle on an edge has a third vertex")
            };
            let (c1, c2) = (other(tri1), other(tri2));
            if !in_circumcircle(tri1, pts[c2], &pts) {
                continue;
            }
            // Only flip across a strictly convex quadrilateral.
            let (a, b) = e;
            if orient(a, b, c1, &pts) * orient(a, b, c2, &pts) >= 0.0
                || orient(c1, c2, a, &pts) * orient(c1, c2, b, &pts) >= 0.0
            {
                continue;
            }
            for &t in &[t1, t2] {
                let [x, y, z] = alive[t].unwrap();
                for (u, v) in [(x, y), (y, z), (z, x)] {
                    if let Some(list) = by_edge.get_mut(&key(u, v)) {
                        list.retain(|&id| id != t);
                    }
                }
            }
            by_edge.remove(&e);
            alive[t1] = Some(ccw([a, c1, c2], &pts));
            alive[t2] = Some(ccw([b, c1, c2], &pts));
            for &t in &[t1, t2] {
                let [x, y, z] = alive[t].unwrap();
                for (u, v) in [(x, y), (y, z), (z, x)] {
                    by_edge.entry(key(u, v)).or_default().push(t);
                }
            }
            for quad_edge in [key(a, c1), key(a, c2), key(b, c1), key(b, c2), key(c1, c2)] {
                queue.push_back(quad_edge);
            }
        }

        let mut edges = Vec::new();
        let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
        for tri in alive.iter().flatten() {
            let [a, b, c] = *tri;
            for (x, y) in [(a, b), (b, c), (c, a)] {
                let pair = key(x, y);
                if seen.insert(pair) {
                    edges.push(Edge::weighted(
                        pair.0,
                        pair.1,
                        euclid(points.point(pair.0), points.point(pair.1)),
                    ));
                }
            }
        }
        Ok(NGraph::new(nodes, edges)?.tagged("delaunay"))
    }
}

/// A partition of a graph's nodes: every node maps to exactly one class,
/// and class ids are the smallest node index each class contains.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    class_of: Vec<usize>,
    classes: BTreeMap<usize, Vec<usize>>,
}

impl Partition {
    /// The class id of a node.
    pub fn class_of(&self, node: usize) -> usize {
        self.class_of[node]
    }

    /// Class id → sorted member list, ascending by id.
    pub fn classes(&self) -> &BTreeMap<usize, Vec<usize>> {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Check mutual consistency: classes cover every node exactly once and
    /// agree with the node → class map.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.class_of.len()];
        for (&id, members) in &self.classes {
            if members.first() != Some(&id) {
                return Err(Error::Contract(format!(
                    "class {id} does not start at its smallest member"
                )));
            }
            for &m in members {
                if m >= seen.len() || seen[m] {
                    return Err(Error::Contract(format!(
                        "node {m} missing or repeated across classes"
                    )));
                }
                seen[m] = true;
                if self.class_of[m] != id {
                    return Err(Error::Contract(format!(
                        "node {m} maps to class {} but sits in class {id}",
                        self.class_of[m]
                    )));
                }
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::Contract("classes do not cover all nodes".into()));
        }
        Ok(())
    }
}

fn cmp_geom(a: &[Vec<f64>], b: &[Vec<f64>]) -> std::cmp::Ordering {
    let flat = |g: &[Vec<f64>]| g.iter().flatten().copied().collect::<Vec<f64>>();
    let (fa, fb) = (flat(a), flat(b));
    for (x, y) in fa.iter().zip(&fb) {
        let o = x.total_cmp(y);
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    fa.len().cmp(&fb.len())
}

/// Wrap raw points as `Point` objects (row-major props: `index`).
fn point_nodes(points: &PointSet) -> Vec<SpatialObject> {
    (0..points.len())
        .map(|i| {
            let mut o = SpatialObject::new(ObjectKind::Point, vec![points.point(i).to_vec()])
                .with_prop("index", i as i64);
            if let Some(vals) = points.values() {
                let list: Vec<crate::object::PropValue> =
                    vals[i].iter().map(|&v| v.into()).collect();
                o = o.with_prop("value", list);
            }
            o
        })
        .collect()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Reorder a triangle counter-clockwise.
fn ccw(tri: [usize; 3], pts: &[[f64; 2]]) -> [usize; 3] {
    let [a, b, c] = tri;
    let (pa, pb, pc) = (pts[a], pts[b], pts[c]);
    let orient = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0]);
    if orient < 0.0 {
        [a, c, b]
    } else {
        [a, b, c]
    }
}

/// Strict in-circumcircle test for a counter-clockwise triangle. A
/// determinant within the guard band counts as outside, which resolves
/// cocircular configurations in favor of the existing triangulation.
fn in_circumcircle(tri: [usize; 3], d: [f64; 2], pts: &[[f64; 2]]) -> bool {
    let [a, b, c] = tri;
    let m: [[f64; 3]; 3] = [row(pts[a], d), row(pts[b], d), row(pts[c], d)];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    det > 1e-12
}

fn row(p: [f64; 2], d: [f64; 2]) -> [f64; 3] {
    let (x, y) = (p[0] - d[0], p[1] - d[1]);
    [x, y, x * x + y * y]
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

impl Serialize for NGraph {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct NodeRepr<'a> {
            id: usize,
            kind: &'a ObjectKind,
            geom: &'a Vec<Vec<f64>>,
            props: &'a Props,
        }
        let nodes: Vec<NodeRepr> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, o)| NodeRepr {
                id,
                kind: &o.kind,
                geom: &o.geom,
                props: &o.props,
            })
            .collect();
        let mut s = serializer.serialize_struct("NGraph", 2)?;
        s.serialize_field("nodes", &nodes)?;
        s.serialize_field("edges", &self.edges)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for NGraph {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct NodeRepr {
            id: usize,
            kind: ObjectKind,
            geom: Vec<Vec<f64>>,
            #[serde(default)]
            props: Props,
        }
        #[derive(Deserialize)]
        struct GraphRepr {
            nodes: Vec<NodeRepr>,
            edges: Vec<Edge>,
        }
        let raw = GraphRepr::deserialize(deserializer)?;
        for (i, node) in raw.nodes.iter().enumerate() {
            if node.id != i {
                return Err(de::Error::custom(format!(
                    "node ids must run 0..n in order; found {} at position {}",
                    node.id, i
                )));
            }
        }
        let nodes = raw
            .nodes
            .into_iter()
            .map(|n| SpatialObject {
                kind: n.kind,
                geom: n.geom,
                props: n.props,
            })
            .collect();
        NGraph::new(nodes, raw.edges).map_err(de::Error::custom)
    }
}
