//! The generic structural operators applied identically at every abstraction
//! layer: build a neighborhood graph (`aggregate`), partition and label it
//! (`classify`), lift classes to higher-level objects (`redescribe`),
//! enumerate members (`localize`), traverse (`search`), probe perturbations
//! (`incremental_analyze`), and check consistency (`consistent`,
//! `pairwise_consistent`).
//!
//! [`LayerSpec`] packages one layer's parameters for these operators and
//! [`run_layer`] executes the fixed aggregate → classify → redescribe
//! sequence, so multi-layer pipelines differ in parameters only.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Metric, PointSet};
use crate::geometry::polyline_self_intersects;
use crate::ngraph::{Edge, NGraph};
use crate::object::{ObjectKind, Props, SpatialObject};
use crate::rules::{ClassRules, ClassView, PairRules, RuleSet};

/// One labeled equivalence class: id (the smallest member node index),
/// semantic label, sorted members, and label-specific properties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledClass {
    pub id: usize,
    pub label: String,
    pub members: Vec<usize>,
    #[serde(default)]
    pub props: Props,
}

/// A classified partition of a graph's nodes, ordered by class id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPartition {
    pub classes: Vec<LabeledClass>,
}

impl LabeledPartition {
    /// The class containing a node, if any.
    pub fn class_of(&self, node: usize) -> Option<&LabeledClass> {
        self.classes
            .iter()
            .find(|c| c.members.binary_search(&node).is_ok())
    }

    /// The subset of classes passing the filter, order preserved.
    pub fn retain(&self, keep: impl Fn(&LabeledClass) -> bool) -> LabeledPartition {
        LabeledPartition {
            classes: self.classes.iter().filter(|c| keep(c)).cloned().collect(),
        }
    }

    /// Check the partition covers nodes `0..n` exactly once, each class led
    /// by its smallest member.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for class in &self.classes {
            if class.members.first() != Some(&class.id) {
                return Err(Error::Contract(format!(
                    "class {} does not start at its smallest member",
                    class.id
                )));
            }
            for &m in &class.members {
                if m >= n || seen[m] {
                    return Err(Error::Contract(format!(
                        "node {m} missing or repeated across classes"
                    )));
                }
                seen[m] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::Contract("classes do not cover all nodes".into()));
        }
        Ok(())
    }
}

type LinkFn =
    Box<dyn Fn(usize, &SpatialObject, usize, &SpatialObject) -> Option<Option<f64>> + Send + Sync>;

/// Graph-building strategy for [`aggregate`].
pub enum Combiner {
    /// All-pairs symmetric predicate; `Some(weight)` links a pair.
    Predicate { name: String, link: LinkFn },
    /// 4-adjacency over row-major grid cells of the given dimensions.
    Grid4 { width: usize, height: usize },
    /// Union of each node's k nearest neighbors.
    Knn { k: usize, metric: Metric },
    /// Minimum spanning tree under the metric.
    Mst { metric: Metric },
    /// 2-D Delaunay triangulation.
    Delaunay,
}

impl Combiner {
    /// Look up a point-set strategy by name (`mst`, `knn`, `delaunay`).
    pub fn named(name: &str, metric: Metric, k: usize) -> Result<Combiner> {
        match name {
            "mst" => Ok(Combiner::Mst { metric }),
            "knn" => Ok(Combiner::Knn { k, metric }),
            "delaunay" => Ok(Combiner::Delaunay),
            _ => Err(Error::Config(format!(
                "unknown graph construction strategy {name:?}"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Combiner::Predicate { name, .. } => name,
            Combiner::Grid4 { .. } => "grid-4",
            Combiner::Knn { .. } => "knn",
            Combiner::Mst { .. } => "mst",
            Combiner::Delaunay => "delaunay",
        }
    }
}

impl fmt::Debug for Combiner {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "Combiner({})", self.name())
    }
}

/// Assemble objects into a neighborhood graph using the chosen strategy.
/// The given objects become the graph's nodes unchanged; point-based
/// strategies read each object's first geometry point as its location.
/// An empty object list yields an empty graph under any strategy.
pub fn aggregate(objects: Vec<SpatialObject>, combiner: &Combiner) -> Result<NGraph> {
    if objects.is_empty() {
        return Ok(NGraph::disconnected(Vec::new()));
    }
    match combiner {
        Combiner::Predicate { link, .. } => {
            NGraph::from_predicate(objects, |i, a, j, b| link(i, a, j, b))
        }
        Combiner::Grid4 { width, height } => {
            if objects.len() != width * height {
                return Err(Error::Argument(format!(
                    "grid adjacency over {}x{} needs {} cells, got {}",
                    width,
                    height,
                    width * height,
                    objects.len()
                )));
            }
            let (w, h) = (*width, *height);
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
            NGraph::new(objects, edges)
        }
        Combiner::Knn { k, metric } => {
            let edges = NGraph::knn(&locations(&objects)?, *k, metric)?
                .edges()
                .to_vec();
            NGraph::new(objects, edges)
        }
        Combiner::Mst { metric } => {
            let edges = NGraph::mst(&locations(&objects)?, metric)?.edges().to_vec();
            NGraph::new(objects, edges)
        }
        Combiner::Delaunay => {
            let edges = NGraph::delaunay(&locations(&objects)?)?.edges().to_vec();
            NGraph::new(objects, edges)
        }
    }
}

fn locations(objects: &[SpatialObject]) -> Result<PointSet> {
    let pts = objects
        .iter()
        .enumerate()
        .map(|(i, o)| {
            o.geom.first().cloned().ok_or_else(|| {
                Error::Argument(format!("object {i} has no location geometry"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PointSet::new(pts)
}

/// Partition a graph into labeled equivalence classes.
///
/// `cluster_proc` assigns each edge a dissimilarity ≥ 0; classes are the
/// connected components over edges with dissimilarity ≤ `threshold`. Each
/// class gets the name (and properties) of the first matching rule, or
/// `"unclassified"` when none matches.
pub fn classify<F>(
    g: &NGraph,
    cluster_proc: F,
    threshold: f64,
    class_rules: &ClassRules,
) -> Result<LabeledPartition>
where
    F: Fn(&NGraph, usize, usize) -> f64,
{
    let mut keep = vec![false; g.edges().len()];
    for (i, e) in g.edges().iter().enumerate() {
        let d = cluster_proc(g, e.u, e.v);
        if !(d >= 0.0) {
            return Err(Error::Contract(format!(
                "dissimilarity for edge ({}, {}) is {d}; expected a value ≥ 0",
                e.u, e.v
            )));
        }
        keep[i] = d <= threshold;
    }
    let part = g.connected_components(|i, _| keep[i]);
    let mut classes = Vec::new();
    for (&id, members) in part.classes() {
        let view = ClassView {
            graph: g,
            members: members.as_slice(),
        };
        let (label, props) = match class_rules.first_match(&view) {
            Some(rule) => (rule.name().to_string(), rule.props().clone()),
            None => ("unclassified".to_string(), Props::new()),
        };
        classes.push(LabeledClass {
            id,
            label,
            members: members.clone(),
            props,
        });
    }
    Ok(LabeledPartition { classes })
}

/// A registered class-to-object constructor for one label.
pub type DescType = Box<dyn Fn(&LabeledClass, &NGraph) -> Result<SpatialObject> + Send + Sync>;

/// Label → constructor registry used by [`redescribe`].
pub type DescTypes = BTreeMap<String, DescType>;

/// Lift every class to a higher-level object via the constructor registered
/// for its label. A label with no registered constructor is a
/// configuration error.
pub fn redescribe(
    lp: &LabeledPartition,
    g: &NGraph,
    desc_types: &DescTypes,
) -> Result<Vec<SpatialObject>> {
    lp.classes
        .iter()
        .map(|class| {
            let construct = desc_types.get(&class.label).ok_or_else(|| {
                Error::Config(format!(
                    "no redescription registered for label {:?}",
                    class.label
                ))
            })?;
            construct(class, g)
        })
        .collect()
}

/// Node enumeration order for [`localize`].
#[derive(Debug, Clone, PartialEq)]
pub enum Enumerate {
    /// Ascending node index.
    ByIndex,
    /// An explicit order; must list each node at most once.
    Explicit(Vec<usize>),
}

/// Enumerate a graph's nodes in the given order, keeping those the selector
/// accepts, as owned objects.
pub fn localize<F>(g: &NGraph, select: F, order: &Enumerate) -> Result<Vec<SpatialObject>>
where
    F: Fn(usize, &SpatialObject) -> bool,
{
    Ok(localize_ids(g, select, order)?
        .into_iter()
        .map(|i| g.node(i).clone())
        .collect())
}

/// Like [`localize`], returning node indices instead of objects.
pub fn localize_ids<F>(g: &NGraph, select: F, order: &Enumerate) -> Result<Vec<usize>>
where
    F: Fn(usize, &SpatialObject) -> bool,
{
    let sequence: Vec<usize> = match order {
        Enumerate::ByIndex => (0..g.len()).collect(),
        Enumerate::Explicit(seq) => {
            let mut seen = vec![false; g.len()];
            for &i in seq {
                if i >= g.len() {
                    return Err(Error::Contract(format!(
                        "enumeration yields node {i}, graph has {}",
                        g.len()
                    )));
                }
                if seen[i] {
                    return Err(Error::Contract(format!(
                        "enumeration yields node {i} more than once"
                    )));
                }
                seen[i] = true;
            }
            seq.clone()
        }
    };
    Ok(sequence
        .into_iter()
        .filter(|&i| select(i, g.node(i)))
        .collect())
}

/// A walk through a graph: consecutive nodes are adjacent, no node repeats.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub cost: f64,
}

/// Frontier discipline for [`search`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frontier {
    /// Breadth-first: shortest path by edge count per reachable goal.
    Fifo,
    /// Depth-first: a path per reachable goal, no optimality guarantee.
    Lifo,
    /// Weight-ordered: minimum total edge weight per reachable goal.
    Priority,
}

/// Find one path from the initial set to every reachable goal node,
/// returned in ascending goal-node order. Ties are broken by node index
/// throughout, so results are deterministic. Unreachable goals are simply
/// absent; no reachable goal yields an empty list.
pub fn search<F>(
    g: &NGraph,
    initial: &[usize],
    goal: F,
    frontier: Frontier,
) -> Result<Vec<Path>>
where
    F: Fn(usize, &SpatialObject) -> bool,
{
    if initial.is_empty() {
        return Err(Error::Argument("search needs at least one initial node".into()));
    }
    for &s in initial {
        if s >= g.len() {
            return Err(Error::Argument(format!(
                "initial node {s} out of range (graph has {})",
                g.len()
            )));
        }
    }
    let mut starts: Vec<usize> = initial.to_vec();
    starts.sort_unstable();
    starts.dedup();
    let adj = g.adjacency();

    match frontier {
        Frontier::Fifo => {
            let mut dist: Vec<Option<usize>> = vec![None; g.len()];
            let mut queue = std::collections::VecDeque::new();
            for &s in &starts {
                dist[s] = Some(0);
                queue.push_back(s);
            }
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if dist[v].is_none() {
                        dist[v] = Some(dist[u].unwrap() + 1);
                        queue.push_back(v);
                    }
                }
            }
            let mut out = Vec::new();
            for v in 0..g.len() {
                let Some(dv) = dist[v] else { continue };
                if !goal(v, g.node(v)) {
                    continue;
                }
                // Walk back choosing the smallest predecessor each step.
                let mut path = vec![v];
                let mut cur = v;
                let mut left = dv;
                while left > 0 {
                    let prev = adj[cur]
                        .iter()
                        .copied()
                        .find(|&u| dist[u] == Some(left - 1))
                        .expect("a node at distance d has a neighbor at d-1");
                    path.push(prev);
                    cur = prev;
                    left -= 1;
                }
                path.reverse();
                out.push(Path {
                    nodes: path,
                    cost: dv as f64,
                });
            }
            Ok(out)
        }
        Frontier::Lifo => {
            let mut parent: Vec<Option<usize>> = vec![None; g.len()];
            let mut visited = vec![false; g.len()];
            for &s in &starts {
                if visited[s] {
                    continue;
                }
                let mut stack = vec![s];
                visited[s] = true;
                while let Some(u) = stack.pop() {
                    // Reverse push so the smallest neighbor is explored first.
                    for &v in adj[u].iter().rev() {
                        if !visited[v] {
                            visited[v] = true;
                            parent[v] = Some(u);
                            stack.push(v);
                        }
                    }
                }
            }
            let mut out = Vec::new();
            for v in 0..g.len() {
                if !visited[v] || !goal(v, g.node(v)) {
                    continue;
                }
                let mut path = vec![v];
                let mut cur = v;
                while let Some(p) = parent[cur] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                out.push(Path {
                    cost: (path.len() - 1) as f64,
                    nodes: path,
                });
            }
            Ok(out)
        }
        Frontier::Priority => {
            let mut wadj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); g.len()];
            for e in g.edges() {
                let w = e.weight.ok_or_else(|| {
                    Error::Argument(format!(
                        "priority search needs edge weights; edge ({}, {}) has none",
                        e.u, e.v
                    ))
                })?;
                wadj[e.u].push((e.v, w));
                wadj[e.v].push((e.u, w));
            }
            for list in &mut wadj {
                list.sort_by(|a, b| a.0.cmp(&b.0));
            }
            let mut dist = vec![f64::INFINITY; g.len()];
            let mut heap: BinaryHeap<Reverse<(OrdF64, usize)>> = BinaryHeap::new();
            for &s in &starts {
                dist[s] = 0.0;
                heap.push(Reverse((OrdF64(0.0), s)));
            }
            while let Some(Reverse((OrdF64(d), u))) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &(v, w) in &wadj[u] {
                    let nd = d + w;
                    if nd < dist[v] {
                        dist[v] = nd;
                        heap.push(Reverse((OrdF64(nd), v)));
                    }
                }
            }
            let mut out = Vec::new();
            for v in 0..g.len() {
                if dist[v].is_infinite() || !goal(v, g.node(v)) {
                    continue;
                }
                // Walk back along tight edges, smallest predecessor first.
                let mut path = vec![v];
                let mut cur = v;
                while dist[cur] > 0.0 {
                    let tol = 1e-9 * (1.0 + dist[cur].abs());
                    let prev = wadj[cur]
                        .iter()
                        .find(|&&(u, w)| (dist[u] + w - dist[cur]).abs() <= tol)
                        .map(|&(u, _)| u)
                        .expect("a settled node has a tight incoming edge");
                    path.push(prev);
                    cur = prev;
                }
                path.reverse();
                out.push(Path {
                    nodes: path,
                    cost: dist[v],
                });
            }
            Ok(out)
        }
    }
}

#[derive(PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Where a perturbed state landed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transition {
    pub from: usize,
    pub to: Option<usize>,
    pub changed: bool,
}

/// Report how a small perturbation moves a state between node extents: find
/// the node containing the state's location, shift the location by `delta`,
/// and find the node containing the result (lowest index wins when extents
/// overlap). A start location inside no node is a containment error; an end
/// location inside no node reports `to: None`.
pub fn incremental_analyze(
    g: &NGraph,
    state: &SpatialObject,
    delta: [f64; 2],
) -> Result<Transition> {
    let loc = state
        .point2(0)
        .ok_or_else(|| Error::Argument("state carries no 2-D location".into()))?;
    let from = (0..g.len())
        .find(|&i| g.node(i).contains_point(loc))
        .ok_or_else(|| {
            Error::Containment(format!(
                "location ({}, {}) lies in no node's extent",
                loc[0], loc[1]
            ))
        })?;
    let moved = [loc[0] + delta[0], loc[1] + delta[1]];
    let to = (0..g.len()).find(|&i| g.node(i).contains_point(moved));
    Ok(Transition {
        from,
        to,
        changed: to != Some(from),
    })
}

/// Test an object against consistency rules: the first applicable rule's
/// verdict decides; an object no rule applies to is vacuously consistent.
pub fn consistent(obj: &SpatialObject, rules: &RuleSet<SpatialObject>) -> bool {
    rules.first_verdict(obj).unwrap_or(true)
}

/// Test an ordered pair of objects: conjunction of every applicable pair
/// rule; vacuously true when none applies.
pub fn pairwise_consistent(
    a: &SpatialObject,
    b: &SpatialObject,
    rules: &PairRules<SpatialObject>,
) -> bool {
    rules.all_hold(a, b)
}

/// The built-in contour consistency rule: a contour is legal iff it is
/// closed and its point chain does not self-intersect.
pub fn contour_rules() -> RuleSet<SpatialObject> {
    RuleSet::new().rule(
        "legal-contour",
        |o: &SpatialObject| o.kind == ObjectKind::Contour,
        |o| {
            let closed = o
                .prop("closed")
                .and_then(|p| p.as_bool())
                .unwrap_or(false);
            if !closed {
                return false;
            }
            match o.points2() {
                Some(pts) if pts.len() >= 3 => !polyline_self_intersects(&pts, true),
                _ => false,
            }
        },
    )
}

/// Everything one abstraction layer needs: a graph-building strategy, the
/// classification parameters, a class filter, and the per-label
/// redescription constructors.
pub struct LayerSpec {
    pub name: String,
    pub combiner: Combiner,
    pub cluster_proc: Box<dyn Fn(&NGraph, usize, usize) -> f64 + Send + Sync>,
    pub threshold: f64,
    pub class_rules: ClassRules,
    pub keep: Box<dyn Fn(&LabeledClass) -> bool + Send + Sync>,
    pub desc_types: DescTypes,
}

impl fmt::Debug for LayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.debug_struct("LayerSpec")
            .field("name", &self.name)
            .field("combiner", &self.combiner.name())
            .field("threshold", &self.threshold)
            .finish()
    }
}

/// Every intermediate result of one layer run.
#[derive(Debug)]
pub struct LayerTrace {
    pub graph: NGraph,
    pub partition: LabeledPartition,
    pub kept: LabeledPartition,
    pub objects: Vec<SpatialObject>,
}

/// The operator sequence every layer runs, in order.
pub const LAYER_OPERATORS: [&str; 3] = ["aggregate", "classify", "redescribe"];

/// Run one layer: aggregate the input objects, classify the graph, keep the
/// classes the layer cares about, and redescribe them as next-layer
/// objects. This is the only execution path layers use, so all layers share
/// the operator sequence in [`LAYER_OPERATORS`] and differ in parameters
/// only.
pub fn run_layer(objects: Vec<SpatialObject>, spec: &LayerSpec) -> Result<LayerTrace> {
    let graph = aggregate(objects, &spec.combiner)?;
    let partition = classify(
        &graph,
        |g, u, v| (spec.cluster_proc)(g, u, v),
        spec.threshold,
        &spec.class_rules,
    )?;
    let kept = partition.retain(|c| (spec.keep)(c));
    let objects = redescribe(&kept, &graph, &spec.desc_types)?;
    Ok(LayerTrace {
        graph,
        partition,
        kept,
        objects,
    })
}
