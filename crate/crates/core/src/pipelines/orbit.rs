//! Shape classification of 2-D point clouds sampled from dynamical
//! trajectories: build a minimum spanning tree, split it at edges that are
//! statistical outliers among their neighbors, and label the result
//! (fixed-point, closed-curve, open-curve, island-chain, or spatter) from
//! the tree's shape and the cluster structure.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Metric, PointSet};
use crate::ngraph::NGraph;
use crate::object::{ObjectKind, Props, SpatialObject};
use crate::operators::{aggregate, classify, Combiner};
use crate::rules::{ClassRules, LabelRules};

/// Points closer than this merge before any analysis.
pub const DEDUP_EPS: f64 = 1e-12;

/// Tuning knobs of the orbit classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitParams {
    /// An edge is locally inconsistent when it exceeds the nearby mean by
    /// this many nearby standard deviations.
    pub k_sigma: f64,
    /// Hop radius defining "nearby" edges for the local statistics.
    pub depth: usize,
    /// A locally inconsistent edge only separates clusters when it also
    /// exceeds this multiple of the overall mean edge weight.
    pub min_flag_ratio: f64,
    /// A path-shaped tree closes into a curve when the gap between its two
    /// extreme points is at most this multiple of the mean edge weight.
    pub closure_ratio: f64,
    /// Minimum fraction of nodes with degree ≤ 2 for a curve label.
    pub path_fraction: f64,
    /// Branching fraction (degree ≥ 3) above which a single cluster is
    /// spatter.
    pub branch_fraction: f64,
    /// Sets whose bounding box diagonal is at most this are fixed points.
    pub fp_diameter: f64,
    /// Fewer (deduplicated) points than this cannot be classified.
    pub min_points: usize,
    /// Minimum small/large cluster size ratio for an island chain.
    pub island_balance: f64,
}

impl Default for OrbitParams {
    fn default() -> Self {
        OrbitParams {
            k_sigma: 2.0,
            depth: 2,
            min_flag_ratio: 2.0,
            closure_ratio: 3.0,
            path_fraction: 0.95,
            branch_fraction: 0.05,
            fp_diameter: 1e-9,
            min_points: 8,
            island_balance: 0.25,
        }
    }
}

impl OrbitParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("k_sigma", self.k_sigma),
            ("min_flag_ratio", self.min_flag_ratio),
            ("closure_ratio", self.closure_ratio),
            ("path_fraction", self.path_fraction),
            ("branch_fraction", self.branch_fraction),
            ("fp_diameter", self.fp_diameter),
            ("island_balance", self.island_balance),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Argument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.depth == 0 {
            return Err(Error::Argument("depth must be at least 1".into()));
        }
        Ok(())
    }
}

/// Shape measurements the label rules read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitStats {
    /// Point count after deduplication.
    pub n: usize,
    /// Components after removing separator edges.
    pub cluster_count: usize,
    pub min_cluster: usize,
    pub max_cluster: usize,
    /// Bounding-box diagonal of the deduplicated points.
    pub diameter: f64,
    /// Fraction of tree nodes with degree ≤ 2.
    pub path_degree_fraction: f64,
    /// Fraction of tree nodes with degree ≥ 3.
    pub branch_degree_fraction: f64,
    /// Euclidean gap between the two extremes of the weighted tree diameter.
    pub endpoint_gap: f64,
    /// Mean weight of the non-separator edges.
    pub mean_edge: f64,
}

/// Classification result: the label, the cluster count, and whether the
/// classifier wants a denser sample before committing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitReport {
    pub label: String,
    pub clusters: usize,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub needs_more_points: bool,
}

#[derive(Serialize)]
struct OrbitDoc<'a> {
    orbit: &'a OrbitReport,
}

impl OrbitReport {
    /// Deterministic JSON document of the form `{"orbit": {...}}`.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&OrbitDoc { orbit: self })
            .expect("orbit report serializes");
        s.push('\n');
        s
    }

    pub fn summary(&self) -> String {
        let mut s = format!("orbit={} clusters={}", self.label, self.clusters);
        if self.needs_more_points {
            s.push_str(" needs_more_points=1");
        }
        s
    }
}

/// The ordered label rules. The first matching rule names the orbit; rules
/// carrying a `needs_more_points` property mark provisional verdicts.
pub fn orbit_rules(params: &OrbitParams) -> LabelRules<OrbitStats> {
    let p = *params;
    let more: Props = [("needs_more_points".to_string(), true.into())].into();
    LabelRules::new()
        .rule("fixed-point", move |s: &OrbitStats| {
            s.n == 1 || s.diameter <= p.fp_diameter
        })
        .rule_with_props("spatter", more.clone(), move |s: &OrbitStats| {
            s.n < p.min_points
        })
        .rule("island-chain", move |s: &OrbitStats| {
            s.cluster_count >= 2
                && s.min_cluster as f64 >= p.island_balance * s.max_cluster as f64
        })
        .rule_with_props("spatter", more.clone(), move |s: &OrbitStats| {
            s.cluster_count >= 2
        })
        .rule("spatter", move |s: &OrbitStats| {
            s.branch_degree_fraction > p.branch_fraction
        })
        .rule("closed-curve", move |s: &OrbitStats| {
            s.path_degree_fraction >= p.path_fraction
                && s.endpoint_gap <= p.closure_ratio * s.mean_edge
        })
        .rule("open-curve", move |s: &OrbitStats| {
            s.path_degree_fraction >= p.path_fraction
        })
        .rule_with_props("spatter", more, |_| true)
}

fn dedup(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for p in points {
        let close = kept.iter().any(|q| {
            p.iter()
                .zip(q)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                <= DEDUP_EPS
        });
        if !close {
            kept.push(p.clone());
        }
    }
    kept
}

/// Farthest node from `start` by weighted tree distance; ties go to the
/// smaller index.
fn farthest(start: usize, wadj: &[Vec<(usize, f64)>]) -> (usize, f64) {
    let mut dist = vec![f64::NEG_INFINITY; wadj.len()];
    dist[start] = 0.0;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &(v, w) in &wadj[u] {
            if dist[v] == f64::NEG_INFINITY {
                dist[v] = dist[u] + w;
                stack.push(v);
            }
        }
    }
    let mut best = (start, 0.0);
    for (i, &d) in dist.iter().enumerate() {
        if d > best.1 {
            best = (i, d);
        }
    }
    best
}

/// Measure a deduplicated point set: spanning-tree shape, separator-edge
/// clusters, and the endpoint gap of the tree diameter.
pub fn orbit_stats(points: &[Vec<f64>], params: &OrbitParams) -> Result<(OrbitStats, NGraph)> {
    let n = points.len();
    let objects: Vec<SpatialObject> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            SpatialObject::new(ObjectKind::Point, vec![p.clone()]).with_prop("index", i as i64)
        })
        .collect();
    let g = aggregate(
        objects,
        &Combiner::Mst {
            metric: Metric::Euclidean,
        },
    )?;

    let flagged: BTreeSet<usize> = g
        .inconsistent_edges(params.k_sigma, params.depth)?
        .into_iter()
        .collect();
    let weights: Vec<f64> = g
        .edges()
        .iter()
        .map(|e| e.weight.expect("tree edges are weighted"))
        .collect();
    let mean_all = if weights.is_empty() {
        0.0
    } else {
        weights.iter().sum::<f64>() / weights.len() as f64
    };
    let separators: BTreeSet<usize> = flagged
        .iter()
        .copied()
        .filter(|&i| weights[i] >= params.min_flag_ratio * mean_all)
        .collect();

    let by_pair: BTreeMap<(usize, usize), usize> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| ((e.u, e.v), i))
        .collect();
    let lp = classify(
        &g,
        |_, u, v| {
            let i = by_pair[&(u.min(v), u.max(v))];
            if separators.contains(&i) {
                1.0
            } else {
                0.0
            }
        },
        0.5,
        &ClassRules::new(),
    )?;
    let sizes: Vec<usize> = lp.classes.iter().map(|c| c.members.len()).collect();

    let adj = g.adjacency();
    let deg_le2 = adj.iter().filter(|a| a.len() <= 2).count();
    let deg_ge3 = adj.iter().filter(|a| a.len() >= 3).count();

    let mut lo = vec![f64::INFINITY; 2];
    let mut hi = vec![f64::NEG_INFINITY; 2];
    for p in points {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let diameter = ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt();

    let mut wadj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in g.edges() {
        let w = e.weight.expect("tree edges are weighted");
        wadj[e.u].push((e.v, w));
        wadj[e.v].push((e.u, w));
    }
    let (a, _) = farthest(0, &wadj);
    let (b, _) = farthest(a, &wadj);
    let endpoint_gap = points[a]
        .iter()
        .zip(&points[b])
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();

    let kept: Vec<f64> = weights
        .iter()
        .enumerate()
        .filter(|(i, _)| !separators.contains(i))
        .map(|(_, &w)| w)
        .collect();
    let mean_edge = if kept.is_empty() {
        0.0
    } else {
        kept.iter().sum::<f64>() / kept.len() as f64
    };

    Ok((
        OrbitStats {
            n,
            cluster_count: lp.classes.len(),
            min_cluster: sizes.iter().copied().min().unwrap_or(0),
            max_cluster: sizes.iter().copied().max().unwrap_or(0),
            diameter,
            path_degree_fraction: deg_le2 as f64 / n as f64,
            branch_degree_fraction: deg_ge3 as f64 / n as f64,
            endpoint_gap,
            mean_edge,
        },
        g,
    ))
}

/// Classify a 2-D point set by the shape of its trajectory sample.
pub fn classify_orbit(points: &PointSet, params: &OrbitParams) -> Result<OrbitReport> {
    params.validate()?;
    if points.is_empty() {
        return Err(Error::Empty("orbit classification needs points".into()));
    }
    if points.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "orbit classification is 2-D only, got dimension {}",
            points.dim()
        )));
    }
    let deduped = dedup(points.points());
    let (stats, _) = orbit_stats(&deduped, params)?;
    let rules = orbit_rules(params);
    let rule = rules
        .first_match(&stats)
        .expect("the orbit rule list ends with a catch-all");
    Ok(OrbitReport {
        label: rule.name().to_string(),
        clusters: stats.cluster_count,
        needs_more_points: rule
            .props()
            .get("needs_more_points")
            .and_then(|p| p.as_bool())
            .unwrap_or(false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: Vec<[f64; 2]>) -> PointSet {
        PointSet::new(v.into_iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    fn circle(n: usize, r: f64) -> PointSet {
        pts((0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                let rr = r * (1.0 + 0.005 * (9.0 * t).sin());
                [rr * t.cos(), rr * t.sin()]
            })
            .collect())
    }

    #[test]
    fn single_point_is_a_fixed_point() {
        let report = classify_orbit(&pts(vec![[3.0, 4.0]]), &OrbitParams::default()).unwrap();
        assert_eq!(report.label, "fixed-point");
        assert_eq!(report.clusters, 1);
        assert!(!report.needs_more_points);
    }

    #[test]
    fn exact_duplicates_collapse_to_a_fixed_point() {
        let report = classify_orbit(
            &pts(vec![[1.0, 2.0]; 40]),
            &OrbitParams::default(),
        )
        .unwrap();
        assert_eq!(report.label, "fixed-point");
    }

    #[test]
    fn a_jittered_circle_is_a_closed_curve() {
        let report = classify_orbit(&circle(200, 5.0), &OrbitParams::default()).unwrap();
        assert_eq!(report.label, "closed-curve");
        assert_eq!(report.clusters, 1);
    }

    #[test]
    fn a_line_is_an_open_curve() {
        let line = pts((0..60)
            .map(|i| [i as f64 * 0.1, 0.02 * (i as f64).sin()])
            .collect());
        let report = classify_orbit(&line, &OrbitParams::default()).unwrap();
        assert_eq!(report.label, "open-curve");
        assert_eq!(report.clusters, 1);
    }

    #[test]
    fn three_blobs_are_an_island_chain() {
        let mut v = Vec::new();
        for cx in [0.0, 10.0, 20.0] {
            for i in 0..5 {
                for j in 0..5 {
                    v.push([cx + 0.1 * i as f64, 0.1 * j as f64]);
                }
            }
        }
        let report = classify_orbit(&pts(v.clone()), &OrbitParams::default()).unwrap();
        assert_eq!(report.label, "island-chain");
        assert_eq!(report.clusters, 3);

        // The two bridges between blobs are the only separator edges.
        let deduped = dedup(&v.iter().map(|p| p.to_vec()).collect::<Vec<_>>());
        let (stats, g) = orbit_stats(&deduped, &OrbitParams::default()).unwrap();
        assert_eq!(stats.cluster_count, 3);
        let long: usize = g
            .edges()
            .iter()
            .filter(|e| e.weight.unwrap() > 2.0)
            .count();
        assert_eq!(long, 2);
    }

    #[test]
    fn a_tiny_sample_asks_for_more_points() {
        let report = classify_orbit(
            &pts(vec![[0.0, 0.0], [3.0, 1.0], [7.0, 5.0], [2.0, 8.0]]),
            &OrbitParams::default(),
        )
        .unwrap();
        assert_eq!(report.label, "spatter");
        assert!(report.needs_more_points);
    }

    #[test]
    fn empty_and_non_planar_inputs_are_rejected() {
        // Empty input is already refused at point-set construction.
        assert!(matches!(PointSet::new(Vec::new()), Err(Error::Empty(_))));
        let cube = PointSet::new(vec![vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]]).unwrap();
        assert!(matches!(
            classify_orbit(&cube, &OrbitParams::default()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn report_json_shape() {
        let report = classify_orbit(&circle(120, 3.0), &OrbitParams::default()).unwrap();
        let json = report.to_json();
        assert!(json.contains("\"orbit\""));
        assert!(json.contains("\"label\": \"closed-curve\""));
        assert!(!json.contains("needs_more_points"));
        assert_eq!(report.summary(), "orbit=closed-curve clusters=1");
    }

    #[test]
    fn labels_survive_rigid_motion_and_scaling() {
        let base = circle(150, 2.0);
        let (s, c) = (0.7f64.sin(), 0.7f64.cos());
        let moved = pts(base
            .points()
            .iter()
            .map(|p| {
                let (x, y) = (p[0] * 3.5, p[1] * 3.5);
                [c * x - s * y + 11.0, s * x + c * y - 4.0]
            })
            .collect());
        let a = classify_orbit(&base, &OrbitParams::default()).unwrap();
        let b = classify_orbit(&moved, &OrbitParams::default()).unwrap();
        assert_eq!(a.label, b.label);
        assert_eq!(a.clusters, b.clusters);
    }
}
