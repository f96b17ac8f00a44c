//! Property-based checks over randomly generated inputs: structural
//! invariants that must hold for every input, not just the seeded cases the
//! acceptance gate replays.

use std::collections::BTreeSet;

use proptest::prelude::*;

use spag_core::{
    classify, classify_orbit, load_grid_text, trace_boundaries, ClassRules, Edge, GridField,
    Metric, NGraph, ObjectKind, OrbitParams, PointSet, SpatialObject, TracerParams,
};

fn pset(pts: &[(f64, f64)]) -> PointSet {
    PointSet::new(pts.iter().map(|&(x, y)| vec![x, y]).collect()).unwrap()
}

/// Distinct points drawn on a half-unit lattice so duplicates are easy to
/// filter out deterministically.
fn distinct_points(max_len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((-50i32..50, -50i32..50), 1..max_len).prop_map(|raw| {
        let mut seen = BTreeSet::new();
        raw.into_iter()
            .filter(|&p| seen.insert(p))
            .map(|(x, y)| (x as f64 / 2.0, y as f64 / 2.0))
            .collect()
    })
}

proptest! {
    // Metric axioms: identity, symmetry, non-negativity, triangle inequality.
    #[test]
    fn metric_axioms(
        a in (-1e3f64..1e3, -1e3f64..1e3),
        b in (-1e3f64..1e3, -1e3f64..1e3),
        c in (-1e3f64..1e3, -1e3f64..1e3),
        which in 0usize..3,
    ) {
        let metric = match which {
            0 => Metric::Euclidean,
            1 => Metric::Manhattan,
            _ => Metric::Chebyshev,
        };
        let d = |p: (f64, f64), q: (f64, f64)| metric.distance(&[p.0, p.1], &[q.0, q.1]);
        prop_assert!(d(a, a).abs() <= 1e-12);
        prop_assert!((d(a, b) - d(b, a)).abs() <= 1e-12);
        prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-9);
        prop_assert!(d(a, b) >= 0.0);
    }

    // A spanning tree: n-1 edges and a single component.
    #[test]
    fn mst_is_spanning_tree(pts in distinct_points(40)) {
        let g = NGraph::mst(&pset(&pts), &Metric::Euclidean).unwrap();
        let n = pts.len();
        prop_assert_eq!(g.edges().len(), n.saturating_sub(1));
        prop_assert_eq!(g.components().len(), 1);
    }

    // Every node of a k-nearest graph keeps degree >= k.
    #[test]
    fn knn_degree_lower_bound(pts in distinct_points(30), k in 1usize..5) {
        let n = pts.len();
        prop_assume!(n > k);
        let g = NGraph::knn(&pset(&pts), k, &Metric::Euclidean).unwrap();
        let mut degree = vec![0usize; n];
        for e in g.edges() {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        for (i, &deg) in degree.iter().enumerate() {
            prop_assert!(deg >= k, "node {} has degree {} below {}", i, deg, k);
        }
    }

    // Raising the threshold can only merge classes, never split them.
    #[test]
    fn classification_threshold_is_monotone(
        weights in proptest::collection::vec(0.0f64..1.0, 1..60),
        lo in 0.0f64..1.0,
        hi in 0.0f64..1.0,
    ) {
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        // A path graph carrying the weights in order.
        let n = weights.len() + 1;
        let nodes: Vec<SpatialObject> = (0..n)
            .map(|i| SpatialObject::new(ObjectKind::Point, vec![vec![i as f64, 0.0]]))
            .collect();
        let edges: Vec<Edge> = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| Edge::weighted(i, i + 1, w))
            .collect();
        let g = NGraph::new(nodes, edges).unwrap();
        let rules = ClassRules::new();
        let by_weight = |g2: &NGraph, u: usize, v: usize| {
            let key = (u.min(v), u.max(v));
            g2.edges()
                .iter()
                .find(|e| (e.u, e.v) == key)
                .and_then(|e| e.weight)
                .unwrap()
        };
        let fine = classify(&g, by_weight, lo, &rules).unwrap();
        let coarse = classify(&g, by_weight, hi, &rules).unwrap();
        fine.validate(n).unwrap();
        coarse.validate(n).unwrap();
        prop_assert!(coarse.classes.len() <= fine.classes.len());
        for class in &fine.classes {
            let targets: BTreeSet<usize> = class
                .members
                .iter()
                .map(|&m| coarse.class_of(m).unwrap().id)
                .collect();
            prop_assert_eq!(targets.len(), 1, "a class split when the threshold rose");
        }
    }

    // Tracing a mirrored bitmap yields mirrored pixels with identical
    // structural counts.
    #[test]
    fn tracer_mirror_invariance(seed in 0u64..200) {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (w, h) = (10usize, 8usize);
        let values: Vec<f64> = (0..w * h)
            .map(|_| if rng.random::<f64>() < 0.3 { 1.0 } else { 0.0 })
            .collect();
        let grid = GridField::new(w, h, 1, values.clone()).unwrap();
        let mirrored = GridField::new(
            w,
            h,
            1,
            (0..h)
                .flat_map(|r| (0..w).map(move |c| r * w + (w - 1 - c)))
                .map(|i| values[i])
                .collect(),
        )
        .unwrap();
        let params = TracerParams::default();
        let a = trace_boundaries(&grid, &params).unwrap();
        let b = trace_boundaries(&mirrored, &params).unwrap();
        prop_assert_eq!(a.segments.len(), b.segments.len());
        prop_assert_eq!(a.junctions.len(), b.junctions.len());
        prop_assert_eq!(a.contours.len(), b.contours.len());
        prop_assert_eq!(a.accounted_pixels(), b.accounted_pixels());
        let a_sets: BTreeSet<BTreeSet<(i64, i64)>> = a
            .segments
            .iter()
            .map(|s| s.pixels.iter().map(|p| (p[0], w as i64 - 1 - p[1])).collect())
            .collect();
        let b_sets: BTreeSet<BTreeSet<(i64, i64)>> = b
            .segments
            .iter()
            .map(|s| s.pixels.iter().map(|p| (p[0], p[1])).collect())
            .collect();
        prop_assert_eq!(a_sets, b_sets);
    }

    // Sub-resolution duplicate copies never change an orbit verdict.
    #[test]
    fn orbit_ignores_subresolution_duplicates(
        seed in 0u64..100,
        copies in 1usize..4,
    ) {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9_000 + seed);
        let m = 40;
        let r = 2.0;
        let base: Vec<(f64, f64)> = (0..m)
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / m as f64;
                (r * t.cos(), r * t.sin())
            })
            .collect();
        let mut noisy = base.clone();
        for _ in 0..copies {
            let pick = rng.random_range(0..m);
            let (x, y) = base[pick];
            noisy.push((
                x + 1e-13 * (rng.random::<f64>() - 0.5),
                y + 1e-13 * (rng.random::<f64>() - 0.5),
            ));
        }
        let params = OrbitParams::default();
        let clean = classify_orbit(&pset(&base), &params).unwrap();
        let dup = classify_orbit(&pset(&noisy), &params).unwrap();
        prop_assert_eq!(&clean.label, &dup.label);
        prop_assert_eq!(clean.clusters, dup.clusters);
    }
}

#[test]
fn grid_text_roundtrip_preserves_trace() {
    let text = "0 0 0 0 0\n0 1 1 1 0\n0 1 0 1 0\n0 1 1 1 0\n0 0 0 0 0\n";
    let grid = load_grid_text(text).unwrap();
    let emitted = spag_core::emit_grid_text(&grid).unwrap();
    let again = load_grid_text(&emitted).unwrap();
    let params = TracerParams::default();
    assert_eq!(
        trace_boundaries(&grid, &params).unwrap().to_json(),
        trace_boundaries(&again, &params).unwrap().to_json()
    );
}
