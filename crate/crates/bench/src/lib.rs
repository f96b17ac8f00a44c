//! Seeded input generators for the benchmarks: point clouds, circle
//! samples, and random binary grids. Everything is deterministic in the
//! seed so runs are comparable across machines and commits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spag_core::{GridField, PointSet};

/// `n` points drawn uniformly from the `[0, 100)` square.
pub fn point_cloud(n: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| vec![rng.random::<f64>() * 100.0, rng.random::<f64>() * 100.0])
        .collect();
    PointSet::new(points).expect("generated cloud is valid")
}

/// `n` points around a radius-10 circle with small angular and radial
/// jitter, in sampling order.
pub fn circle_sample(n: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = std::f64::consts::TAU / n as f64;
    let points = (0..n)
        .map(|i| {
            let theta = i as f64 * step + (rng.random::<f64>() - 0.5) * 0.2 * step;
            let r = 10.0 * (1.0 + (rng.random::<f64>() - 0.5) * 0.01);
            vec![r * theta.cos(), r * theta.sin()]
        })
        .collect();
    PointSet::new(points).expect("generated sample is valid")
}

/// A `width` x `height` binary grid where each cell is foreground with
/// probability `fill`.
pub fn random_grid(width: usize, height: usize, fill: f64, seed: u64) -> GridField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..width * height)
        .map(|_| if rng.random::<f64>() < fill { 1.0 } else { 0.0 })
        .collect();
    GridField::new(width, height, 1, values).expect("generated grid is valid")
}

/// A `width` x `height` single-channel grid of uniform noise in `[0, 1)`.
pub fn noise_grid(width: usize, height: usize, seed: u64) -> GridField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..width * height).map(|_| rng.random::<f64>()).collect();
    GridField::new(width, height, 1, values).expect("generated grid is valid")
}
