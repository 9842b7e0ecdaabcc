//! Seeded random pairs and in-set points for the sampled checks.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::ConvexSet;
use crate::linalg::norm;

/// Pairs are drawn uniformly from `[-PAIR_RANGE, PAIR_RANGE]ⁿ`.
pub const PAIR_RANGE: f64 = 10.0;
pub const DEFAULT_PAIR_COUNT: usize = 10_000;

pub type Pair = (Vec<f64>, Vec<f64>);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_point<R: Rng + ?Sized>(rng: &mut R, dim: usize, half_width: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| rng.random_range(-half_width..=half_width))
        .collect()
}

/// `count` pairs uniform on `[-10, 10]^dim`, reproducible from `seed`.
pub fn sample_pairs(dim: usize, count: usize, seed: u64) -> Vec<Pair> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let x = uniform_point(&mut rng, dim, PAIR_RANGE);
            let y = uniform_point(&mut rng, dim, PAIR_RANGE);
            (x, y)
        })
        .collect()
}

/// Draws a point of `set`.
///
/// Bounded variants are sampled directly (uniform for box and ball,
/// flat Dirichlet for the simplex). Unbounded variants project a point of
/// the sampling cube, which also puts mass on the boundary.
pub fn sample_in_set<R: Rng + ?Sized>(rng: &mut R, set: &ConvexSet) -> Vec<f64> {
    match set {
        ConvexSet::Box { lower, upper } => lower
            .iter()
            .zip(upper)
            .map(|(l, u)| {
                if l == u {
                    *l
                } else {
                    rng.random_range(*l..=*u)
                }
            })
            .collect(),
        ConvexSet::Ball { center, radius } => {
            let dim = center.len();
            // Rejection from the cube keeps this free of transcendental calls.
            loop {
                let z = uniform_point(rng, dim, 1.0);
                let r = norm(&z);
                if r <= 1.0 {
                    return center
                        .iter()
                        .zip(&z)
                        .map(|(c, zi)| c + radius * zi)
                        .collect();
                }
            }
        }
        ConvexSet::Simplex { dim } => {
            let mut w: Vec<f64> = (0..*dim)
                .map(|_| -libm::log(1.0 - rng.random::<f64>()))
                .collect();
            let total: f64 = w.iter().sum();
            if total > 0.0 {
                w.iter_mut().for_each(|v| *v /= total);
            } else {
                w.iter_mut().for_each(|v| *v = 1.0 / *dim as f64);
            }
            w
        }
        ConvexSet::Halfspace { .. } | ConvexSet::AffineSubspace { .. } => {
            let x = uniform_point(rng, set.dim(), PAIR_RANGE);
            set.project_unchecked(&x)
        }
    }
}
