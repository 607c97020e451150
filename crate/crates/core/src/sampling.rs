//! Deterministic sample generators shared by the checking modules.
//!
//! Everything is a pure function of its arguments; randomness always flows
//! through an explicit seed so reruns are byte-identical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tensor grid over an axis-aligned box, `points` nodes per dimension,
/// endpoints included, lexicographic node order.
pub fn grid_points(box_bounds: &[[f64; 2]], points: usize) -> Vec<Vec<f64>> {
    assert!(points >= 1);
    let n = box_bounds.len();
    let axis: Vec<Vec<f64>> = box_bounds
        .iter()
        .map(|b| linspace(b[0], b[1], points))
        .collect();
    let total = points.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        out.push((0..n).map(|d| axis[d][idx[d]]).collect());
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < points {
                break;
            }
            idx[d] = 0;
        }
    }
    out
}

pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![(lo + hi) / 2.0];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Seeded uniform samples in a box.
pub fn random_points(box_bounds: &[[f64; 2]], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            box_bounds
                .iter()
                .map(|b| rng.gen_range(b[0]..=b[1]))
                .collect()
        })
        .collect()
}

/// Deterministic points on the sphere `|x| = radius`.
///
/// 1-d: the two endpoints; 2-d: uniform angles; 3-d: a Fibonacci spiral;
/// higher dimensions: seeded Gaussian directions, normalized.
pub fn sphere_points(n: usize, radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(n >= 1 && count >= 1);
    match n {
        1 => vec![vec![-radius], vec![radius]],
        2 => (0..count)
            .map(|i| {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                vec![radius * theta.cos(), radius * theta.sin()]
            })
            .collect(),
        3 => {
            let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
            (0..count)
                .map(|i| {
                    let t = (i as f64 + 0.5) / count as f64;
                    let z = 1.0 - 2.0 * t;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = 2.0 * std::f64::consts::PI * i as f64 / golden;
                    vec![radius * r * phi.cos(), radius * r * phi.sin(), radius * z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    loop {
                        let v: Vec<f64> = (0..n)
                            .map(|_| {
                                // Box-Muller from two uniforms.
                                let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                                let u2: f64 = rng.gen_range(0.0..1.0);
                                (-2.0 * u1.ln()).sqrt()
                                    * (2.0 * std::f64::consts::PI * u2).cos()
                            })
                            .collect();
                        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                        if norm > 1e-8 {
                            return v.into_iter().map(|x| radius * x / norm).collect();
                        }
                    }
                })
                .collect()
        }
    }
}
