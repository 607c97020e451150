//! The slowly varying metric `eps f(x)^2 |dx|^2` and quadratic partitions
//! of unity subordinate to it.
//!
//! Metric balls have Euclidean radius proportional to `1/f(x)`, so a cover
//! is built greedily on a bounded box: scan grid nodes in lexicographic
//! order, keep a node as a center whenever it is not within half a ball
//! radius of an existing center, then normalize compactly supported bumps so
//! their squares sum to one. The half-radius separation is the usual
//! covering-lemma construction and bounds the overlap count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::sampling::sphere_points;

pub const DEFAULT_EPS: f64 = 0.25;

/// Tensor grid over a box, boundary nodes included, row-major indexing
/// (last dimension fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionGrid {
    pub box_bounds: Vec<[f64; 2]>,
    pub points_per_dim: usize,
}

impl PartitionGrid {
    pub fn new(box_bounds: Vec<[f64; 2]>, points_per_dim: usize) -> Result<Self> {
        if points_per_dim < 2 {
            return Err(Error::invalid("grid needs at least 2 points per dim"));
        }
        for b in &box_bounds {
            let increasing = b[0] < b[1];
            if !increasing {
                return Err(Error::invalid(format!("degenerate box side {b:?}")));
            }
        }
        Ok(PartitionGrid {
            box_bounds,
            points_per_dim,
        })
    }

    pub fn dimension(&self) -> usize {
        self.box_bounds.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.points_per_dim.pow(self.dimension() as u32)
    }

    pub fn spacing(&self, d: usize) -> f64 {
        let b = self.box_bounds[d];
        (b[1] - b[0]) / (self.points_per_dim - 1) as f64
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.dimension())
            .map(|d| self.spacing(d))
            .fold(0.0, f64::max)
    }

    pub fn coords(&self, flat: usize) -> Vec<usize> {
        let n = self.dimension();
        let mut c = vec![0usize; n];
        let mut rest = flat;
        for d in (0..n).rev() {
            c[d] = rest % self.points_per_dim;
            rest /= self.points_per_dim;
        }
        c
    }

    pub fn flat(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .fold(0usize, |acc, &c| acc * self.points_per_dim + c)
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        self.coords(flat)
            .iter()
            .enumerate()
            .map(|(d, &i)| self.box_bounds[d][0] + i as f64 * self.spacing(d))
            .collect()
    }

    pub fn is_interior(&self, flat: usize) -> bool {
        self.coords(flat)
            .iter()
            .all(|&c| c > 0 && c + 1 < self.points_per_dim)
    }
}

/// `max f(z)/f(x)` over the metric ball `|z - x| <= r / f(x)`, sampled on
/// the boundary sphere plus interior shells plus the center itself (so the
/// value is always at least 1).
pub fn psi_r(
    pot: &Potential,
    x: &[f64],
    r: f64,
    sample_count: usize,
    seed: u64,
) -> Result<f64> {
    if !(0.0 < r && r < 1.0) {
        return Err(Error::invalid(format!("r must lie in (0,1), got {r}")));
    }
    let fx = pot.f_reg(x)?;
    let rho = r / fx;
    let mut best = 1.0f64; // z = x
    for (shell, frac) in [(0u64, 1.0), (1, 0.75), (2, 0.5), (3, 0.25)] {
        let pts = sphere_points(x.len(), rho * frac, sample_count, seed.wrapping_add(shell));
        for p in pts {
            let z: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
            best = best.max(pot.f_reg(&z)? / fx);
        }
    }
    Ok(best)
}

/// Empirical slow-variation constant: sup of `max(f(y)/f(x), f(x)/f(y))`
/// over sampled pairs with `|y - x| <= r / f(x)`.
pub fn estimate_slow_variation(
    pot: &Potential,
    box_bounds: &[[f64; 2]],
    r: f64,
    samples_per_dim: usize,
    ball_samples: usize,
    seed: u64,
) -> Result<f64> {
    if !(0.0 < r && r < 1.0) {
        return Err(Error::invalid(format!("r must lie in (0,1), got {r}")));
    }
    let mut c_star = 1.0f64;
    for x in crate::sampling::grid_points(box_bounds, samples_per_dim) {
        let fx = pot.f_reg(&x)?;
        let rho = r / fx;
        for (shell, frac) in [(0u64, 1.0), (1, 0.6), (2, 0.3)] {
            for p in sphere_points(x.len(), rho * frac, ball_samples, seed.wrapping_add(shell)) {
                let y: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
                let fy = pot.f_reg(&y)?;
                c_star = c_star.max(fy / fx).max(fx / fy);
            }
        }
    }
    Ok(c_star)
}

/// The metric data `g_{x,eps} = eps f(x)^2 |dx|^2` on a box, with the
/// estimated slow-variation constant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlowMetric {
    pub eps: f64,
    pub r: f64,
    pub c_star: f64,
}

impl SlowMetric {
    pub fn estimate(
        pot: &Potential,
        box_bounds: &[[f64; 2]],
        eps: f64,
        r: f64,
        samples_per_dim: usize,
        seed: u64,
    ) -> Result<Self> {
        if !(0.0 < eps && eps <= 1.0) {
            return Err(Error::invalid(format!("eps must lie in (0,1], got {eps}")));
        }
        let c_star = estimate_slow_variation(pot, box_bounds, r, samples_per_dim, 32, seed)?;
        Ok(SlowMetric { eps, r, c_star })
    }
}

/// `exp(1 - 1/(1-s^2))` for `s < 1`, zero beyond; `bump(0) = 1`.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// A quadratic partition of unity on a gridded box.
///
/// Bump `mu` is supported in the ball of radius `r / (sqrt(2) f(x_mu))`
/// around its center; at every grid node the squares sum to one and at most
/// `overlap_bound` bumps are nonzero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionOfUnity {
    pub grid: PartitionGrid,
    pub eps: f64,
    pub r: f64,
    pub centers: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    /// Sparse per-center node values, each sorted by flat node index.
    pub phi: Vec<Vec<(usize, f64)>>,
    pub overlap_bound: usize,
}

impl PartitionOfUnity {
    pub fn phi_at(&self, mu: usize, flat: usize) -> f64 {
        match self.phi[mu].binary_search_by_key(&flat, |e| e.0) {
            Ok(i) => self.phi[mu][i].1,
            Err(_) => 0.0,
        }
    }

    pub fn num_bumps(&self) -> usize {
        self.centers.len()
    }

    /// Dense values of bump `mu` over all grid nodes.
    pub fn phi_dense(&self, mu: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.num_nodes()];
        for &(idx, v) in &self.phi[mu] {
            out[idx] = v;
        }
        out
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Greedy cover construction on the grid (see module docs). Fails when the
/// grid spacing is coarser than a quarter of the smallest ball radius.
pub fn build_partition(
    pot: &Potential,
    box_bounds: &[[f64; 2]],
    eps: f64,
    r: f64,
    points_per_dim: usize,
) -> Result<PartitionOfUnity> {
    let grid = PartitionGrid::new(box_bounds.to_vec(), points_per_dim)?;
    validate_params(pot, &grid, eps, r)?;

    let f_values: Vec<f64> = (0..grid.num_nodes())
        .map(|i| pot.f_reg(&grid.node(i)))
        .collect::<Result<_>>()?;
    let min_radius = f_values
        .iter()
        .map(|f| r / (2.0f64.sqrt() * f))
        .fold(f64::INFINITY, f64::min);
    if grid.max_spacing() >= min_radius / 4.0 {
        return Err(Error::invalid(format!(
            "grid spacing {} too coarse for smallest ball radius {} (need < radius/4)",
            grid.max_spacing(),
            min_radius
        )));
    }

    // Greedy scan: keep a node as a center iff no existing half ball
    // already covers it.
    let mut centers: Vec<Vec<f64>> = Vec::new();
    let mut radii: Vec<f64> = Vec::new();
    for (i, f_node) in f_values.iter().enumerate() {
        let x = grid.node(i);
        let covered = centers
            .iter()
            .zip(&radii)
            .any(|(c, rad)| dist(&x, c) < rad / 2.0f64.sqrt());
        if !covered {
            radii.push(r / (2.0f64.sqrt() * f_node));
            centers.push(x);
        }
    }

    finalize_partition(grid, eps, r, centers, radii)
}

/// Same normalization machinery with caller-provided centers. Used when a
/// fixed bump family must be re-evaluated on grids of different resolution
/// (refinement studies need the underlying functions to stay put).
pub fn build_partition_with_centers(
    pot: &Potential,
    box_bounds: &[[f64; 2]],
    eps: f64,
    r: f64,
    points_per_dim: usize,
    centers: Vec<Vec<f64>>,
) -> Result<PartitionOfUnity> {
    let grid = PartitionGrid::new(box_bounds.to_vec(), points_per_dim)?;
    validate_params(pot, &grid, eps, r)?;
    if centers.is_empty() {
        return Err(Error::invalid("need at least one center"));
    }
    let mut radii = Vec::with_capacity(centers.len());
    for c in &centers {
        if c.len() != grid.dimension() {
            return Err(Error::DimensionMismatch {
                expected: grid.dimension(),
                got: c.len(),
            });
        }
        radii.push(r / (2.0f64.sqrt() * pot.f_reg(c)?));
    }
    finalize_partition(grid, eps, r, centers, radii)
}

fn validate_params(pot: &Potential, grid: &PartitionGrid, eps: f64, r: f64) -> Result<()> {
    if pot.dimension() != grid.dimension() {
        return Err(Error::DimensionMismatch {
            expected: pot.dimension(),
            got: grid.dimension(),
        });
    }
    if !(0.0 < eps && eps <= 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0,1], got {eps}")));
    }
    if !(0.0 < r && r < 1.0) {
        return Err(Error::invalid(format!("r must lie in (0,1), got {r}")));
    }
    Ok(())
}

fn finalize_partition(
    grid: PartitionGrid,
    eps: f64,
    r: f64,
    centers: Vec<Vec<f64>>,
    radii: Vec<f64>,
) -> Result<PartitionOfUnity> {
    let num_nodes = grid.num_nodes();
    let mut raw: Vec<Vec<(usize, f64)>> = Vec::with_capacity(centers.len());
    let mut sum_sq = vec![0.0f64; num_nodes];
    for (c, &rad) in centers.iter().zip(&radii) {
        let mut entries = Vec::new();
        for (i, acc) in sum_sq.iter_mut().enumerate() {
            let s = dist(&grid.node(i), c) / rad;
            let chi = bump(s);
            if chi > 0.0 {
                *acc += chi * chi;
                entries.push((i, chi));
            }
        }
        raw.push(entries);
    }
    for (i, &s) in sum_sq.iter().enumerate() {
        if s <= 0.0 {
            return Err(Error::Construction(format!(
                "grid node {:?} not covered by any bump",
                grid.node(i)
            )));
        }
    }
    let mut overlap = vec![0usize; num_nodes];
    let mut phi = Vec::with_capacity(raw.len());
    for entries in raw {
        let normalized: Vec<(usize, f64)> = entries
            .into_iter()
            .map(|(i, chi)| {
                overlap[i] += 1;
                (i, chi / sum_sq[i].sqrt())
            })
            .collect();
        phi.push(normalized);
    }
    Ok(PartitionOfUnity {
        grid,
        eps,
        r,
        centers,
        radii,
        phi,
        overlap_bound: overlap.into_iter().max().unwrap_or(0),
    })
}

/// Verification sweep over a built partition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionCheck {
    /// `max |sum phi^2 - 1|` over interior nodes.
    pub normalization_error: f64,
    /// Largest number of bumps alive at one node.
    pub overlap: usize,
    /// All stored support nodes lie strictly inside their ball.
    pub support_ok: bool,
    /// `sup |grad_h phi_mu(x)| / (sqrt(eps) f(x))` over interior nodes
    /// (central differences on the grid).
    pub gradient_ratio: f64,
}

pub fn verify_partition(
    part: &PartitionOfUnity,
    pot: &Potential,
    eps: f64,
) -> Result<PartitionCheck> {
    let grid = &part.grid;
    let n = grid.dimension();
    let mut normalization_error = 0.0f64;
    let mut overlap = 0usize;
    let mut support_ok = true;
    let mut gradient_ratio = 0.0f64;

    for mu in 0..part.num_bumps() {
        for &(idx, v) in &part.phi[mu] {
            if v != 0.0 && dist(&grid.node(idx), &part.centers[mu]) >= part.radii[mu] {
                support_ok = false;
            }
        }
    }

    for i in 0..grid.num_nodes() {
        let mut s = 0.0;
        let mut alive = 0;
        for mu in 0..part.num_bumps() {
            let v = part.phi_at(mu, i);
            if v != 0.0 {
                alive += 1;
            }
            s += v * v;
        }
        overlap = overlap.max(alive);
        if grid.is_interior(i) {
            normalization_error = normalization_error.max((s - 1.0).abs());
            let x = grid.node(i);
            let fx = pot.f_reg(&x)?;
            let coords = grid.coords(i);
            for mu in 0..part.num_bumps() {
                let mut grad_sq = 0.0;
                for d in 0..n {
                    let mut up = coords.clone();
                    up[d] += 1;
                    let mut down = coords.clone();
                    down[d] -= 1;
                    let dv = (part.phi_at(mu, grid.flat(&up)) - part.phi_at(mu, grid.flat(&down)))
                        / (2.0 * grid.spacing(d));
                    grad_sq += dv * dv;
                }
                gradient_ratio = gradient_ratio.max(grad_sq.sqrt() / (eps.sqrt() * fx));
            }
        }
    }

    Ok(PartitionCheck {
        normalization_error,
        overlap,
        support_ok,
        gradient_ratio,
    })
}
