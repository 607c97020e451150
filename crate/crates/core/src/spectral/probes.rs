//! Spectral probes built on the discretized operator: eigenvalue counting
//! across nested boxes (a computable stand-in for resolvent compactness),
//! the localized quadratic-form identity, the maximal-estimate ratio sweep,
//! and the small-tau interpolation weight.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localization::{bump, PartitionOfUnity};
use crate::potential::Potential;

use super::grid::Grid;
use super::lanczos::{lanczos_smallest_shift_invert, SpectrumResult};
use super::operator::{assemble_witten, quadratic_form, LinearOp};

/// `#{eigenvalues <= lambda}` from a converged spectrum.
///
/// Errors when an eigenvalue at or below `lambda` is unconverged, or when
/// every computed eigenvalue is `<= lambda` (nothing brackets the count from
/// above, so more could be hiding).
pub fn counting_function(res: &SpectrumResult, lambda: f64) -> Result<usize> {
    let mut count = 0;
    for (i, &ev) in res.eigenvalues.iter().enumerate() {
        if ev <= lambda {
            if !res.converged[i] {
                return Err(Error::InsufficientResolution(format!(
                    "eigenvalue {ev} below threshold {lambda} has residual {}",
                    res.residuals[i]
                )));
            }
            count += 1;
        }
    }
    if count == res.eigenvalues.len() {
        return Err(Error::InsufficientResolution(format!(
            "all {count} computed eigenvalues lie below {lambda}; request more"
        )));
    }
    Ok(count)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxStabilityVerdict {
    Stabilizes,
    Grows,
    Indeterminate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxStabilityReport {
    pub half_widths: Vec<f64>,
    pub counts: Vec<usize>,
    pub verdict: BoxStabilityVerdict,
    pub lambda: f64,
    pub spacing: f64,
}

/// Counts eigenvalues below `lambda` on nested boxes `[-L, L]^n` at fixed
/// spacing `h`. A count sequence that settles (last two equal) is the
/// discrete-spectrum signature; a strictly growing one indicates states
/// accumulating below `lambda` as the domain opens up, the essential
/// spectrum signature. The eigenvalue request grows adaptively until the
/// count is bracketed.
pub fn box_stability_probe(
    pot: &Potential,
    tau: f64,
    lambda: f64,
    half_widths: &[f64],
    h: f64,
    seed: u64,
) -> Result<BoxStabilityReport> {
    if half_widths.len() < 2 {
        return Err(Error::invalid("need at least two boxes"));
    }
    if half_widths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("boxes must be strictly increasing"));
    }
    let n = pot.dimension();
    let mut counts = Vec::with_capacity(half_widths.len());
    for &half in half_widths {
        let grid = Grid::with_spacing(vec![[-half, half]; n], h)?;
        let a = assemble_witten(pot, tau, &grid)?;
        let dim = a.dim();
        let mut m = 16usize.min(dim / 4).max(1);
        loop {
            let res = lanczos_smallest_shift_invert(&a, m, probe_tolerance(&a), 600, seed)?;
            match counting_function(&res, lambda) {
                Ok(c) => {
                    counts.push(c);
                    break;
                }
                Err(Error::InsufficientResolution(_)) if m < dim / 4 => {
                    m = (2 * m).min(dim / 4);
                }
                Err(e) => return Err(e),
            }
        }
    }

    let k = counts.len();
    let verdict = if counts[k - 1] == counts[k - 2] {
        BoxStabilityVerdict::Stabilizes
    } else if k >= 3 && counts.windows(2).all(|w| w[1] > w[0]) {
        BoxStabilityVerdict::Grows
    } else {
        BoxStabilityVerdict::Indeterminate
    };
    Ok(BoxStabilityReport {
        half_widths: half_widths.to_vec(),
        counts,
        verdict,
        lambda,
        spacing: h,
    })
}

/// Residual tolerance for probe eigensolves, scaled to the operator norm so
/// backward-stable accuracy passes on operators with huge potential terms.
fn probe_tolerance(a: &super::operator::SparseSymOperator) -> f64 {
    1e-9 * a.gershgorin_upper().abs().max(1.0)
}

/// The localized quadratic-form identity
/// `<A u, u> = sum_mu <A (phi_mu u), phi_mu u> - sum_mu ||(grad phi_mu) u||^2`
/// evaluated with the discrete operator and central-difference bump
/// gradients. Returns `|LHS - RHS| / (|LHS| + 1)`; the gradient-term
/// discretization leaves an O(h^2) mismatch.
pub fn ims_identity_check(
    pot: &Potential,
    tau: f64,
    part: &PartitionOfUnity,
    u: &[f64],
) -> Result<f64> {
    let pgrid = &part.grid;
    if pgrid.points_per_dim < 3 {
        return Err(Error::invalid("partition grid has no interior"));
    }
    let grid = Grid::new(
        pgrid.box_bounds.clone(),
        vec![pgrid.points_per_dim - 2; pgrid.dimension()],
    )?;
    let n_unknowns = grid.num_unknowns();
    if u.len() != n_unknowns {
        return Err(Error::DimensionMismatch {
            expected: n_unknowns,
            got: u.len(),
        });
    }
    // Supported in the interior: zero on the layer adjacent to the boundary.
    for (i, &ui) in u.iter().enumerate() {
        let coords = grid.coords(i);
        let at_edge = coords
            .iter()
            .zip(&grid.interior_per_dim)
            .any(|(&c, &m)| c == 0 || c + 1 == m);
        if at_edge && ui != 0.0 {
            return Err(Error::invalid(
                "test function must vanish on the layer next to the boundary",
            ));
        }
    }

    let a = assemble_witten(pot, tau, &grid)?;
    let vol = grid.cell_volume();
    let lhs = quadratic_form(&a, u) * vol;

    // Map interior index -> partition grid flat index (+1 per coordinate).
    let to_pgrid: Vec<usize> = (0..n_unknowns)
        .map(|i| {
            let shifted: Vec<usize> = grid.coords(i).iter().map(|&c| c + 1).collect();
            pgrid.flat(&shifted)
        })
        .collect();

    let ndim = grid.dimension();
    let mut rhs = 0.0;
    let mut phiu = vec![0.0; n_unknowns];
    for mu in 0..part.num_bumps() {
        for i in 0..n_unknowns {
            phiu[i] = part.phi_at(mu, to_pgrid[i]) * u[i];
        }
        rhs += quadratic_form(&a, &phiu) * vol;

        // Central-difference gradient of phi_mu on the partition grid.
        let mut correction = 0.0;
        for i in 0..n_unknowns {
            if u[i] == 0.0 {
                continue;
            }
            let pcoords = pgrid.coords(to_pgrid[i]);
            let mut grad_sq = 0.0;
            for d in 0..ndim {
                let mut up = pcoords.clone();
                up[d] += 1;
                let mut down = pcoords.clone();
                down[d] -= 1;
                let dv = (part.phi_at(mu, pgrid.flat(&up)) - part.phi_at(mu, pgrid.flat(&down)))
                    / (2.0 * pgrid.spacing(d));
                grad_sq += dv * dv;
            }
            correction += grad_sq * u[i] * u[i];
        }
        rhs -= correction * vol;
    }

    Ok((lhs - rhs).abs() / (lhs.abs() + 1.0))
}

/// A compactly supported radial test function
/// `u(x) = exp(1 - 1/(1 - |x-center|^2/radius^2))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestBump {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl TestBump {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let d2: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        bump(d2.sqrt() / self.radius)
    }

    /// Values over the interior nodes of a grid; errors when the support
    /// ball leaks out of the open box.
    pub fn on_grid(&self, grid: &Grid) -> Result<Vec<f64>> {
        for (d, b) in grid.box_bounds.iter().enumerate() {
            if self.center[d] - self.radius <= b[0] || self.center[d] + self.radius >= b[1] {
                return Err(Error::invalid(format!(
                    "bump at {:?} with radius {} sticks out of the box",
                    self.center, self.radius
                )));
            }
        }
        Ok((0..grid.num_unknowns())
            .map(|i| self.eval(&grid.node(i)))
            .collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaximalEstimateReport {
    pub tau: f64,
    /// Per bump: `||ftilde_tau u||^2 / (<A u, u> + ||u||^2)`.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

/// Empirical lower bound on the constant in the maximal estimate: the
/// largest ratio of the weighted mass to the quadratic form over a family of
/// test bumps.
pub fn maximal_estimate_probe(
    pot: &Potential,
    tau: f64,
    bumps: &[TestBump],
    grid: &Grid,
) -> Result<MaximalEstimateReport> {
    if bumps.is_empty() {
        return Err(Error::invalid("need at least one test bump"));
    }
    let a = assemble_witten(pot, tau, grid)?;
    let mut ratios = Vec::with_capacity(bumps.len());
    for b in bumps {
        let u = b.on_grid(grid)?;
        let norm_sq: f64 = u.iter().map(|v| v * v).sum();
        if norm_sq == 0.0 {
            return Err(Error::invalid(
                "test bump vanishes on every grid node; refine the grid",
            ));
        }
        let mut weighted = 0.0;
        for (i, &ui) in u.iter().enumerate() {
            let w = pot.ftilde_tau(&grid.node(i), tau)?;
            weighted += w * w * ui * ui;
        }
        let denom = quadratic_form(&a, &u) + norm_sq;
        ratios.push(weighted / denom);
    }
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(MaximalEstimateReport {
        tau,
        ratios,
        max_ratio,
    })
}

/// Interpolation weight for pushing the maximal estimate below `tau_0`:
/// `m = max(1, sqrt((2C-1)/(2C)) tau_0/tau)`, which satisfies
/// `1 - 1/(2C) <= (m tau / tau_0)^2 <= 1`.
pub fn m_tau(tau: f64, tau_0: f64, c: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < tau_0) {
        return Err(Error::invalid(format!(
            "need 0 < tau < tau_0, got tau={tau}, tau_0={tau_0}"
        )));
    }
    if c < 1.0 {
        return Err(Error::invalid(format!("C must be >= 1, got {c}")));
    }
    let m = (((2.0 * c - 1.0) / (2.0 * c)).sqrt() * tau_0 / tau).max(1.0);
    debug_assert!({
        let ratio = (m * tau / tau_0).powi(2);
        ratio >= 1.0 - 1.0 / (2.0 * c) - 1e-12 && ratio <= 1.0 + 1e-12
    });
    Ok(m)
}
