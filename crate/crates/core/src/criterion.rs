//! Sampled verification of the eigenvalue-control criterion.
//!
//! The three conditions being probed, for a potential `V` and cap `k`:
//!
//! (i)   `sum_{j in I_x} lambda_j <= C (M(x) + |grad V|^2
//!        + sum_{2<=|a|<=k} |d^a V|^((2-d1)/|a|) + 1)` for all x,
//! (ii)  `|d^a V| <= C_a (1 + ftilde)^(k+1-d2)` for all `|a| = k+1`,
//! (iii) `ftilde(x) -> +infinity` as `|x| -> infinity`.
//!
//! Universally quantified statements cannot be decided by evaluation, so
//! verdicts are reported "on samples": a grid/random sweep estimates the best
//! constant, and ray sweeps with geometrically increasing radii look for
//! ratios that keep growing, which is the numerical signature of a violated
//! sup. A divergence flag is evidence, not proof.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{self, Family};
use crate::potential::Potential;
use crate::sampling::{self, sphere_points};

pub const DEFAULT_DELTA1: f64 = 0.1;
pub const DEFAULT_DELTA2: f64 = 0.1;

/// Ratio growth factor across a ray schedule that counts as divergence.
const DIVERGENCE_GROWTH_FACTOR: f64 = 10.0;
/// Tail entries that must be monotone nondecreasing.
const DIVERGENCE_TAIL: usize = 5;
/// The tail itself must still be growing by this factor; a sequence that has
/// plateaued below a finite constant is not diverging even if it grew by 10x
/// from a small start.
const DIVERGENCE_TAIL_GROWTH: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    Grid,
    Rays,
    Random,
}

/// A parameterized escape path `R -> x(R)` used for divergence sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Ray {
    Linear { base: Vec<f64>, dir: Vec<f64> },
    /// `R -> (scale * R, (scale * R)^2)`, the parabola locus in dimension 2.
    Parabola { scale: f64 },
}

impl Ray {
    pub fn axis(n: usize, i: usize, sign: f64) -> Ray {
        let mut dir = vec![0.0; n];
        dir[i] = sign;
        Ray::Linear {
            base: vec![0.0; n],
            dir,
        }
    }

    pub fn point_at(&self, radius: f64) -> Vec<f64> {
        match self {
            Ray::Linear { base, dir } => base
                .iter()
                .zip(dir)
                .map(|(b, d)| b + radius * d)
                .collect(),
            Ray::Parabola { scale } => {
                let t = scale * radius;
                vec![t, t * t]
            }
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Ray::Linear { base, .. } => base.len(),
            Ray::Parabola { .. } => 2,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Ray::Linear { base, dir } => format!("linear base={base:?} dir={dir:?}"),
            Ray::Parabola { scale } => format!("parabola scale={scale}"),
        }
    }
}

/// Where and how the conditions are evaluated. `modes` selects which sample
/// sources are active; rays drive divergence detection, grid and random
/// points drive the best-constant estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub modes: Vec<SampleMode>,
    /// Axis-aligned box, one `[lo, hi]` pair per dimension.
    pub box_bounds: Vec<[f64; 2]>,
    pub grid_points_per_dim: usize,
    pub random_count: usize,
    pub rays: Vec<Ray>,
    /// Strictly increasing radii for ray sweeps.
    pub radii: Vec<f64>,
    /// Strictly increasing radii for the condition (iii) sphere minima.
    pub sphere_radii: Vec<f64>,
    pub sphere_count: usize,
    pub seed: u64,
}

/// `count` logarithmically spaced values `10^lo .. 10^hi`.
pub fn logspace(lo_exp: f64, hi_exp: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2);
    (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            10f64.powf(lo_exp + t * (hi_exp - lo_exp))
        })
        .collect()
}

impl SamplingPlan {
    /// Default plan: box [-10, 10]^n, a 41-per-dim grid, 512 random points,
    /// axis and diagonal rays swept to radius 1e20, spheres up to 100.
    /// Registered example families contribute their critical loci as rays.
    pub fn default_for(pot: &Potential, seed: u64) -> SamplingPlan {
        let n = pot.dimension();
        let mut rays = Vec::new();
        for i in 0..n {
            rays.push(Ray::axis(n, i, 1.0));
            rays.push(Ray::axis(n, i, -1.0));
        }
        if n == 2 {
            for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                rays.push(Ray::Linear {
                    base: vec![0.0, 0.0],
                    dir: vec![sx, sy],
                });
            }
        }
        match families::detect(pot.polynomial()) {
            Some(Family::VDelta(delta)) if delta < 0.0 => {
                // Lines where x_i^2 + delta = 0, the near-degenerate band of
                // the family's case analysis.
                let s = (-delta).sqrt();
                for sign in [1.0, -1.0] {
                    rays.push(Ray::Linear {
                        base: vec![sign * s, 0.0],
                        dir: vec![0.0, 1.0],
                    });
                    rays.push(Ray::Linear {
                        base: vec![sign * s, 0.0],
                        dir: vec![0.0, -1.0],
                    });
                    rays.push(Ray::Linear {
                        base: vec![0.0, sign * s],
                        dir: vec![1.0, 0.0],
                    });
                    rays.push(Ray::Linear {
                        base: vec![0.0, sign * s],
                        dir: vec![-1.0, 0.0],
                    });
                }
            }
            Some(Family::PhiDelta(_)) => {
                rays.push(Ray::Parabola { scale: 1.0 });
                rays.push(Ray::Parabola { scale: -1.0 });
            }
            _ => {}
        }
        SamplingPlan {
            modes: vec![SampleMode::Grid, SampleMode::Rays, SampleMode::Random],
            box_bounds: vec![[-10.0, 10.0]; n],
            grid_points_per_dim: 41,
            random_count: 512,
            rays,
            radii: logspace(0.0, 20.0, 41),
            // Sphere minima can grow as slowly as R^(1/k); reach far enough
            // out that genuine divergence clears the 10x bar.
            sphere_radii: logspace(0.0, 6.0, 13),
            sphere_count: 256,
            seed,
        }
    }

    pub fn validate(&self, dimension: usize) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::invalid("sampling plan enables no modes"));
        }
        if self.box_bounds.len() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: self.box_bounds.len(),
            });
        }
        for b in &self.box_bounds {
            let increasing = b[0] < b[1];
            if !increasing {
                return Err(Error::invalid(format!("degenerate box side {b:?}")));
            }
        }
        for r in &self.rays {
            if r.dimension() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: r.dimension(),
                });
            }
        }
        for sched in [&self.radii, &self.sphere_radii] {
            if sched.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid("radii schedule must be strictly increasing"));
            }
        }
        let any_points = (self.modes.contains(&SampleMode::Grid) && self.grid_points_per_dim > 0)
            || (self.modes.contains(&SampleMode::Random) && self.random_count > 0)
            || (self.modes.contains(&SampleMode::Rays)
                && !self.rays.is_empty()
                && !self.radii.is_empty());
        if !any_points {
            return Err(Error::invalid("sampling plan produces no samples"));
        }
        Ok(())
    }

    /// Grid plus random points (the non-ray sample sources).
    fn scatter_points(&self) -> Vec<Vec<f64>> {
        let mut pts = Vec::new();
        if self.modes.contains(&SampleMode::Grid) && self.grid_points_per_dim > 0 {
            pts.extend(sampling::grid_points(&self.box_bounds, self.grid_points_per_dim));
        }
        if self.modes.contains(&SampleMode::Random) && self.random_count > 0 {
            pts.extend(sampling::random_points(
                &self.box_bounds,
                self.random_count,
                self.seed,
            ));
        }
        pts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    I,
    Ii,
    Iii,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    SatisfiedOnSamples,
    DivergenceDetected,
    Violated,
}

/// One sampled point with the two sides of the inequality it was tested on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Ratio values along one ray (or the sphere-minima sequence for (iii)).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RayTrend {
    pub ray: String,
    pub radii: Vec<f64>,
    pub ratios: Vec<f64>,
    pub diverging: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionReport {
    pub condition: Condition,
    pub verdict: Verdict,
    /// Sup of LHS/RHS over samples; max of the witnesses' ratios.
    pub best_constant: f64,
    pub witnesses: Vec<Witness>,
    pub trend: Vec<RayTrend>,
    /// The delta used (delta1 for (i), delta2 for (ii), none for (iii)).
    pub parameters: std::collections::BTreeMap<String, f64>,
}

impl CriterionReport {
    /// Whether this condition counts as passed for the overall criterion.
    /// Divergence means failure for (i)/(ii) but success for (iii), where the
    /// diverging quantity is `ftilde` itself.
    pub fn passes(&self) -> bool {
        match self.condition {
            Condition::I | Condition::Ii => self.verdict == Verdict::SatisfiedOnSamples,
            Condition::Iii => self.verdict == Verdict::DivergenceDetected,
        }
    }
}

const MAX_WITNESSES: usize = 8;

fn top_witnesses(mut all: Vec<Witness>) -> Vec<Witness> {
    all.sort_by(|a, b| {
        b.ratio
            .total_cmp(&a.ratio)
            .then_with(|| a.x.iter().map(|v| v.to_bits()).cmp(b.x.iter().map(|v| v.to_bits())))
    });
    all.truncate(MAX_WITNESSES);
    all
}

/// Growing-without-bound test on a ratio sequence along one ray.
fn detect_divergence(ratios: &[f64]) -> bool {
    let n = ratios.len();
    if n < DIVERGENCE_TAIL {
        return false;
    }
    let first = match ratios.iter().copied().find(|r| *r > 0.0) {
        Some(v) => v,
        None => return false,
    };
    let last = ratios[n - 1];
    if last < DIVERGENCE_GROWTH_FACTOR * first {
        return false;
    }
    let tail = &ratios[n - DIVERGENCE_TAIL..];
    if tail.windows(2).any(|w| w[1] < w[0]) {
        return false;
    }
    last >= DIVERGENCE_TAIL_GROWTH * tail[0]
}

/// LHS/RHS of condition (i) at a point, or `None` where `Delta V <= 0`
/// (such points satisfy the inequality automatically and are never
/// reported as witnesses).
fn condition_i_sides(pot: &Potential, delta1: f64, x: &[f64]) -> Result<Option<(f64, f64)>> {
    let a = pot.analyze_point(x)?;
    if a.trace() <= 0.0 {
        return Ok(None);
    }
    let mut deriv_sum = 0.0;
    for (alpha, d) in pot.derivatives() {
        let m = alpha.order();
        if m < 2 || m > pot.k() {
            continue;
        }
        deriv_sum += d.eval(x)?.abs().powf((2.0 - delta1) / m as f64);
    }
    let rhs = a.m_neg + a.grad_norm_sq() + deriv_sum + 1.0;
    Ok(Some((a.pos_sum, rhs)))
}

/// Condition (i): positive Hessian mass against gradient, negative mass and
/// intermediate derivatives.
pub fn check_condition_i(
    pot: &Potential,
    delta1: f64,
    plan: &SamplingPlan,
) -> Result<CriterionReport> {
    if !(0.0 < delta1 && delta1 < 1.0) {
        return Err(Error::invalid(format!(
            "delta1 must lie in (0,1), got {delta1}"
        )));
    }
    plan.validate(pot.dimension())?;

    let mut witnesses = Vec::new();
    let scatter = plan.scatter_points();
    let evaluated: Result<Vec<_>> = scatter
        .par_iter()
        .map(|x| condition_i_sides(pot, delta1, x).map(|s| (x.clone(), s)))
        .collect();
    for (x, sides) in evaluated? {
        if let Some((lhs, rhs)) = sides {
            witnesses.push(Witness {
                ratio: lhs / rhs,
                x,
                lhs,
                rhs,
            });
        }
    }

    let mut trend = Vec::new();
    if plan.modes.contains(&SampleMode::Rays) {
        for ray in &plan.rays {
            let mut ratios = Vec::with_capacity(plan.radii.len());
            for &radius in &plan.radii {
                let x = ray.point_at(radius);
                match condition_i_sides(pot, delta1, &x)? {
                    Some((lhs, rhs)) => {
                        ratios.push(lhs / rhs);
                        witnesses.push(Witness {
                            ratio: lhs / rhs,
                            x,
                            lhs,
                            rhs,
                        });
                    }
                    None => ratios.push(0.0),
                }
            }
            trend.push(RayTrend {
                ray: ray.label(),
                diverging: detect_divergence(&ratios),
                radii: plan.radii.clone(),
                ratios,
            });
        }
    }

    let witnesses = top_witnesses(witnesses);
    let best_constant = witnesses.first().map(|w| w.ratio).unwrap_or(0.0);
    let verdict = if trend.iter().any(|t| t.diverging) {
        Verdict::DivergenceDetected
    } else {
        Verdict::SatisfiedOnSamples
    };
    Ok(CriterionReport {
        condition: Condition::I,
        verdict,
        best_constant,
        witnesses,
        trend,
        parameters: [("delta1".to_string(), delta1)].into_iter().collect(),
    })
}

/// Max over `|alpha| = k+1` of `|d^a V(x)| / (1 + ftilde(x))^(k+1-delta2)`.
fn condition_ii_sides(pot: &Potential, delta2: f64, x: &[f64]) -> Result<(f64, f64)> {
    let mut top = 0.0f64;
    for (alpha, d) in pot.derivatives() {
        if alpha.order() == pot.k() + 1 {
            top = top.max(d.eval(x)?.abs());
        }
    }
    let denom = (1.0 + pot.ftilde(x)?).powf((pot.k() + 1) as f64 - delta2);
    Ok((top, denom))
}

/// Condition (ii): order-(k+1) derivatives controlled by powers of `ftilde`.
/// Polynomials of degree at most `k` satisfy it with constant 0.
pub fn check_condition_ii(
    pot: &Potential,
    delta2: f64,
    plan: &SamplingPlan,
) -> Result<CriterionReport> {
    if !(0.0 < delta2 && delta2 < 1.0) {
        return Err(Error::invalid(format!(
            "delta2 must lie in (0,1), got {delta2}"
        )));
    }
    let parameters: std::collections::BTreeMap<_, _> =
        [("delta2".to_string(), delta2)].into_iter().collect();

    if pot.polynomial().degree() <= pot.k() {
        // Every order-(k+1) derivative vanishes identically.
        return Ok(CriterionReport {
            condition: Condition::Ii,
            verdict: Verdict::SatisfiedOnSamples,
            best_constant: 0.0,
            witnesses: Vec::new(),
            trend: Vec::new(),
            parameters,
        });
    }

    plan.validate(pot.dimension())?;
    let mut witnesses = Vec::new();
    for x in plan.scatter_points() {
        let (lhs, rhs) = condition_ii_sides(pot, delta2, &x)?;
        witnesses.push(Witness {
            ratio: lhs / rhs,
            x,
            lhs,
            rhs,
        });
    }
    let mut trend = Vec::new();
    if plan.modes.contains(&SampleMode::Rays) {
        for ray in &plan.rays {
            let mut ratios = Vec::with_capacity(plan.radii.len());
            for &radius in &plan.radii {
                let x = ray.point_at(radius);
                let (lhs, rhs) = condition_ii_sides(pot, delta2, &x)?;
                ratios.push(lhs / rhs);
                witnesses.push(Witness {
                    ratio: lhs / rhs,
                    x,
                    lhs,
                    rhs,
                });
            }
            trend.push(RayTrend {
                ray: ray.label(),
                diverging: detect_divergence(&ratios),
                radii: plan.radii.clone(),
                ratios,
            });
        }
    }
    let witnesses = top_witnesses(witnesses);
    let best_constant = witnesses.first().map(|w| w.ratio).unwrap_or(0.0);
    let verdict = if trend.iter().any(|t| t.diverging) {
        Verdict::DivergenceDetected
    } else {
        Verdict::SatisfiedOnSamples
    };
    Ok(CriterionReport {
        condition: Condition::Ii,
        verdict,
        best_constant,
        witnesses,
        trend,
        parameters,
    })
}

/// Condition (iii): minimum of `ftilde` over spheres of increasing radius.
/// Divergence of the minima is the passing verdict; a bounded direction is
/// reported as a violation witness.
pub fn check_condition_iii(
    pot: &Potential,
    sphere_radii: &[f64],
    sphere_count: usize,
    seed: u64,
) -> Result<CriterionReport> {
    if sphere_radii.len() < 2 {
        return Err(Error::invalid("need at least two sphere radii"));
    }
    if sphere_radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("sphere radii must be strictly increasing"));
    }
    let n = pot.dimension();
    let mut minima = Vec::with_capacity(sphere_radii.len());
    let mut argmins: Vec<Vec<f64>> = Vec::with_capacity(sphere_radii.len());
    for (i, &radius) in sphere_radii.iter().enumerate() {
        let pts = sphere_points(n, radius, sphere_count, seed.wrapping_add(i as u64));
        let values: Result<Vec<f64>> = pts.par_iter().map(|x| pot.ftilde(x)).collect();
        let values = values?;
        let (arg, min) = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, v)| (i, *v))
            .expect("sphere sample set is nonempty");
        minima.push(min);
        argmins.push(pts[arg].clone());
    }

    let first = minima[0].max(f64::MIN_POSITIVE);
    let last = *minima.last().expect("nonempty");
    let tail_len = DIVERGENCE_TAIL.min(minima.len());
    let tail = &minima[minima.len() - tail_len..];
    let monotone = tail.windows(2).all(|w| w[1] >= w[0]);
    let diverging = last > DIVERGENCE_GROWTH_FACTOR * first && monotone;

    let trend = vec![RayTrend {
        ray: "sphere-minima".to_string(),
        radii: sphere_radii.to_vec(),
        ratios: minima.clone(),
        diverging,
    }];
    // Witness: the argmin on the largest sphere, i.e. the direction along
    // which ftilde is smallest.
    let witness = Witness {
        x: argmins.last().expect("nonempty").clone(),
        lhs: last,
        rhs: *sphere_radii.last().expect("nonempty"),
        ratio: last,
    };
    Ok(CriterionReport {
        condition: Condition::Iii,
        verdict: if diverging {
            Verdict::DivergenceDetected
        } else {
            Verdict::Violated
        },
        best_constant: last,
        witnesses: vec![witness],
        trend,
        parameters: Default::default(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FullCheckReport {
    pub condition_i: CriterionReport,
    pub condition_ii: CriterionReport,
    pub condition_iii: CriterionReport,
    pub holds_on_samples: bool,
    pub failing_conditions: Vec<Condition>,
}

/// Conjunction of the three condition checks.
pub fn full_check(
    pot: &Potential,
    delta1: f64,
    delta2: f64,
    plan: &SamplingPlan,
) -> Result<FullCheckReport> {
    let condition_i = check_condition_i(pot, delta1, plan)?;
    let condition_ii = check_condition_ii(pot, delta2, plan)?;
    let condition_iii =
        check_condition_iii(pot, &plan.sphere_radii, plan.sphere_count, plan.seed)?;
    let mut failing = Vec::new();
    for report in [&condition_i, &condition_ii, &condition_iii] {
        if !report.passes() {
            failing.push(report.condition);
        }
    }
    Ok(FullCheckReport {
        condition_i,
        condition_ii,
        condition_iii,
        holds_on_samples: failing.is_empty(),
        failing_conditions: failing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{phi_delta, v_delta};
    use crate::poly::Polynomial;

    fn pot(p: Polynomial, k: u32) -> Potential {
        Potential::new(p, k).unwrap()
    }

    fn default_plan(p: &Potential) -> SamplingPlan {
        SamplingPlan::default_for(p, 42)
    }

    #[test]
    fn v_delta_positive_satisfies_condition_i() {
        let p = pot(v_delta(1.0), 4);
        let r = check_condition_i(&p, 0.1, &default_plan(&p)).unwrap();
        assert_eq!(r.verdict, Verdict::SatisfiedOnSamples);
        assert!(r.best_constant.is_finite());
        assert!(r.best_constant > 0.0);
    }

    #[test]
    fn v_zero_diverges_along_axis() {
        // Closed-form oracle along (R, 0): LHS = 2R^2 (single positive
        // eigenvalue), grad = 0, M = 0, RHS = (2R^2)^((2-d1)/2)
        // + (4R)^((2-d1)/3) + 4^((2-d1)/4) + 1, so the ratio grows like
        // R^d1.
        let p = pot(v_delta(0.0), 4);
        let plan = default_plan(&p);
        let r = check_condition_i(&p, 0.1, &plan).unwrap();
        assert_eq!(r.verdict, Verdict::DivergenceDetected);
        let axis = r
            .trend
            .iter()
            .find(|t| t.ray.contains("dir=[1.0, 0.0]"))
            .unwrap();
        assert!(axis.diverging);
        // Spot-check the stored ratios against the closed form.
        let d1 = 0.1;
        for (i, &radius) in axis.radii.iter().enumerate() {
            let lhs = 2.0 * radius * radius;
            let rhs = (2.0 * radius * radius).powf((2.0 - d1) / 2.0)
                + (4.0 * radius).powf((2.0 - d1) / 3.0)
                + 4.0f64.powf((2.0 - d1) / 4.0)
                + 1.0;
            let expected = lhs / rhs;
            let got = axis.ratios[i];
            assert!(
                (got - expected).abs() <= 1e-9 * expected.max(1.0),
                "radius {radius}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn v_delta_negative_still_satisfies_condition_i() {
        for delta in [-1.0, -0.5] {
            let p = pot(v_delta(delta), 4);
            let r = check_condition_i(&p, 0.1, &default_plan(&p)).unwrap();
            assert_eq!(r.verdict, Verdict::SatisfiedOnSamples, "delta={delta}");
        }
    }

    #[test]
    fn phi_minus_one_diverges_on_negative_x2_axis() {
        let p = pot(phi_delta(-1.0), 4);
        let r = check_condition_i(&p, 0.1, &default_plan(&p)).unwrap();
        assert_eq!(r.verdict, Verdict::DivergenceDetected);
        let down_axis = r
            .trend
            .iter()
            .find(|t| t.ray.contains("dir=[0.0, -1.0]") && t.ray.contains("base=[0.0, 0.0]"))
            .unwrap();
        assert!(down_axis.diverging);
        // Witnesses live on the negative x2-axis: x = (0, x2), x2 < 0.
        let top = &r.witnesses[0];
        assert_eq!(top.x[0], 0.0);
        assert!(top.x[1] < 0.0);
    }

    #[test]
    fn phi_delta_good_values_satisfy_condition_i() {
        for delta in [1.0, -0.5, 2.0] {
            let p = pot(phi_delta(delta), 4);
            let r = check_condition_i(&p, 0.1, &default_plan(&p)).unwrap();
            assert_eq!(r.verdict, Verdict::SatisfiedOnSamples, "delta={delta}");
        }
    }

    #[test]
    fn condition_ii_degree_shortcut() {
        let p = pot(v_delta(1.0), 4);
        let r = check_condition_ii(&p, 0.1, &default_plan(&p)).unwrap();
        assert_eq!(r.verdict, Verdict::SatisfiedOnSamples);
        assert_eq!(r.best_constant, 0.0);

        let z = pot(Polynomial::zero(2), 2);
        let r = check_condition_ii(&z, 0.5, &default_plan(&z)).unwrap();
        assert_eq!(r.best_constant, 0.0);
    }

    #[test]
    fn condition_ii_sextic_ratio_decays() {
        // V = x^6 with k = 2: |V'''| = 120|x|^3 against (1+ftilde)^2.5 with
        // ftilde >= |6x^5|, so the ratio decays along the ray.
        let v = Polynomial::from_terms(1, vec![(vec![6], 1.0)]).unwrap();
        let p = pot(v, 2);
        let mut plan = default_plan(&p);
        plan.radii = logspace(0.0, 6.0, 13);
        let r = check_condition_ii(&p, 0.5, &plan).unwrap();
        assert_eq!(r.verdict, Verdict::SatisfiedOnSamples);
        let t = &r.trend[0];
        assert!(t.ratios.last().unwrap() < &t.ratios[0]);
    }

    #[test]
    fn condition_iii_harmonic_and_families() {
        // V = x^2/2: sphere minima are R + 1, increasing without bound.
        let v = Polynomial::from_terms(1, vec![(vec![2], 0.5)]).unwrap();
        let p = pot(v, 2);
        let r = check_condition_iii(&p, &logspace(0.0, 2.0, 9), 16, 7).unwrap();
        assert_eq!(r.verdict, Verdict::DivergenceDetected);
        let m = &r.trend[0].ratios;
        for (i, &radius) in r.trend[0].radii.iter().enumerate() {
            assert!((m[i] - (radius + 1.0)).abs() < 1e-9 * (radius + 1.0));
        }

        let p = pot(v_delta(1.0), 4);
        let r = check_condition_iii(&p, &logspace(0.0, 2.0, 9), 128, 7).unwrap();
        assert_eq!(r.verdict, Verdict::DivergenceDetected);
    }

    #[test]
    fn condition_iii_violated_for_cylindrical_potential() {
        // V = x1^2 in R^2: ftilde = 2|x1| + sqrt(2) is constant along the
        // x2-axis, so sphere minima stay near sqrt(2).
        let v = Polynomial::from_terms(2, vec![(vec![2, 0], 1.0)]).unwrap();
        let p = pot(v, 2);
        let r = check_condition_iii(&p, &logspace(0.0, 2.0, 9), 720, 7).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        // Witness direction is along +-x2.
        let w = &r.witnesses[0];
        assert!(w.x[0].abs() < 0.05 * w.x[1].abs());
        assert!((w.lhs - 2.0f64.sqrt()) < 0.2);
    }

    #[test]
    fn full_check_reproduces_example_verdicts() {
        let cases: Vec<(Polynomial, bool)> = vec![
            (v_delta(1.0), true),
            (v_delta(0.0), false),
            (phi_delta(1.0), true),
            (phi_delta(-1.0), false),
        ];
        for (v, expect_holds) in cases {
            let p = pot(v, 4);
            let plan = default_plan(&p);
            let r = full_check(&p, 0.1, 0.1, &plan).unwrap();
            assert_eq!(r.holds_on_samples, expect_holds);
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let p = pot(v_delta(-0.5), 4);
        let plan = default_plan(&p);
        let a = serde_json::to_string(&full_check(&p, 0.1, 0.1, &plan).unwrap()).unwrap();
        let b = serde_json::to_string(&full_check(&p, 0.1, 0.1, &plan).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn witnesses_recompute_exactly() {
        let p = pot(phi_delta(-1.0), 4);
        let plan = default_plan(&p);
        let r = check_condition_i(&p, 0.1, &plan).unwrap();
        for w in &r.witnesses {
            let (lhs, rhs) = condition_i_sides(&p, 0.1, &w.x).unwrap().unwrap();
            assert!((lhs - w.lhs).abs() <= 1e-12 * w.lhs.abs().max(1.0));
            assert!((rhs - w.rhs).abs() <= 1e-12 * w.rhs.abs().max(1.0));
        }
    }

    #[test]
    fn auto_satisfied_points_never_witness() {
        // Concave potential: Delta V < 0 everywhere, so every sample is
        // auto-satisfied and the report carries no witnesses.
        let v = Polynomial::from_terms(2, vec![(vec![2, 0], -1.0), (vec![0, 2], -1.0)]).unwrap();
        let p = pot(v, 2);
        let r = check_condition_i(&p, 0.1, &default_plan(&p)).unwrap();
        assert!(r.witnesses.is_empty());
        assert_eq!(r.best_constant, 0.0);
        assert_eq!(r.verdict, Verdict::SatisfiedOnSamples);
    }

    #[test]
    fn scaling_consistency_for_condition_iii() {
        for delta in [1.0, -1.0, 0.5] {
            let base = pot(v_delta(delta), 4);
            let doubled = pot(v_delta(delta).scale(2.0), 4);
            let radii = logspace(0.0, 2.0, 9);
            let a = check_condition_iii(&base, &radii, 128, 3).unwrap();
            let b = check_condition_iii(&doubled, &radii, 128, 3).unwrap();
            assert_eq!(a.verdict, b.verdict, "delta={delta}");
        }
    }

    #[test]
    fn empty_plan_rejected() {
        let p = pot(v_delta(1.0), 4);
        let mut plan = default_plan(&p);
        plan.modes.clear();
        assert!(check_condition_i(&p, 0.1, &plan).is_err());
        let mut plan = default_plan(&p);
        plan.grid_points_per_dim = 0;
        plan.random_count = 0;
        plan.rays.clear();
        assert!(check_condition_i(&p, 0.1, &plan).is_err());
    }

    #[test]
    fn delta_domains_validated() {
        let p = pot(v_delta(1.0), 4);
        let plan = default_plan(&p);
        assert!(check_condition_i(&p, 0.0, &plan).is_err());
        assert!(check_condition_i(&p, 1.0, &plan).is_err());
        assert!(check_condition_ii(&p, 1.5, &plan).is_err());
    }

    #[test]
    fn divergence_detector_edges() {
        assert!(!detect_divergence(&[1.0, 2.0, 3.0]));
        // Plateaued sequence: grew 20x early on but flat at the end.
        let plateau = [0.05, 0.2, 0.5, 0.9, 1.0, 1.0, 1.0, 1.0, 1.0];
        assert!(!detect_divergence(&plateau));
        // Steady geometric growth diverges.
        let growth: Vec<f64> = (0..10).map(|i| 1.5f64.powi(i)).collect();
        assert!(detect_divergence(&growth));
        // Oscillating tail does not.
        let osc = [1.0, 5.0, 2.0, 8.0, 3.0, 9.0, 4.0, 10.0, 5.0, 11.0];
        assert!(!detect_divergence(&osc));
        assert!(!detect_divergence(&[0.0; 10]));
    }

    #[test]
    fn plan_json_round_trip() {
        let p = pot(phi_delta(-1.0), 4);
        let plan = default_plan(&p);
        let s = serde_json::to_string(&plan).unwrap();
        let back: SamplingPlan = serde_json::from_str(&s).unwrap();
        assert_eq!(plan.rays, back.rays);
        assert_eq!(plan.radii, back.radii);
    }
}
