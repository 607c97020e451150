//! Pointwise analysis of a polynomial potential.
//!
//! For a potential `V` and a derivative-order cap `k >= 2`, this module
//! evaluates the weight functions
//!
//! ```text
//! ftilde(x)      = sum_{1 <= |a| <= k} |d^a V(x)|^(1/|a|)
//! f(x)           = sum_{1 <= |a| <= k} (1 + |d^a V(x)|^2)^(1/(2|a|))
//! ftilde_tau(x)  = sum_{1 <= |a| <= k} tau^(1/|a|) |d^a V(x)|^(1/|a|)
//! ```
//!
//! together with the Hessian spectrum at a point: the index set of strictly
//! positive eigenvalues, the mass of the non-positive ones, and the
//! Schroedinger potential term `tau^2 |grad V|^2 - tau Delta V`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius_norm, jacobi_eigen};
use crate::poly::{multi_indices_in_range, MultiIndex, Polynomial};

/// A potential together with the derivative-order cap `k`.
///
/// All derivative polynomials with `1 <= |alpha| <= k+1` are expanded once at
/// construction; evaluation afterwards is pure and cheap.
#[derive(Debug, Clone)]
pub struct Potential {
    v: Polynomial,
    k: u32,
    /// (alpha, d^alpha V) for 1 <= |alpha| <= k+1, graded-lex order.
    derivs: Vec<(MultiIndex, Polynomial)>,
    grad: Vec<Polynomial>,
    hess: Vec<Vec<Polynomial>>,
    laplacian: Polynomial,
}

impl Potential {
    pub fn new(v: Polynomial, k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid(format!("k must be >= 2, got {k}")));
        }
        if v.dimension() == 0 {
            return Err(Error::invalid("potential dimension must be >= 1"));
        }
        let derivs = multi_indices_in_range(v.dimension(), 1, k + 1)
            .into_iter()
            .map(|alpha| {
                let d = v.derive(&alpha).expect("enumerated indices match dimension");
                (alpha, d)
            })
            .collect();
        let grad = v.gradient();
        let hess = v.hessian();
        let laplacian = v.laplacian();
        Ok(Potential {
            v,
            k,
            derivs,
            grad,
            hess,
            laplacian,
        })
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.v
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn dimension(&self) -> usize {
        self.v.dimension()
    }

    /// Number of multi-indices with `1 <= |alpha| <= k`.
    pub fn weight_term_count(&self) -> usize {
        self.derivs
            .iter()
            .filter(|(a, _)| a.order() <= self.k)
            .count()
    }

    /// Constant `C_k` with `f <= C_k (1 + ftilde)`: twice the number of
    /// weight terms, from `(1+t^2)^(1/(2m)) <= 1 + |t|^(1/m)` summed.
    pub fn c_k(&self) -> f64 {
        2.0 * self.weight_term_count() as f64
    }

    /// Derivative polynomials `d^alpha V` for `1 <= |alpha| <= k+1`.
    pub fn derivatives(&self) -> &[(MultiIndex, Polynomial)] {
        &self.derivs
    }

    pub fn gradient_polys(&self) -> &[Polynomial] {
        &self.grad
    }

    pub fn laplacian_poly(&self) -> &Polynomial {
        &self.laplacian
    }

    /// `sum_{1<=|a|<=k} |d^a V(x)|^(1/|a|)`, every mixed index included.
    pub fn ftilde(&self, x: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for (alpha, d) in &self.derivs {
            let m = alpha.order();
            if m > self.k {
                continue;
            }
            acc += d.eval(x)?.abs().powf(1.0 / m as f64);
        }
        Ok(acc)
    }

    /// Regularized weight `sum (1 + |d^a V(x)|^2)^(1/(2|a|))`; always
    /// at least the number of weight terms, and at least `ftilde`.
    pub fn f_reg(&self, x: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for (alpha, d) in &self.derivs {
            let m = alpha.order();
            if m > self.k {
                continue;
            }
            let t = d.eval(x)?;
            acc += (1.0 + t * t).powf(1.0 / (2.0 * m as f64));
        }
        Ok(acc)
    }

    /// `sum tau^(1/|a|) |d^a V(x)|^(1/|a|)`; equals `ftilde` at `tau = 1`
    /// and is nondecreasing in `tau`.
    pub fn ftilde_tau(&self, x: &[f64], tau: f64) -> Result<f64> {
        if tau <= 0.0 {
            return Err(Error::invalid(format!("tau must be > 0, got {tau}")));
        }
        let mut acc = 0.0;
        for (alpha, d) in &self.derivs {
            let m = alpha.order();
            if m > self.k {
                continue;
            }
            let inv = 1.0 / m as f64;
            acc += tau.powf(inv) * d.eval(x)?.abs().powf(inv);
        }
        Ok(acc)
    }

    /// Gradient vector `grad V(x)`.
    pub fn gradient_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.grad.iter().map(|g| g.eval(x)).collect()
    }

    /// Dense row-major Hessian values at `x`.
    pub fn hessian_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dimension();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.hess[i][j].eval(x)?;
            }
        }
        Ok(out)
    }

    /// `tau^2 |grad V(x)|^2 - tau Delta V(x)`.
    pub fn witten_potential_term(&self, tau: f64, x: &[f64]) -> Result<f64> {
        if tau <= 0.0 {
            return Err(Error::invalid(format!("tau must be > 0, got {tau}")));
        }
        let g = self.gradient_at(x)?;
        let grad_sq: f64 = g.iter().map(|v| v * v).sum();
        Ok(tau * tau * grad_sq - tau * self.laplacian.eval(x)?)
    }

    /// Full pointwise report: gradient, Hessian, its spectrum (by cyclic
    /// Jacobi), the strictly-positive index set, and the weight values.
    pub fn analyze_point(&self, x: &[f64]) -> Result<PointAnalysis> {
        let n = self.dimension();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        let grad = self.gradient_at(x)?;
        let hess = self.hessian_at(x)?;
        let (lambdas, _) = jacobi_eigen(&hess, n)?;
        let zero_tol = 1e-12 * (1.0 + frobenius_norm(&hess));
        let mut i_pos = Vec::new();
        let mut pos_sum = 0.0;
        let mut m_neg = 0.0;
        for (idx, &l) in lambdas.iter().enumerate() {
            // |lambda| below the rounding threshold counts as an exact zero:
            // excluded from the positive index set, contributing 0 to m_neg.
            if l > zero_tol {
                i_pos.push(idx);
                pos_sum += l;
            } else if l < -zero_tol {
                m_neg += -l;
            }
        }
        Ok(PointAnalysis {
            x: x.to_vec(),
            grad,
            hess,
            lambdas,
            i_pos,
            pos_sum,
            m_neg,
            ftilde_val: self.ftilde(x)?,
            f_val: self.f_reg(x)?,
        })
    }
}

/// All pointwise quantities at a sample `x`. Eigenvalues are ascending.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointAnalysis {
    pub x: Vec<f64>,
    pub grad: Vec<f64>,
    /// Row-major dense Hessian values.
    pub hess: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Positions (into `lambdas`) of the strictly positive eigenvalues.
    pub i_pos: Vec<usize>,
    /// `sum_{j in I_x} lambda_j`.
    pub pos_sum: f64,
    /// `M(x) = sum_{j not in I_x} (-lambda_j)`.
    pub m_neg: f64,
    pub ftilde_val: f64,
    pub f_val: f64,
}

impl PointAnalysis {
    pub fn grad_norm_sq(&self) -> f64 {
        self.grad.iter().map(|v| v * v).sum()
    }

    pub fn trace(&self) -> f64 {
        let n = self.grad.len();
        (0..n).map(|i| self.hess[i * n + i]).sum()
    }
}
