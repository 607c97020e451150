//! Small dense symmetric eigenroutines.
//!
//! Cyclic Jacobi is used on pointwise Hessians (n is the ambient dimension,
//! so tiny); the tridiagonal QL solver backs Ritz extraction in the Lanczos
//! driver. Both return eigenvalues ascending.

use crate::error::{Error, Result};

/// Row-major dense symmetric matrix access helper.
#[inline]
fn at(a: &[f64], n: usize, i: usize, j: usize) -> f64 {
    a[i * n + j]
}

pub fn frobenius_norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += 2.0 * at(a, n, i, j).powi(2);
        }
    }
    s.sqrt()
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(lambda, q)` with `lambda` ascending and `q` row-major such that
/// `a = q^T diag(lambda) q`, so the rows of `q` are the eigenvectors. Sweeps
/// stop once the off-diagonal norm drops below `1e-12 * ||a||_F`; more than
/// 100 sweeps is reported as a numerical failure.
pub fn jacobi_eigen(a: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    assert_eq!(a.len(), n * n, "matrix size mismatch");
    let norm = frobenius_norm(a);
    let tol = 1e-12 * norm;
    let mut m = a.to_vec();
    // v accumulates the rotation product with columns as eigenvectors:
    // a = v diag(lambda) v^T.
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    if n > 1 && norm > 0.0 {
        let mut converged = false;
        for _sweep in 0..100 {
            if off_diagonal_norm(&m, n) <= tol {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = m[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = m[p * n + p];
                    let aqq = m[q * n + q];
                    let theta = 0.5 * (aqq - app) / apq;
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        1.0 / (theta - (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;

                    for k in 0..n {
                        let mkp = m[k * n + p];
                        let mkq = m[k * n + q];
                        m[k * n + p] = c * mkp - s * mkq;
                        m[k * n + q] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let mpk = m[p * n + k];
                        let mqk = m[q * n + k];
                        m[p * n + k] = c * mpk - s * mqk;
                        m[q * n + k] = s * mpk + c * mqk;
                    }
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        if !converged && off_diagonal_norm(&m, n) > tol {
            return Err(Error::Numerical(
                "Jacobi rotations did not converge within 100 sweeps".into(),
            ));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[i * n + i]
            .partial_cmp(&m[j * n + j])
            .expect("symmetric eigenvalues are finite")
    });
    let lambda: Vec<f64> = order.iter().map(|&i| m[i * n + i]).collect();
    // Row k of q = eigenvector for lambda[k] = column order[k] of v.
    let mut q = vec![0.0; n * n];
    for (k, &col) in order.iter().enumerate() {
        for r in 0..n {
            q[k * n + r] = v[r * n + col];
        }
    }
    Ok((lambda, q))
}

/// QL with implicit shifts on a symmetric tridiagonal matrix. Eigenvectors
/// are tracked through the `rotate(i, s, c)` callback, which must apply the
/// plane rotation to columns `i` and `i+1` of whatever representation the
/// caller maintains. Returns the unsorted eigenvalues.
fn ql_implicit(
    diag: &[f64],
    off: &[f64],
    mut rotate: impl FnMut(usize, f64, f64),
) -> Result<Vec<f64>> {
    let m = diag.len();
    assert_eq!(off.len() + 1, m, "off-diagonal length mismatch");
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);

    for l in 0..m {
        let mut iter = 0;
        loop {
            let mut mm = l;
            while mm + 1 < m {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= f64::EPSILON * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::Numerical(
                    "tridiagonal QL did not converge within 50 iterations".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[mm] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut deflated = false;
            for i in (l..mm).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[mm] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                rotate(i, s, c);
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mm] = 0.0;
        }
    }
    Ok(d)
}

fn sort_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    order
}

/// Eigendecomposition of a symmetric tridiagonal matrix. Returns eigenvalues
/// ascending and the eigenvector matrix (row-major, m x m) with row k holding
/// the eigenvector of eigenvalue k.
pub fn tridiag_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = diag.len();
    let mut z = vec![0.0; m * m];
    for i in 0..m {
        z[i * m + i] = 1.0;
    }
    let d = ql_implicit(diag, off, |i, s, c| {
        for k in 0..m {
            let f = z[k * m + i + 1];
            z[k * m + i + 1] = s * z[k * m + i] + c * f;
            z[k * m + i] = c * z[k * m + i] - s * f;
        }
    })?;
    let order = sort_order(&d);
    let lambda: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut rows = vec![0.0; m * m];
    for (k, &col) in order.iter().enumerate() {
        for r in 0..m {
            rows[k * m + r] = z[r * m + col];
        }
    }
    Ok((lambda, rows))
}

/// Eigenvalues (ascending) plus only the bottom component of each
/// eigenvector, which is all a Lanczos residual estimate needs, at O(m^2) instead
/// of O(m^3).
pub fn tridiag_eigen_bottom(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = diag.len();
    let mut bottom = vec![0.0; m];
    bottom[m - 1] = 1.0;
    let d = ql_implicit(diag, off, |i, s, c| {
        let f = bottom[i + 1];
        bottom[i + 1] = s * bottom[i] + c * f;
        bottom[i] = c * bottom[i] - s * f;
    })?;
    let order = sort_order(&d);
    Ok((
        order.iter().map(|&i| d[i]).collect(),
        order.iter().map(|&i| bottom[i]).collect(),
    ))
}

/// Eigenvalues of a symmetric 2x2 via the trace/determinant closed form.
/// Test oracle for the iterative routines.
pub fn eigen_2x2_closed_form(a11: f64, a12: f64, a22: f64) -> [f64; 2] {
    let tr = a11 + a22;
    let det = a11 * a22 - a12 * a12;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    [(tr - disc) / 2.0, (tr + disc) / 2.0]
}
