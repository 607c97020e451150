//! Numerical toolkit around a compact-resolvent criterion for Witten
//! Laplacians on 0-forms built from polynomial potentials.
//!
//! The crate provides:
//! - exact multivariate polynomial arithmetic ([`poly`]),
//! - pointwise potential analysis: derivative weights, Hessian spectra ([`potential`]),
//! - sampled verification of the eigenvalue-control criterion ([`criterion`]),
//! - scaling limits of polynomials and no-local-minimum certificates ([`limitpoly`]),
//! - slowly varying metrics and quadratic partitions of unity ([`localization`]),
//! - finite-difference Witten operators, Lanczos eigensolvers and
//!   compactness probes ([`spectral`]).

pub mod criterion;
pub mod error;
pub mod families;
pub mod limitpoly;
pub mod linalg;
pub mod localization;
pub mod poly;
pub mod potential;
pub mod sampling;
pub mod spectral;

pub use error::{Error, Result};
pub use poly::{MultiIndex, Polynomial};
pub use potential::{PointAnalysis, Potential};
