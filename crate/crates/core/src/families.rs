//! The two registered example potentials used throughout tests and the CLI.

use crate::poly::{MultiIndex, Polynomial};

/// A recognized example family, with its parameter recovered from the
/// coefficients. Sampling plans add the family's critical loci as rays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    VDelta(f64),
    PhiDelta(f64),
}

/// Structural match of a polynomial against the registered families.
pub fn detect(p: &Polynomial) -> Option<Family> {
    if p.dimension() != 2 {
        return None;
    }
    let c = |e: [u32; 2]| p.coeff(&MultiIndex::new(e.to_vec()));
    // x1^2 x2^2 + delta (x1^2 + x2^2)
    if c([2, 2]) == 1.0 {
        let delta = c([2, 0]);
        if c([0, 2]) == delta {
            let expected = if delta == 0.0 { 1 } else { 3 };
            if p.num_terms() == expected {
                return Some(Family::VDelta(delta));
            }
        }
    }
    // x1^4 - 2 x1^2 x2 + (1 + delta) x2^2
    if c([4, 0]) == 1.0 && c([2, 1]) == -2.0 {
        let delta = c([0, 2]) - 1.0;
        let expected = if delta == -1.0 { 2 } else { 3 };
        if p.num_terms() == expected {
            return Some(Family::PhiDelta(delta));
        }
    }
    None
}

/// `V_delta(x) = x1^2 x2^2 + delta (x1^2 + x2^2)`.
pub fn v_delta(delta: f64) -> Polynomial {
    Polynomial::from_terms(
        2,
        vec![(vec![2, 2], 1.0), (vec![2, 0], delta), (vec![0, 2], delta)],
    )
    .expect("static term list")
}

/// `Phi_delta(x) = (x1^2 - x2)^2 + delta x2^2`, expanded:
/// `x1^4 - 2 x1^2 x2 + (1 + delta) x2^2`.
pub fn phi_delta(delta: f64) -> Polynomial {
    Polynomial::from_terms(
        2,
        vec![
            (vec![4, 0], 1.0),
            (vec![2, 1], -2.0),
            (vec![0, 2], 1.0 + delta),
        ],
    )
    .expect("static term list")
}
