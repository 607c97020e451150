//! Shared fixtures for the benchmark targets.

use witten_core::families::v_delta;
use witten_core::poly::Polynomial;
use witten_core::potential::Potential;
use witten_core::spectral::{assemble_witten, Grid, SparseSymOperator};

pub fn v_one_potential() -> Potential {
    Potential::new(v_delta(1.0), 4).expect("valid family potential")
}

pub fn harmonic_potential() -> Potential {
    let p = Polynomial::from_terms(1, vec![(vec![2], 0.5)]).expect("static terms");
    Potential::new(p, 2).expect("valid potential")
}

/// 1-d harmonic Witten operator with `m` interior nodes on [-8, 8].
pub fn harmonic_operator(m: usize) -> SparseSymOperator {
    let pot = harmonic_potential();
    let grid = Grid::new(vec![[-8.0, 8.0]], vec![m]).expect("valid grid");
    assemble_witten(&pot, 1.0, &grid).expect("assembly")
}

/// 2-d V_1 Witten operator with `m` interior nodes per dimension on [-6, 6]^2.
pub fn v_one_operator(m: usize) -> SparseSymOperator {
    let pot = v_one_potential();
    let grid = Grid::new(vec![[-6.0, 6.0]; 2], vec![m, m]).expect("valid grid");
    assemble_witten(&pot, 1.0, &grid).expect("assembly")
}
