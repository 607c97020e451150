//! Finite-difference discretization of the Witten operator and the spectral
//! probes built on top of it.

mod grid;
mod lanczos;
mod operator;
mod probes;

pub use grid::Grid;
pub use lanczos::{lanczos_smallest, lanczos_smallest_shift_invert, SpectrumResult};
pub use operator::{
    assemble_witten, cg_solve, quadratic_form, stencil_form, LinearOp, ShiftInvertOp, ShiftedOp,
    SparseSymOperator,
};
pub use probes::{
    box_stability_probe, counting_function, ims_identity_check, m_tau, maximal_estimate_probe,
    BoxStabilityReport, BoxStabilityVerdict, MaximalEstimateReport, TestBump,
};
