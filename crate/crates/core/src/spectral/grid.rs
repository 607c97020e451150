//! Dirichlet discretization grids: only interior nodes carry unknowns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_UNKNOWNS: usize = 1_000_000;

/// Tensor grid of interior nodes on an axis-aligned box with zero boundary
/// conditions; `interior_per_dim[d]` unknowns in dimension `d`, spacing
/// `(hi - lo) / (m + 1)`. Row-major indexing, last dimension fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub box_bounds: Vec<[f64; 2]>,
    pub interior_per_dim: Vec<usize>,
}

impl Grid {
    pub fn new(box_bounds: Vec<[f64; 2]>, interior_per_dim: Vec<usize>) -> Result<Self> {
        if box_bounds.len() != interior_per_dim.len() {
            return Err(Error::DimensionMismatch {
                expected: box_bounds.len(),
                got: interior_per_dim.len(),
            });
        }
        let n = box_bounds.len();
        if n == 0 || n > 3 {
            return Err(Error::invalid(format!(
                "grid dimension must be 1..=3, got {n}"
            )));
        }
        for b in &box_bounds {
            let increasing = b[0] < b[1];
            if !increasing {
                return Err(Error::invalid(format!("degenerate box side {b:?}")));
            }
        }
        if interior_per_dim.iter().any(|&m| m < 8) {
            return Err(Error::invalid("need at least 8 interior nodes per dim"));
        }
        let total: usize = interior_per_dim.iter().product();
        if total > MAX_UNKNOWNS {
            return Err(Error::invalid(format!(
                "{total} unknowns exceeds the {MAX_UNKNOWNS} cap"
            )));
        }
        Ok(Grid {
            box_bounds,
            interior_per_dim,
        })
    }

    /// Grid on `box_bounds` with spacing as close to `h` as the box allows
    /// (the box side must be an integer multiple of `h` within rounding).
    pub fn with_spacing(box_bounds: Vec<[f64; 2]>, h: f64) -> Result<Self> {
        if h <= 0.0 {
            return Err(Error::invalid("spacing must be positive"));
        }
        let mut interior = Vec::with_capacity(box_bounds.len());
        for b in &box_bounds {
            let steps = (b[1] - b[0]) / h;
            let rounded = steps.round();
            if (steps - rounded).abs() > 1e-9 * steps.max(1.0) {
                return Err(Error::invalid(format!(
                    "box side {:?} is not a multiple of h={h}",
                    b
                )));
            }
            if rounded < 2.0 {
                return Err(Error::invalid("box too small for requested spacing"));
            }
            interior.push(rounded as usize - 1);
        }
        Grid::new(box_bounds, interior)
    }

    pub fn dimension(&self) -> usize {
        self.box_bounds.len()
    }

    pub fn num_unknowns(&self) -> usize {
        self.interior_per_dim.iter().product()
    }

    pub fn spacing(&self, d: usize) -> f64 {
        let b = self.box_bounds[d];
        (b[1] - b[0]) / (self.interior_per_dim[d] + 1) as f64
    }

    /// Quadrature cell volume `prod_d h_d`.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dimension()).map(|d| self.spacing(d)).product()
    }

    pub fn coords(&self, flat: usize) -> Vec<usize> {
        let n = self.dimension();
        let mut c = vec![0usize; n];
        let mut rest = flat;
        for d in (0..n).rev() {
            c[d] = rest % self.interior_per_dim[d];
            rest /= self.interior_per_dim[d];
        }
        c
    }

    pub fn flat(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.interior_per_dim)
            .fold(0usize, |acc, (&c, &m)| acc * m + c)
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        self.coords(flat)
            .iter()
            .enumerate()
            .map(|(d, &i)| self.box_bounds[d][0] + (i + 1) as f64 * self.spacing(d))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_nodes() {
        let g = Grid::new(vec![[0.0, 1.0]], vec![9]).unwrap();
        assert!((g.spacing(0) - 0.1).abs() < 1e-15);
        assert!((g.node(0)[0] - 0.1).abs() < 1e-15);
        assert!((g.node(8)[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn with_spacing_round_trip() {
        let g = Grid::with_spacing(vec![[-4.0, 4.0], [-4.0, 4.0]], 0.5).unwrap();
        assert_eq!(g.interior_per_dim, vec![15, 15]);
        assert!((g.spacing(0) - 0.5).abs() < 1e-12);
        assert!(Grid::with_spacing(vec![[0.0, 1.0]], 0.3).is_err());
    }

    #[test]
    fn validation() {
        assert!(Grid::new(vec![[0.0, 1.0]], vec![4]).is_err());
        assert!(Grid::new(vec![[0.0, 1.0]; 4], vec![8; 4]).is_err());
        assert!(Grid::new(vec![[1.0, 0.0]], vec![8]).is_err());
    }

    #[test]
    fn indexing_round_trip() {
        let g = Grid::new(vec![[0.0, 1.0], [0.0, 2.0]], vec![8, 9]).unwrap();
        for flat in 0..g.num_unknowns() {
            assert_eq!(g.flat(&g.coords(flat)), flat);
        }
    }
}
