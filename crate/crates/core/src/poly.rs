//! Exact multivariate polynomial arithmetic.
//!
//! Polynomials are the carrier for every potential analyzed by this crate:
//! evaluation, coefficient-level differentiation, and the affine rescaling
//! `tau * [p(y + h x) - p(y)]` that generates limiting polynomials. All
//! coefficient operations are pure f64 arithmetic; nothing is sampled or
//! approximated at this layer.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exponent vector of a monomial, one entry per ambient dimension.
///
/// Ordered graded-lexicographically: first by total order `|alpha|`, then
/// lexicographically on the exponents. Term storage and evaluation follow
/// this order, which makes every derived artifact deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    /// The zero multi-index (constant term) in dimension `n`.
    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The unit multi-index `e_i` in dimension `n`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex(e)
    }

    /// Total order `|alpha|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// `alpha!` as an exact f64 (desk-scale orders keep this well inside 2^53).
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&e| (1..=e as u64).product::<u64>() as f64)
            .product()
    }

    /// Componentwise sum.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), other.len());
        MultiIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Componentwise difference, `None` if any entry would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut out = Vec::with_capacity(self.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex(out))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Every multi-index of dimension `n` with total order exactly `m`,
/// in graded-lex order.
pub fn multi_indices_of_order(n: usize, m: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    fill(&mut out, &mut current, 0, m);
    fn fill(out: &mut Vec<MultiIndex>, current: &mut Vec<u32>, pos: usize, remaining: u32) {
        if pos + 1 == current.len() {
            current[pos] = remaining;
            out.push(MultiIndex::new(current.clone()));
            return;
        }
        for e in (0..=remaining).rev() {
            current[pos] = e;
            fill(out, current, pos + 1, remaining - e);
        }
        current[pos] = 0;
    }
    out.sort();
    out
}

/// Every multi-index with `lo <= |alpha| <= hi`, in graded-lex order.
pub fn multi_indices_in_range(n: usize, lo: u32, hi: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for m in lo..=hi {
        out.extend(multi_indices_of_order(n, m));
    }
    out
}

/// Sparse multivariate polynomial with f64 coefficients.
///
/// Invariants: no stored zero coefficient, every key has length equal to
/// `dimension`, terms iterate in graded-lex order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dimension: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn zero(dimension: usize) -> Self {
        Polynomial {
            dimension,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dimension: usize, c: f64) -> Self {
        let mut p = Polynomial::zero(dimension);
        p.insert_term(MultiIndex::zeros(dimension), c);
        p
    }

    /// The coordinate polynomial `x_i`.
    pub fn variable(dimension: usize, i: usize) -> Self {
        assert!(i < dimension, "variable index out of range");
        let mut p = Polynomial::zero(dimension);
        p.insert_term(MultiIndex::unit(dimension, i), 1.0);
        p
    }

    /// Single term `c * x^alpha`.
    pub fn monomial(alpha: MultiIndex, c: f64) -> Self {
        let mut p = Polynomial::zero(alpha.len());
        p.insert_term(alpha, c);
        p
    }

    /// Builds from `(exponents, coefficient)` pairs; repeated multi-indices
    /// are summed. Fails on inconsistent exponent lengths.
    pub fn from_terms<I>(dimension: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut p = Polynomial::zero(dimension);
        for (exps, c) in terms {
            if exps.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: exps.len(),
                });
            }
            p.add_term(MultiIndex::new(exps), c);
        }
        Ok(p)
    }

    fn insert_term(&mut self, alpha: MultiIndex, c: f64) {
        // Exact-zero pruning only; rounding never prunes.
        if c != 0.0 {
            self.terms.insert(alpha, c);
        }
    }

    fn add_term(&mut self, alpha: MultiIndex, c: f64) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(alpha) {
            Entry::Vacant(slot) => {
                if c != 0.0 {
                    slot.insert(c);
                }
            }
            Entry::Occupied(mut slot) => {
                let sum = *slot.get() + c;
                if sum == 0.0 {
                    slot.remove();
                } else {
                    *slot.get_mut() = sum;
                }
            }
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Max total order over stored terms; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::order).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when the polynomial has no term of order >= 1.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|a| a.order() == 0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(k, v)| (k, *v))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> f64 {
        self.terms.get(alpha).copied().unwrap_or(0.0)
    }

    /// Evaluates at `x` in graded-lex term order.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        let mut acc = 0.0;
        for (alpha, c) in &self.terms {
            let mut term = c * 1.0;
            for (xi, &e) in x.iter().zip(alpha.exponents()) {
                if e > 0 {
                    term *= xi.powi(e as i32);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Exact coefficient-level partial derivative `d^alpha p`.
    pub fn derive(&self, alpha: &MultiIndex) -> Result<Polynomial> {
        if alpha.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: alpha.len(),
            });
        }
        let mut out = Polynomial::zero(self.dimension);
        for (beta, c) in &self.terms {
            if let Some(target) = beta.checked_sub(alpha) {
                // Falling-factorial factor prod_i beta_i (beta_i-1) ... (beta_i-alpha_i+1).
                let mut factor = 1.0;
                for (&b, &a) in beta.exponents().iter().zip(alpha.exponents()) {
                    for k in 0..a {
                        factor *= (b - k) as f64;
                    }
                }
                out.add_term(target, c * factor);
            }
        }
        Ok(out)
    }

    /// First partial in direction `i`.
    pub fn partial(&self, i: usize) -> Polynomial {
        self.derive(&MultiIndex::unit(self.dimension, i))
            .expect("unit index has matching dimension")
    }

    /// Componentwise gradient.
    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.dimension).map(|i| self.partial(i)).collect()
    }

    /// Symmetric matrix of second partials, `hess[i][j] = d_i d_j p`.
    pub fn hessian(&self) -> Vec<Vec<Polynomial>> {
        let n = self.dimension;
        let mut rows: Vec<Vec<Polynomial>> = vec![vec![Polynomial::zero(n); n]; n];
        for i in 0..n {
            for j in i..n {
                let mut alpha = vec![0u32; n];
                alpha[i] += 1;
                alpha[j] += 1;
                let d = self
                    .derive(&MultiIndex::new(alpha))
                    .expect("matching dimension");
                rows[i][j] = d.clone();
                if i != j {
                    rows[j][i] = d;
                }
            }
        }
        rows
    }

    /// `sum_i d_ii p`.
    pub fn laplacian(&self) -> Polynomial {
        let n = self.dimension;
        let mut out = Polynomial::zero(n);
        for i in 0..n {
            let mut alpha = vec![0u32; n];
            alpha[i] = 2;
            out = out.add(&self.derive(&MultiIndex::new(alpha)).expect("dims"));
        }
        out
    }

    /// The exact polynomial `tau * [p(y + h x) - p(y)]`.
    ///
    /// The coefficient of `x^alpha` is `tau h^|alpha| d^alpha p(y) / alpha!`;
    /// the constant term is zero by construction.
    pub fn affine_rescale(&self, y: &[f64], h: f64, tau: f64) -> Result<Polynomial> {
        if y.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: y.len(),
            });
        }
        if h <= 0.0 || tau <= 0.0 {
            return Err(Error::invalid(format!(
                "affine_rescale requires h > 0 and tau > 0, got h={h}, tau={tau}"
            )));
        }
        let mut out = Polynomial::zero(self.dimension);
        let deg = self.degree();
        for alpha in multi_indices_in_range(self.dimension, 1, deg.max(1)) {
            let d = self.derive(&alpha)?;
            let c = tau * h.powi(alpha.order() as i32) * d.eval(y)? / alpha.factorial();
            out.add_term(alpha, c);
        }
        Ok(out)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.dimension, other.dimension, "dimension mismatch in add");
        let mut out = self.clone();
        for (alpha, c) in &other.terms {
            out.add_term(alpha.clone(), *c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut out = Polynomial::zero(self.dimension);
        for (alpha, c) in &self.terms {
            out.insert_term(alpha.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.dimension, other.dimension, "dimension mismatch in mul");
        let mut out = Polynomial::zero(self.dimension);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.add(b), ca * cb);
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exponents: Vec<u32>,
    coeff: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    dimension: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = PolyRepr {
            dimension: self.dimension,
            terms: self
                .terms
                .iter()
                .map(|(alpha, c)| TermRepr {
                    exponents: alpha.exponents().to_vec(),
                    coeff: *c,
                })
                .collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(deserializer)?;
        if repr.dimension == 0 {
            return Err(D::Error::custom("polynomial dimension must be >= 1"));
        }
        let mut p = Polynomial::zero(repr.dimension);
        for t in repr.terms {
            if t.exponents.len() != repr.dimension {
                return Err(D::Error::custom(format!(
                    "exponent vector {:?} has length {}, expected {}",
                    t.exponents,
                    t.exponents.len(),
                    repr.dimension
                )));
            }
            if !t.coeff.is_finite() {
                return Err(D::Error::custom("non-finite coefficient"));
            }
            let alpha = MultiIndex::new(t.exponents);
            if p.terms.contains_key(&alpha) {
                return Err(D::Error::custom(format!(
                    "duplicate exponent vector {alpha}"
                )));
            }
            p.insert_term(alpha, t.coeff);
        }
        Ok(p)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (alpha, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &e) in alpha.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    /// x1^2 x2^2
    fn x1sq_x2sq() -> Polynomial {
        Polynomial::from_terms(2, vec![(vec![2, 2], 1.0)]).unwrap()
    }

    #[test]
    fn eval_basic() {
        let p = x1sq_x2sq();
        assert_eq!(p.eval(&[1.0, 2.0]).unwrap(), 4.0);
        let z = Polynomial::zero(3);
        assert_eq!(z.eval(&[5.0, -1.0, 0.5]).unwrap(), 0.0);
    }

    #[test]
    fn eval_phi_minus_one_on_axis() {
        // Phi_{-1} = (x1^2 - x2)^2 - x2^2 collapses to zero on the x2-axis:
        // expanding at x1 = 0 gives x2^2 - x2^2.
        let phi = crate::families::phi_delta(-1.0);
        assert_eq!(phi.eval(&[0.0, -10.0]).unwrap(), 0.0);
    }

    #[test]
    fn eval_dimension_mismatch() {
        let p = x1sq_x2sq();
        assert!(matches!(
            p.eval(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn derive_mixed() {
        let p = x1sq_x2sq();
        let d = p.derive(&MultiIndex::new(vec![1, 1])).unwrap();
        // 4 x1 x2
        assert_eq!(d.coeff(&MultiIndex::new(vec![1, 1])), 4.0);
        assert_eq!(d.num_terms(), 1);
    }

    #[test]
    fn laplacian_of_v_delta() {
        // Delta V_delta = 2 x1^2 + 2 x2^2 + 4 delta.
        let delta = 0.75;
        let v = crate::families::v_delta(delta);
        let lap = v.laplacian();
        assert_eq!(lap.coeff(&MultiIndex::new(vec![2, 0])), 2.0);
        assert_eq!(lap.coeff(&MultiIndex::new(vec![0, 2])), 2.0);
        assert_eq!(lap.coeff(&MultiIndex::zeros(2)), 4.0 * delta);
    }

    #[test]
    fn derive_beyond_degree_is_zero() {
        let p = x1sq_x2sq();
        let d = p.derive(&MultiIndex::new(vec![3, 2])).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn derive_composes() {
        let p = Polynomial::from_terms(
            2,
            vec![(vec![3, 1], 2.0), (vec![1, 2], -1.5), (vec![0, 4], 0.25)],
        )
        .unwrap();
        let a = MultiIndex::new(vec![1, 0]);
        let b = MultiIndex::new(vec![1, 1]);
        let lhs = p.derive(&a).unwrap().derive(&b).unwrap();
        let rhs = p.derive(&a.add(&b)).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn affine_rescale_binomial() {
        // p = x^2, y = 1, h = 1, tau = 1 -> (1+x)^2 - 1 = x^2 + 2x.
        let p = Polynomial::from_terms(1, vec![(vec![2], 1.0)]).unwrap();
        let q = p.affine_rescale(&[1.0], 1.0, 1.0).unwrap();
        assert_eq!(q.coeff(&MultiIndex::new(vec![2])), 1.0);
        assert_eq!(q.coeff(&MultiIndex::new(vec![1])), 2.0);
        assert_eq!(q.coeff(&MultiIndex::zeros(1)), 0.0);
    }

    #[test]
    fn affine_rescale_scaling_family_is_j_independent() {
        // p = x^2 with y = 1/j, h = 1/j, tau = j^2 gives x^2 + 2x for every j.
        let p = Polynomial::from_terms(1, vec![(vec![2], 1.0)]).unwrap();
        for j in [1.0_f64, 2.0, 7.0, 64.0] {
            let q = p.affine_rescale(&[1.0 / j], 1.0 / j, j * j).unwrap();
            close(q.coeff(&MultiIndex::new(vec![2])), 1.0, 1e-12);
            close(q.coeff(&MultiIndex::new(vec![1])), 2.0, 1e-12);
        }
    }

    #[test]
    fn affine_rescale_coefficient_matches_derivative_route() {
        // Coefficient of x1 x2 equals tau h^2 d1 d2 p(y).
        let p = x1sq_x2sq();
        let q = p.affine_rescale(&[1.0, 1.0], 1.0, 1.0).unwrap();
        let d = p.derive(&MultiIndex::new(vec![1, 1])).unwrap();
        close(
            q.coeff(&MultiIndex::new(vec![1, 1])),
            d.eval(&[1.0, 1.0]).unwrap(),
            1e-12,
        );
        assert_eq!(q.coeff(&MultiIndex::new(vec![1, 1])), 4.0);
    }

    #[test]
    fn affine_rescale_matches_pointwise_definition() {
        // Independent route: evaluate tau*[p(y+hx) - p(y)] directly.
        let p = Polynomial::from_terms(
            2,
            vec![(vec![2, 2], 1.0), (vec![2, 0], 0.5), (vec![1, 1], -2.0)],
        )
        .unwrap();
        let (y, h, tau) = ([0.3, -0.7], 0.25, 3.0);
        let q = p.affine_rescale(&y, h, tau).unwrap();
        for x in [[0.0, 0.0], [1.0, 2.0], [-1.5, 0.4], [0.2, -0.9]] {
            let shifted = [y[0] + h * x[0], y[1] + h * x[1]];
            let direct = tau * (p.eval(&shifted).unwrap() - p.eval(&y).unwrap());
            close(q.eval(&x).unwrap(), direct, 1e-12);
        }
    }

    #[test]
    fn hessian_of_phi_delta() {
        // Exact Hessian of (x1^2-x2)^2 + delta x2^2:
        // [[12 x1^2 - 4 x2, -4 x1], [-4 x1, 2(1+delta)]].
        let delta = -1.0;
        let phi = crate::families::phi_delta(delta);
        let h = phi.hessian();
        assert_eq!(h[0][0].coeff(&MultiIndex::new(vec![2, 0])), 12.0);
        assert_eq!(h[0][0].coeff(&MultiIndex::new(vec![0, 1])), -4.0);
        assert_eq!(h[0][1].coeff(&MultiIndex::new(vec![1, 0])), -4.0);
        assert_eq!(h[1][0], h[0][1]);
        assert_eq!(h[1][1].coeff(&MultiIndex::zeros(2)), 2.0 * (1.0 + delta));
        assert!(h[1][1].is_constant());
    }

    #[test]
    fn linear_polynomial_has_zero_hessian() {
        let p = Polynomial::from_terms(2, vec![(vec![1, 0], 3.0), (vec![0, 1], -2.0)]).unwrap();
        for row in p.hessian() {
            for entry in row {
                assert!(entry.is_zero());
            }
        }
    }

    #[test]
    fn gradient_of_v_one() {
        let v = crate::families::v_delta(1.0);
        let g = v.gradient();
        let at = [1.0, 1.0];
        assert_eq!(g[0].eval(&at).unwrap(), 4.0);
        assert_eq!(g[1].eval(&at).unwrap(), 4.0);
    }

    #[test]
    fn gradient_matches_central_difference() {
        let v = crate::families::v_delta(1.0);
        let g = v.gradient();
        let x = [0.8, -1.3];
        let step = 1e-6;
        for i in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += step;
            xm[i] -= step;
            let fd = (v.eval(&xp).unwrap() - v.eval(&xm).unwrap()) / (2.0 * step);
            close(g[i].eval(&x).unwrap(), fd, 1e-6);
        }
    }

    #[test]
    fn json_round_trip_and_rejections() {
        let p = crate::families::phi_delta(0.5);
        let s = serde_json::to_string(&p).unwrap();
        let q: Polynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);

        let dup = r#"{"dimension":2,"terms":[
            {"exponents":[2,0],"coeff":1.0},
            {"exponents":[2,0],"coeff":2.0}]}"#;
        assert!(serde_json::from_str::<Polynomial>(dup).is_err());

        let badlen = r#"{"dimension":2,"terms":[{"exponents":[2],"coeff":1.0}]}"#;
        assert!(serde_json::from_str::<Polynomial>(badlen).is_err());
    }

    #[test]
    fn multi_index_enumeration_counts() {
        // n=2: orders 1..4 give 2+3+4+5 = 14 indices.
        assert_eq!(multi_indices_in_range(2, 1, 4).len(), 14);
        assert_eq!(multi_indices_of_order(3, 2).len(), 6);
        // Graded-lex: order ascending, lexicographic within an order.
        let idx = multi_indices_in_range(2, 1, 2);
        let as_vecs: Vec<_> = idx.iter().map(|a| a.exponents().to_vec()).collect();
        assert_eq!(
            as_vecs,
            vec![
                vec![0, 1],
                vec![1, 0],
                vec![0, 2],
                vec![1, 1],
                vec![2, 0]
            ]
        );
    }

    #[test]
    fn degree_and_pruning() {
        let mut p = Polynomial::zero(1);
        p.add_term(MultiIndex::new(vec![3]), 2.0);
        p.add_term(MultiIndex::new(vec![3]), -2.0);
        assert!(p.is_zero());
        assert_eq!(p.degree(), 0);
    }
}
