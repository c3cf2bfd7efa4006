//! The pencil data model on the loop graph.
//!
//! Edges `e_1..e_{m-1}` run from a boundary vertex (`x = 0`, Dirichlet) to the
//! central vertex (`x = π`); edge `e_m` is a loop with both ends at the
//! central vertex. Every edge has length π, so there is no length field.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cheb::ChebSeries;
use crate::error::{Error, Result};

/// Pencil coefficients `(p, q)` of one edge with the cached mean of `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "EdgeRepr", into = "EdgeRepr")]
pub struct EdgeCoefficients {
    p: ChebSeries,
    q: ChebSeries,
    alpha: Complex64,
}

#[derive(Serialize, Deserialize)]
struct EdgeRepr {
    p: ChebSeries,
    q: ChebSeries,
}

impl From<EdgeRepr> for EdgeCoefficients {
    fn from(r: EdgeRepr) -> Self {
        EdgeCoefficients::new(r.p, r.q)
    }
}

impl From<EdgeCoefficients> for EdgeRepr {
    fn from(e: EdgeCoefficients) -> Self {
        EdgeRepr { p: e.p, q: e.q }
    }
}

impl EdgeCoefficients {
    pub fn new(p: ChebSeries, q: ChebSeries) -> Self {
        let alpha = compute_alpha(&p);
        Self { p, q, alpha }
    }

    pub fn zero() -> Self {
        Self::new(ChebSeries::zero(), ChebSeries::zero())
    }

    /// Builds an edge by Chebyshev interpolation of real coefficient functions.
    pub fn from_real_fns<P: Fn(f64) -> f64, Q: Fn(f64) -> f64>(p: P, q: Q, degree: usize) -> Self {
        Self::new(ChebSeries::from_real_fn(p, degree), ChebSeries::from_real_fn(q, degree))
    }

    pub fn p(&self) -> &ChebSeries {
        &self.p
    }

    pub fn q(&self) -> &ChebSeries {
        &self.q
    }

    /// `α = (1/π) ∫_0^π p(t) dt`.
    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.q.is_finite()
    }

    /// Coefficients after the spectral shift `λ ↦ λ + c`:
    /// `p ↦ p + c`, `q ↦ q − 2cp − c²`.
    pub fn shifted(&self, c: Complex64) -> Self {
        let p = self.p.add_constant(c);
        let q = self
            .q
            .affine_combination(Complex64::new(1.0, 0.0), &self.p, -2.0 * c, -c * c);
        Self::new(p, q)
    }
}

/// `(1/π) ∫_0^π p(t) dt` via Gauss–Legendre quadrature exact for the stored degree.
pub fn compute_alpha(p: &ChebSeries) -> Complex64 {
    p.mean()
}

/// Problem L on the loop graph: `m ≥ 2` edges, the last one is the loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopGraphPencil {
    edges: Vec<EdgeCoefficients>,
}

impl LoopGraphPencil {
    pub fn new(edges: Vec<EdgeCoefficients>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidPencil(format!(
                "need at least 2 edges (one boundary edge and the loop), got {}",
                edges.len()
            )));
        }
        if let Some(j) = edges.iter().position(|e| !e.is_finite()) {
            return Err(Error::InvalidPencil(format!("edge {} has non-finite coefficients", j + 1)));
        }
        Ok(Self { edges })
    }

    /// Number of edges `m`.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[EdgeCoefficients] {
        &self.edges
    }

    /// Edge `j` with 1-based indexing as in the problem statement.
    pub fn edge(&self, j: usize) -> &EdgeCoefficients {
        &self.edges[j - 1]
    }

    pub fn loop_edge(&self) -> &EdgeCoefficients {
        self.edges.last().expect("m >= 2")
    }

    pub fn alphas(&self) -> Vec<Complex64> {
        self.edges.iter().map(|e| e.alpha()).collect()
    }

    /// Same pencil with edge `j` (1-based) replaced.
    pub fn with_edge(&self, j: usize, edge: EdgeCoefficients) -> Self {
        let mut edges = self.edges.clone();
        edges[j - 1] = edge;
        Self { edges }
    }

    /// Applies `λ ↦ λ + c` to every edge.
    pub fn shifted(&self, c: Complex64) -> Self {
        Self {
            edges: self.edges.iter().map(|e| e.shifted(c)).collect(),
        }
    }
}

/// Shifts the pencil so that `α_m = 0`.
///
/// Returns the shifted pencil and `C = −α_m`; eigenvalues of the result are
/// the original ones plus `C`.
pub fn normalize_shift(pencil: &LoopGraphPencil) -> (LoopGraphPencil, Complex64) {
    let alpha_m = pencil.loop_edge().alpha();
    if alpha_m.norm() <= 1e-15 {
        return (pencil.clone(), Complex64::new(0.0, 0.0));
    }
    let c = -alpha_m;
    (pencil.shifted(c), c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionTolerances {
    /// Largest admissible `|Im α_j|`.
    pub imag: f64,
    /// Minimal distance of `α_j − α_k` to the nearest integer.
    pub mod1_spacing: f64,
    /// Largest admissible `|α_m|`.
    pub alpha_m: f64,
}

impl Default for AssumptionTolerances {
    fn default() -> Self {
        Self {
            imag: 1e-10,
            mod1_spacing: 1e-8,
            alpha_m: 1e-10,
        }
    }
}

/// Outcome of the assumption checks; failures are data, not errors.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub a_holds: bool,
    pub a_i: bool,
    pub a_ii: bool,
    pub a_iii: bool,
    pub b_holds: Option<bool>,
    pub c_holds: Option<bool>,
    pub d_holds: Option<bool>,
    /// Human-readable description of every violation found.
    pub violations: Vec<String>,
}

/// Distance from `x` to the nearest integer.
pub fn dist_to_integer(x: f64) -> f64 {
    (x - x.round()).abs()
}

pub fn check_assumption_a(pencil: &LoopGraphPencil, tol: &AssumptionTolerances) -> AssumptionReport {
    let alphas = pencil.alphas();
    let m = alphas.len();
    let mut violations = Vec::new();

    let mut a_i = true;
    for (j, a) in alphas.iter().enumerate() {
        if a.im.abs() > tol.imag {
            a_i = false;
            violations.push(format!("(A)(i): α_{} = {} is not real", j + 1, a));
        }
    }

    let mut a_ii = true;
    for j in 0..m {
        for k in (j + 1)..m {
            if dist_to_integer(alphas[j].re - alphas[k].re) < tol.mod1_spacing {
                a_ii = false;
                violations.push(format!(
                    "(A)(ii): α_{} = {} ≡ α_{} = {} (mod 1)",
                    j + 1,
                    alphas[j].re,
                    k + 1,
                    alphas[k].re
                ));
            }
        }
    }

    let a_iii = alphas[m - 1].norm() <= tol.alpha_m;
    if !a_iii {
        violations.push(format!("(A)(iii): α_m = {} is not zero", alphas[m - 1]));
    }
    AssumptionReport {
        a_holds: a_i && a_ii && a_iii,
        a_i,
        a_ii,
        a_iii,
        violations,
        ..Default::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn const_edge(p: f64, q: f64) -> EdgeCoefficients {
        EdgeCoefficients::new(ChebSeries::from_real(&[p]), ChebSeries::from_real(&[q]))
    }

    #[test]
    fn alpha_of_simple_functions() {
        assert_eq!(EdgeCoefficients::zero().alpha(), Complex64::new(0.0, 0.0));
        assert!((const_edge(0.37, 0.0).alpha().re - 0.37).abs() < 1e-15);
        let e = EdgeCoefficients::from_real_fns(|t| t.cos(), |_| 0.0, 32);
        assert!(e.alpha().norm() < 1e-14);
        let e = EdgeCoefficients::from_real_fns(|t| t.sin(), |_| 0.0, 32);
        assert!((e.alpha().re - 2.0 / PI).abs() < 1e-13);
    }

    #[test]
    fn shift_of_unit_loop() {
        let pencil = LoopGraphPencil::new(vec![const_edge(0.3, 0.0), const_edge(1.0, 0.0)]).unwrap();
        let (shifted, c) = normalize_shift(&pencil);
        assert!((c - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        let lp = shifted.loop_edge();
        assert!(lp.alpha().norm() < 1e-12);
        assert!((lp.q().eval(1.0) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(lp.p().eval(2.0).norm() < 1e-14);
    }

    #[test]
    fn shift_is_identity_when_normalized() {
        let pencil = LoopGraphPencil::new(vec![const_edge(0.3, 0.1), const_edge(0.0, 0.2)]).unwrap();
        let (shifted, c) = normalize_shift(&pencil);
        assert_eq!(c, Complex64::new(0.0, 0.0));
        assert_eq!(shifted, pencil);
    }

    #[test]
    fn shift_applied_twice_equals_once() {
        let pencil = LoopGraphPencil::new(vec![
            EdgeCoefficients::from_real_fns(|t| 0.3 + 0.1 * t.cos(), |t| t.sin(), 16),
            EdgeCoefficients::from_real_fns(|t| 0.4 + 0.2 * t, |t| 0.5 * t, 16),
        ])
        .unwrap();
        let (once, _) = normalize_shift(&pencil);
        let (twice, c2) = normalize_shift(&once);
        assert!(c2.norm() < 1e-14);
        for (a, b) in once.edges().iter().zip(twice.edges()) {
            assert!(a.p().max_distance(b.p(), 100) < 1e-13);
            assert!(a.q().max_distance(b.q(), 100) < 1e-13);
        }
    }

    #[test]
    fn assumption_a_examples() {
        let tol = AssumptionTolerances::default();
        let zero = LoopGraphPencil::new(vec![EdgeCoefficients::zero(); 3]).unwrap();
        let r = check_assumption_a(&zero, &tol);
        assert!(!r.a_ii && !r.a_holds);

        let good = LoopGraphPencil::new(vec![const_edge(0.3, 0.0), const_edge(0.7, 0.0), const_edge(0.0, 0.0)]).unwrap();
        let r = check_assumption_a(&good, &tol);
        assert!(r.a_holds, "{:?}", r.violations);

        let congruent =
            LoopGraphPencil::new(vec![const_edge(0.3, 0.0), const_edge(1.3, 0.0), const_edge(0.0, 0.0)]).unwrap();
        let r = check_assumption_a(&congruent, &tol);
        assert!(!r.a_ii && r.a_i && r.a_iii);
    }

    #[test]
    fn rejects_single_edge() {
        assert!(LoopGraphPencil::new(vec![EdgeCoefficients::zero()]).is_err());
    }
}
