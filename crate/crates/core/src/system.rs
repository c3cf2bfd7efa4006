//! Main equations shared by the edge and loop inversions.
//!
//! At an eigenvalue `λ` the characteristic function splits as
//! `λΔ = A·(s(λ) + ∫K e^{iλt}) + λB·(c(λ) + ∫X e^{iλt}) = 0`, where `(K, X)` is
//! `(K₁, N₁)` for the boundary edge and `(K_m, T_m)` for the loop, and
//! `s, c` are the corresponding leading terms. Each eigenvalue therefore
//! gives one linear equation for the Legendre coefficients of `(K, X)`,
//! and a double eigenvalue a second one from the λ-derivative.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::characteristic::{edge1_pair_from_edges, loop_pair_from_edges};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::legendre::{ExpMoments, LegendreSeries};
use crate::lsq::{self, LsqDiagnostics, LsqOptions};
use crate::pencil::EdgeCoefficients;
use crate::rk::IntegratorConfig;
use crate::shooting::integrate_edge;
use crate::spectral::{Subspectrum, SubspectrumKind, ThetaClass};

/// Rows with a divisor below this modulus are rejected.
pub const DIVISION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelPair {
    /// `K₁` or `K_m`.
    pub k: LegendreSeries,
    /// `N₁` for the boundary edge, `T_m = N_m + L_m` for the loop.
    pub second: LegendreSeries,
}

impl KernelPair {
    pub fn truncation(&self) -> usize {
        self.k.degree()
    }

    pub fn zeros(truncation: usize) -> Self {
        Self {
            k: LegendreSeries::zeros(truncation),
            second: LegendreSeries::zeros(truncation),
        }
    }

    /// Unknown vector in system order: coefficients of `K` then of the second kernel.
    pub fn to_vector(&self) -> DVector<Complex64> {
        DVector::from_iterator(
            self.k.coeffs.len() + self.second.coeffs.len(),
            self.k.coeffs.iter().chain(&self.second.coeffs).copied(),
        )
    }

    pub fn from_vector(x: &[Complex64]) -> Self {
        let h = x.len() / 2;
        Self {
            k: LegendreSeries::new(x[..h].to_vec()),
            second: LegendreSeries::new(x[h..].to_vec()),
        }
    }

    pub fn negated(&self) -> Self {
        let m1 = Complex64::new(-1.0, 0.0);
        Self {
            k: self.k.scaled(m1),
            second: self.second.scaled(m1),
        }
    }
}

/// Known-edge data at one subspectrum value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowSample {
    pub index: (i64, usize),
    pub lambda: Complex64,
    pub a: Jet,
    pub b: Jet,
    pub class: ThetaClass,
    pub m_theta: usize,
    pub order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowClass {
    Anchor,
    ThetaOne,
    ThetaTwo { j_theta: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemRow {
    pub index: Option<(i64, usize)>,
    pub lambda: Complex64,
    pub derivative: bool,
    pub class: RowClass,
    /// `B(λ)` for `Θ₁` rows, `A(λ)` for `Θ₂` rows, 1 for the anchor.
    pub divisor: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionSystem {
    pub kind: SubspectrumKind,
    pub truncation: usize,
    /// Mean of the unknown edge used in the right sides.
    pub alpha: f64,
    pub matrix: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
    pub rows: Vec<SystemRow>,
}

impl ReconstructionSystem {
    pub fn unknowns(&self) -> usize {
        self.matrix.ncols()
    }

    /// `|row(f) − rhs|` for every row.
    pub fn residuals(&self, kernels: &KernelPair) -> Vec<f64> {
        let r = &self.matrix * kernels.to_vector() - &self.rhs;
        r.iter().map(|z| z.norm()).collect()
    }
}

/// `(s, c)` leading terms of the unknown edge as jets in λ.
fn leading_terms(kind: SubspectrumKind, lambda: Complex64, alpha: f64) -> (Jet, Jet) {
    let phase = (Jet::var(lambda) - alpha).scale(Complex64::new(PI, 0.0));
    match kind {
        SubspectrumKind::Edge => (phase.sin(), phase.cos()),
        SubspectrumKind::Loop => (phase.sin(), phase.cos() * 2.0 - 2.0),
    }
}

/// Shoots the known edges at every subspectrum value.
///
/// `known` holds edges `2..=m` (loop last) for [`SubspectrumKind::Edge`] and
/// edges `1..=m−1` for [`SubspectrumKind::Loop`].
pub fn sample_rows(known: &[EdgeCoefficients], sub: &Subspectrum, cfg: &IntegratorConfig) -> Result<Vec<RowSample>> {
    if known.is_empty() {
        return Err(Error::InvalidArgument("no known edges".into()));
    }
    sub.entries
        .par_iter()
        .map(|e| {
            let deriv = e.m_theta > 1;
            let samples = known
                .iter()
                .map(|edge| integrate_edge(edge, e.lambda, deriv, cfg))
                .collect::<Result<Vec<_>>>()?;
            let (a, b) = match sub.kind {
                SubspectrumKind::Edge => edge1_pair_from_edges(&samples),
                SubspectrumKind::Loop => loop_pair_from_edges(&samples),
            };
            Ok(RowSample {
                index: e.index,
                lambda: e.lambda,
                a,
                b,
                class: e.class,
                m_theta: e.m_theta,
                order: e.order,
            })
        })
        .collect()
}

/// Builds the linear system for the Legendre coefficients of `(K, X)`.
pub fn assemble(kind: SubspectrumKind, rows: &[RowSample], alpha: f64, truncation: usize) -> Result<ReconstructionSystem> {
    let nk = truncation + 1;
    let mut matrix = DMatrix::zeros(rows.len() + 1, 2 * nk);
    let mut rhs = DVector::zeros(rows.len() + 1);
    let mut meta = Vec::with_capacity(rows.len() + 1);

    matrix[(0, 0)] = Complex64::new(2.0 * PI, 0.0);
    rhs[0] = Complex64::new((alpha * PI).sin(), 0.0);
    meta.push(SystemRow {
        index: None,
        lambda: Complex64::new(0.0, 0.0),
        derivative: false,
        class: RowClass::Anchor,
        divisor: Complex64::new(1.0, 0.0),
    });

    for (i, r) in rows.iter().enumerate() {
        let lam = Jet::var(r.lambda);
        let (s, c) = leading_terms(kind, r.lambda, alpha);
        let lb = lam * r.b;
        let g = -(r.a * s) - lb * c;
        let (divisor, class) = match r.class {
            ThetaClass::One => (r.b.v, RowClass::ThetaOne),
            ThetaClass::Two { j_theta } => (r.a.v, RowClass::ThetaTwo { j_theta }),
        };
        if divisor.norm() < DIVISION_TOL {
            return Err(Error::DivisionDegeneracy {
                lambda: r.lambda,
                magnitude: divisor.norm(),
            });
        }
        let inv = divisor.inv();
        let mom = ExpMoments::new(r.lambda, truncation);
        let derivative = r.order == 1;
        for k in 0..nk {
            let (ck, cx) = if derivative {
                (
                    r.a.d * mom.value[k] + r.a.v * mom.derivative[k],
                    lb.d * mom.value[k] + lb.v * mom.derivative[k],
                )
            } else {
                (r.a.v * mom.value[k], lb.v * mom.value[k])
            };
            matrix[(i + 1, k)] = ck * inv;
            matrix[(i + 1, nk + k)] = cx * inv;
        }
        rhs[i + 1] = if derivative { g.d } else { g.v } * inv;
        meta.push(SystemRow {
            index: Some(r.index),
            lambda: r.lambda,
            derivative,
            class,
            divisor,
        });
    }
    Ok(ReconstructionSystem {
        kind,
        truncation,
        alpha,
        matrix,
        rhs,
        rows: meta,
    })
}

fn column_scales(truncation: usize) -> Vec<f64> {
    let s: Vec<f64> = (0..=truncation).map(|k| ((2 * k + 1) as f64 / (2.0 * PI)).sqrt()).collect();
    s.iter().chain(&s).copied().collect()
}

/// Least-squares solve in the orthonormal Legendre scaling.
pub fn solve_matrix(
    matrix: &DMatrix<Complex64>,
    rhs: &DMatrix<Complex64>,
    truncation: usize,
    opts: &LsqOptions,
) -> Result<(DMatrix<Complex64>, LsqDiagnostics)> {
    let scale = column_scales(truncation);
    let mut a = matrix.clone();
    for (k, s) in scale.iter().enumerate() {
        a.column_mut(k).scale_mut(*s);
    }
    let (mut x, diag) = lsq::solve(&a, rhs, opts)?;
    for (k, s) in scale.iter().enumerate() {
        x.row_mut(k).scale_mut(*s);
    }
    Ok((x, diag))
}

pub fn solve_system(system: &ReconstructionSystem, opts: &LsqOptions) -> Result<(KernelPair, LsqDiagnostics)> {
    let b = DMatrix::from_column_slice(system.rhs.len(), 1, system.rhs.as_slice());
    let (x, diag) = solve_matrix(&system.matrix, &b, system.truncation, opts)?;
    Ok((KernelPair::from_vector(x.column(0).as_slice()), diag))
}

/// Mean of the boundary edge, modulo 1, that minimises the least-squares
/// residual of the edge system.
///
/// The right sides depend on `α` only through `(cos απ, sin απ)`, so the
/// weighted residual is a quadratic form on the unit circle and its minimiser
/// is the eigenvector of a 2×2 matrix. Returns `α ∈ [0, 1)` and the
/// residual ratio `√(μ_min/μ_max)` of the two eigenvalues.
pub fn residual_optimal_alpha(rows: &[RowSample], truncation: usize, opts: &LsqOptions) -> Result<(f64, f64)> {
    let s0 = assemble(SubspectrumKind::Edge, rows, 0.0, truncation)?;
    let s1 = assemble(SubspectrumKind::Edge, rows, 0.5, truncation)?;
    let n = s0.rhs.len();
    let mut b = DMatrix::zeros(n, 2);
    b.set_column(0, &s0.rhs);
    b.set_column(1, &s1.rhs);
    let (x, _) = solve_matrix(&s0.matrix, &b, truncation, opts)?;
    let mut r = &s0.matrix * x - &b;
    if opts.normalize_rows {
        for i in 0..n {
            let w = s0.matrix.row(i).norm();
            if w > 0.0 {
                r.row_mut(i).scale_mut(1.0 / w);
            }
        }
    }
    let g = r.adjoint() * &r;
    let (p, q, s) = (g[(0, 0)].re, g[(1, 1)].re, g[(0, 1)].re);
    // Smallest eigenpair of [[p, s], [s, q]].
    let mean = 0.5 * (p + q);
    let rad = (0.25 * (p - q).powi(2) + s * s).sqrt();
    let (lo, hi) = (mean - rad, mean + rad);
    let (c, sn) = if s.abs() > 1e-300 { (s, lo - p) } else if p <= q { (1.0, 0.0) } else { (0.0, 1.0) };
    let alpha = (sn.atan2(c) / PI).rem_euclid(1.0);
    let ratio = if hi > 0.0 { (lo.max(0.0) / hi).sqrt() } else { 0.0 };
    Ok((alpha, ratio))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_row_for_zero_subspectrum() {
        let sys = assemble(SubspectrumKind::Edge, &[], 0.25, 4).unwrap();
        assert_eq!(sys.matrix.shape(), (1, 10));
        assert!((sys.rhs[0].re - (0.25 * PI).sin()).abs() < 1e-15);
        let k = KernelPair {
            k: LegendreSeries::new(vec![Complex64::new((0.25 * PI).sin() / (2.0 * PI), 0.0)]).add(&LegendreSeries::zeros(4)),
            second: LegendreSeries::zeros(4),
        };
        assert!(sys.residuals(&k)[0] < 1e-15);
    }

    #[test]
    fn divisor_guard() {
        let r = RowSample {
            index: (1, 1),
            lambda: Complex64::new(2.3, 0.0),
            a: Jet::constant(Complex64::new(1.0, 0.0)),
            b: Jet::ZERO,
            class: ThetaClass::One,
            m_theta: 1,
            order: 0,
        };
        assert!(matches!(
            assemble(SubspectrumKind::Edge, &[r], 0.0, 4),
            Err(Error::DivisionDegeneracy { .. })
        ));
    }

    #[test]
    fn vector_round_trip() {
        let k = KernelPair {
            k: LegendreSeries::new(vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.5)]),
            second: LegendreSeries::new(vec![Complex64::new(-1.0, 0.0), Complex64::new(0.0, 3.0)]),
        };
        assert_eq!(KernelPair::from_vector(k.to_vector().as_slice()), k);
        assert_eq!(k.negated().negated(), k);
    }
}
