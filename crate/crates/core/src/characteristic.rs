//! Characteristic function, its decompositions, and transformation-operator
//! kernels.
//!
//! Everything is assembled from [`EdgeSample`] jets, so the same code yields
//! values and exact first λ-derivatives. The `*_from_edges` variants take
//! only the edges they depend on, which is what the inverse solvers have.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::legendre::{ExpMoments, LegendreSeries};
use crate::lsq::{self, LsqOptions};
use crate::pencil::LoopGraphPencil;
use crate::rk::IntegratorConfig;
use crate::shooting::{integrate_edge, sample_pencil, EdgeSample, SolutionSample};

/// Default Legendre degree of extracted kernels.
pub const DEFAULT_TRUNCATION: usize = 32;

/// Largest admissible `|α_m|` for the loop decomposition.
pub const ALPHA_M_TOL: f64 = 1e-10;

fn product<'a>(it: impl Iterator<Item = &'a Jet>) -> Jet {
    it.fold(Jet::from(1.0), |acc, &x| acc * x)
}

/// `d_m = S_m' + C_m − 2` from the loop sample.
pub fn dm_from_loop(loop_edge: &EdgeSample) -> Jet {
    loop_edge.sp + loop_edge.c - 2.0
}

/// `Q = C_m − S_m'` from the loop sample.
pub fn q_from_loop(loop_edge: &EdgeSample) -> Jet {
    loop_edge.c - loop_edge.sp
}

/// Characteristic function from a full sample.
pub fn delta_from_sample(sample: &SolutionSample) -> Jet {
    let m = sample.m();
    let s: Vec<Jet> = sample.edges.iter().map(|e| e.s).collect();
    let mut total = Jet::ZERO;
    for j in 0..m - 1 {
        let others = product(s.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v));
        total += sample.edges[j].sp * others;
    }
    total + dm_from_loop(&sample.edges[m - 1]) * product(s[..m - 1].iter())
}

/// `(A₁, B₁)` from the samples of edges `2..=m` (the loop last).
pub fn edge1_pair_from_edges(known: &[EdgeSample]) -> (Jet, Jet) {
    let r = known.len();
    let s: Vec<Jet> = known.iter().map(|e| e.s).collect();
    let b = product(s.iter());
    let mut a = Jet::ZERO;
    for (j, e) in known[..r - 1].iter().enumerate() {
        let others = product(s.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v));
        a += e.sp * others;
    }
    a += dm_from_loop(&known[r - 1]) * product(s[..r - 1].iter());
    (a, b)
}

/// `(A_m, B_m)` from the samples of edges `1..=m−1`.
pub fn loop_pair_from_edges(known: &[EdgeSample]) -> (Jet, Jet) {
    let s: Vec<Jet> = known.iter().map(|e| e.s).collect();
    let b = product(s.iter());
    let mut a = Jet::ZERO;
    for (j, e) in known.iter().enumerate() {
        let others = product(s.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v));
        a += e.sp * others;
    }
    (a, b)
}

/// `G₁ = −A₁ sin((λ−α₁)π) − λ B₁ cos((λ−α₁)π)` as a jet in λ.
pub fn g1_from_pair(a: Jet, b: Jet, lambda: Complex64, alpha1: f64) -> Jet {
    let phase = (Jet::var(lambda) - alpha1).scale(Complex64::new(PI, 0.0));
    -(a * phase.sin()) - Jet::var(lambda) * b * phase.cos()
}

/// `G_m = −A_m sin λπ − λ B_m (2 cos λπ − 2)` as a jet in λ.
pub fn gm_from_pair(a: Jet, b: Jet, lambda: Complex64) -> Jet {
    let phase = Jet::var(lambda).scale(Complex64::new(PI, 0.0));
    -(a * phase.sin()) - Jet::var(lambda) * b * (phase.cos() * 2.0 - 2.0)
}

pub fn delta(pencil: &LoopGraphPencil, lambda: Complex64, cfg: &IntegratorConfig) -> Result<Complex64> {
    Ok(delta_from_sample(&sample_pencil(pencil, lambda, false, cfg)?).v)
}

/// `Δ` with its exact λ-derivative.
pub fn delta_jet(pencil: &LoopGraphPencil, lambda: Complex64, cfg: &IntegratorConfig) -> Result<Jet> {
    Ok(delta_from_sample(&sample_pencil(pencil, lambda, true, cfg)?))
}

pub fn dm(pencil: &LoopGraphPencil, lambda: Complex64, cfg: &IntegratorConfig) -> Result<Complex64> {
    Ok(dm_from_loop(&integrate_edge(pencil.loop_edge(), lambda, false, cfg)?).v)
}

pub fn q_func(pencil: &LoopGraphPencil, lambda: Complex64, cfg: &IntegratorConfig) -> Result<Complex64> {
    Ok(q_from_loop(&integrate_edge(pencil.loop_edge(), lambda, false, cfg)?).v)
}

pub fn edge1_pair(pencil: &LoopGraphPencil, lambda: Complex64, cfg: &IntegratorConfig) -> Result<(Complex64, Complex64)> {
    let sample = sample_pencil(pencil, lambda, false, cfg)?;
    let (a, b) = edge1_pair_from_edges(&sample.edges[1..]);
    Ok((a.v, b.v))
}

pub fn g1(pencil: &LoopGraphPencil, lambda: Complex64, alpha1: f64, cfg: &IntegratorConfig) -> Result<Complex64> {
    let sample = sample_pencil(pencil, lambda, false, cfg)?;
    let (a, b) = edge1_pair_from_edges(&sample.edges[1..]);
    Ok(g1_from_pair(a, b, lambda, alpha1).v)
}

fn ensure_normalized(pencil: &LoopGraphPencil) -> Result<()> {
    let alpha_m = pencil.loop_edge().alpha();
    if alpha_m.norm() > ALPHA_M_TOL {
        return Err(Error::NotNormalized { alpha_m });
    }
    Ok(())
}

pub fn loop_pair(pencil: &LoopGraphPencil, lambda: Complex64, cfg: &IntegratorConfig) -> Result<(Complex64, Complex64)> {
    ensure_normalized(pencil)?;
    let sample = sample_pencil(pencil, lambda, false, cfg)?;
    let (a, b) = loop_pair_from_edges(&sample.edges[..pencil.m() - 1]);
    Ok((a.v, b.v))
}

pub fn gm(pencil: &LoopGraphPencil, lambda: Complex64, cfg: &IntegratorConfig) -> Result<Complex64> {
    ensure_normalized(pencil)?;
    let sample = sample_pencil(pencil, lambda, false, cfg)?;
    let (a, b) = loop_pair_from_edges(&sample.edges[..pencil.m() - 1]);
    Ok(gm_from_pair(a, b, lambda).v)
}

/// Kernels of one edge in the representations
///
/// ```text
/// λ S(π,λ) = sin((λ−α)π) + ∫ K(t) e^{iλt} dt
/// S'(π,λ)  = cos((λ−α)π) + ∫ N(t) e^{iλt} dt
/// C(π,λ)   = cos((λ−α)π) + ∫ L(t) e^{iλt} dt
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeKernels {
    pub alpha: Complex64,
    pub k: LegendreSeries,
    pub n: LegendreSeries,
    pub l: LegendreSeries,
}

impl EdgeKernels {
    /// `S(π,λ)` synthesised from `K`; the removable singularity at 0 is
    /// handled through the λ-derivative of the numerator.
    pub fn s(&self, lambda: Complex64) -> Complex64 {
        reconstruct_s(&self.k, self.alpha, lambda)
    }

    pub fn sp(&self, lambda: Complex64) -> Complex64 {
        ((lambda - self.alpha) * PI).cos() + self.n.transform(lambda)
    }

    pub fn c(&self, lambda: Complex64) -> Complex64 {
        ((lambda - self.alpha) * PI).cos() + self.l.transform(lambda)
    }
}

/// `[sin((λ−α)π) + ∫K e^{iλt}] / λ`, continued analytically through λ = 0.
pub fn reconstruct_s(k: &LegendreSeries, alpha: Complex64, lambda: Complex64) -> Complex64 {
    if lambda.norm() < 1e-8 {
        let (_, dk) = k.transform_with_derivative(lambda);
        return (-alpha * PI).cos() * PI + dk;
    }
    (((lambda - alpha) * PI).sin() + k.transform(lambda)) / lambda
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSet {
    /// Legendre degree of every series.
    pub truncation: usize,
    pub edges: Vec<EdgeKernels>,
    /// `T_m = N_m + L_m`, so that `d_m = 2cos((λ−α_m)π) − 2 + ∫T_m e^{iλt}`.
    pub t_m: LegendreSeries,
    /// Largest residual of the sample fits.
    pub fit_residual: f64,
}

impl KernelSet {
    pub fn edge(&self, j: usize) -> &EdgeKernels {
        &self.edges[j - 1]
    }
}

/// Moment matrix `M[i,k] = ∫ P_k(t/π) e^{iλ_i t} dt`.
pub fn moment_matrix(lambdas: &[Complex64], degree: usize) -> DMatrix<Complex64> {
    let mut a = DMatrix::zeros(lambdas.len(), degree + 1);
    for (i, &lam) in lambdas.iter().enumerate() {
        let m = ExpMoments::new(lam, degree);
        for k in 0..=degree {
            a[(i, k)] = m.value[k];
        }
    }
    a
}

/// Integer sample points used by [`extract_kernels`] for a given degree.
pub fn kernel_sample_points(truncation: usize) -> Vec<Complex64> {
    let n = 2 * truncation as i64;
    (-n..=n).map(|l| Complex64::new(l as f64, 0.0)).collect()
}

/// Fits Legendre kernels to band-limited samples of every edge.
///
/// The targets `λS − sin((λ−α)π)`, `S' − cos((λ−α)π)` and
/// `C − cos((λ−α)π)` are Fourier transforms of functions supported on
/// `[−π, π]`; they are sampled at the integers `|λ| ≤ 2L` and fitted by the
/// degree-`L` Legendre series in the least-squares sense.
pub fn extract_kernels(pencil: &LoopGraphPencil, truncation: usize, cfg: &IntegratorConfig) -> Result<KernelSet> {
    if truncation < 8 {
        return Err(Error::InvalidArgument(format!("kernel truncation {truncation} < 8")));
    }
    let lambdas = kernel_sample_points(truncation);
    let samples: Vec<SolutionSample> = lambdas
        .par_iter()
        .map(|&lam| sample_pencil(pencil, lam, false, cfg))
        .collect::<Result<_>>()?;

    let m = pencil.m();
    let rows = lambdas.len();
    let mut rhs = DMatrix::zeros(rows, 3 * m);
    for (i, (lam, s)) in lambdas.iter().zip(&samples).enumerate() {
        for (j, e) in s.edges.iter().enumerate() {
            let a = pencil.edge(j + 1).alpha();
            let phase = (lam - a) * PI;
            rhs[(i, 3 * j)] = lam * e.s.v - phase.sin();
            rhs[(i, 3 * j + 1)] = e.sp.v - phase.cos();
            rhs[(i, 3 * j + 2)] = e.c.v - phase.cos();
        }
    }
    let (coeffs, fit_residual) = fit_legendre(&lambdas, &rhs, truncation)?;
    let col = |c: usize| LegendreSeries::new(coeffs.column(c).iter().copied().collect());
    let edges: Vec<EdgeKernels> = (0..m)
        .map(|j| EdgeKernels {
            alpha: pencil.edge(j + 1).alpha(),
            k: col(3 * j),
            n: col(3 * j + 1),
            l: col(3 * j + 2),
        })
        .collect();
    let t_m = edges[m - 1].n.add(&edges[m - 1].l);
    Ok(KernelSet {
        truncation,
        edges,
        t_m,
        fit_residual,
    })
}

/// Least-squares Legendre coefficients for several transform samples.
///
/// Columns are scaled to the orthonormal Legendre basis before solving.
pub fn fit_legendre(lambdas: &[Complex64], rhs: &DMatrix<Complex64>, degree: usize) -> Result<(DMatrix<Complex64>, f64)> {
    let mut a = moment_matrix(lambdas, degree);
    let scale: Vec<f64> = (0..=degree).map(|k| (2.0 * PI / (2 * k + 1) as f64).sqrt().recip()).collect();
    for (k, s) in scale.iter().enumerate() {
        a.column_mut(k).scale_mut(*s);
    }
    let opts = LsqOptions {
        normalize_rows: false,
        ..LsqOptions::default()
    };
    let (mut x, diag) = lsq::solve(&a, rhs, &opts)?;
    for (k, s) in scale.iter().enumerate() {
        x.row_mut(k).scale_mut(*s);
    }
    Ok((x, diag.residual_norm))
}
