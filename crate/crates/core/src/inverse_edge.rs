//! Recovery of the boundary edge 1 from the other edges and a subspectrum.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::characteristic::reconstruct_s;
use crate::error::{Error, Result};
use crate::fit::{fit_edge, EdgeFit, FitOptions};
use crate::lsq::{LsqDiagnostics, LsqOptions};
use crate::pencil::EdgeCoefficients;
use crate::rk::IntegratorConfig;
use crate::shooting::integrate_edge;
use crate::spectral::{kappa2, Subspectrum, SubspectrumKind};
use crate::system::{assemble, residual_optimal_alpha, sample_rows, solve_system, KernelPair, ReconstructionSystem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeInversionOptions {
    /// Legendre degree of the unknown kernels.
    pub truncation: usize,
    pub lsq: LsqOptions,
    pub integrator: IntegratorConfig,
    /// Replace the branch-limit estimate of `α₁` by the residual-optimal one.
    pub refine_alpha: bool,
    /// Run the coefficient fit after the kernel solve.
    pub fit: Option<FitOptions>,
}

impl Default for EdgeInversionOptions {
    fn default() -> Self {
        Self {
            truncation: crate::characteristic::DEFAULT_TRUNCATION,
            lsq: LsqOptions::default(),
            integrator: IntegratorConfig::default(),
            refine_alpha: true,
            fit: Some(FitOptions::default()),
        }
    }
}

/// Limit `β₁` of `λ_{n1} − 2n`.
///
/// Symmetric averages `(r_n + r_{−n})/2` cancel the `1/n` term; the
/// remaining even expansion `β + c/n² + d/n⁴` is fitted by least squares.
pub fn estimate_beta1(sub: &Subspectrum) -> Result<f64> {
    let branch = sub.branch_one();
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for &(n, r) in branch.iter().filter(|(n, _)| *n > 0) {
        if let Some(&(_, rm)) = branch.iter().find(|(k, _)| *k == -n) {
            pairs.push((n as f64, 0.5 * (r.re + rm.re)));
        }
    }
    match pairs.len() {
        0 => Err(Error::InvalidArgument("subspectrum has no symmetric k = 1 pairs".into())),
        1 | 2 => Ok(pairs.last().expect("nonempty").1),
        len => {
            let cols = if len >= 6 { 3 } else { 2 };
            let a = DMatrix::from_fn(len, cols, |i, j| pairs[i].0.powi(-2 * j as i32));
            let b = DVector::from_iterator(len, pairs.iter().map(|p| p.1));
            let x = a
                .svd(true, true)
                .solve(&b, 1e-14)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            Ok(x[0])
        }
    }
}

/// Mean `α₁ ∈ [0, 1)` of edge 1 from the branch limit `β₁` and the means
/// `α_2..α_{m−1}` of the other boundary edges.
pub fn recover_alpha1(beta1: f64, alphas_known: &[f64]) -> Result<f64> {
    if (beta1 * PI).sin().abs() <= 1e-12 {
        return Err(Error::BranchSingular { beta: beta1 });
    }
    let rest: f64 = alphas_known.iter().map(|a| 1.0 / ((beta1 - a) * PI).tan()).sum();
    let x = kappa2(beta1) - rest;
    // arccot into (0, π).
    let acot = 1.0_f64.atan2(x);
    Ok((beta1 - acot / PI).rem_euclid(1.0))
}

/// Main-equation system for edge 1; `known` holds edges `2..=m` with the loop last.
pub fn assemble_edge_system(
    known: &[EdgeCoefficients],
    sub: &Subspectrum,
    alpha1: f64,
    truncation: usize,
    cfg: &IntegratorConfig,
) -> Result<ReconstructionSystem> {
    expect_kind(sub, SubspectrumKind::Edge)?;
    let rows = sample_rows(known, sub, cfg)?;
    assemble(SubspectrumKind::Edge, &rows, alpha1, truncation)
}

pub(crate) fn expect_kind(sub: &Subspectrum, kind: SubspectrumKind) -> Result<()> {
    if sub.kind != kind {
        return Err(Error::InvalidArgument(format!("expected a {kind:?} subspectrum, got {:?}", sub.kind)));
    }
    Ok(())
}

pub fn solve_kernels(system: &ReconstructionSystem, opts: &LsqOptions) -> Result<(KernelPair, LsqDiagnostics)> {
    solve_system(system, opts)
}

/// `S₁(π,·)` and `S₁'(π,·)` synthesised from solved kernels.
///
/// `shift` is the spectral shift the kernels were solved under; evaluation
/// at `λ` uses the shifted argument `λ + shift`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeReconstruction {
    pub alpha1: f64,
    pub shift: f64,
    pub kernels: KernelPair,
}

impl EdgeReconstruction {
    pub fn s(&self, lambda: Complex64) -> Complex64 {
        reconstruct_s(&self.kernels.k, Complex64::new(self.alpha1 + self.shift, 0.0), lambda + self.shift)
    }

    pub fn sp(&self, lambda: Complex64) -> Complex64 {
        let mu = lambda + self.shift;
        ((mu - self.alpha1 - self.shift) * PI).cos() + self.kernels.second.transform(mu)
    }

    /// Weyl function `S₁'/S₁`.
    pub fn weyl(&self, lambda: Complex64) -> Complex64 {
        self.sp(lambda) / self.s(lambda)
    }
}

pub fn reconstruct_edge_functions(kernels: KernelPair, alpha1: f64) -> EdgeReconstruction {
    EdgeReconstruction {
        alpha1,
        shift: 0.0,
        kernels,
    }
}

/// Fits `(p₁, q₁)` to a reconstruction through the cross-multiplied Weyl
/// residual `λ(Ŝ' S − Ŝ S')` on a real grid, starting from `p = α₁`, `q = 0`.
pub fn fit_edge_coefficients(recon: &EdgeReconstruction, opts: &FitOptions) -> Result<EdgeFit> {
    let grid = opts.grid();
    let target: Vec<(f64, Complex64, Complex64)> = grid
        .iter()
        .map(|&l| {
            let z = Complex64::new(l, 0.0);
            (l, recon.s(z), recon.sp(z))
        })
        .collect();
    let init = EdgeCoefficients::new(
        crate::cheb::ChebSeries::from_real(&[recon.alpha1]),
        crate::cheb::ChebSeries::zero(),
    );
    fit_to_dirichlet_data(&target, &init, opts)
}

/// Fits one edge to samples `(λ, Ŝ(π,λ), Ŝ'(π,λ))`, known up to a common factor.
pub fn fit_to_dirichlet_data(target: &[(f64, Complex64, Complex64)], init: &EdgeCoefficients, opts: &FitOptions) -> Result<EdgeFit> {
    let cfg = opts.integrator;
    let residual = |e: &EdgeCoefficients| -> Result<Vec<Complex64>> {
        use rayon::prelude::*;
        target
            .par_iter()
            .map(|&(l, s_hat, sp_hat)| {
                let s = integrate_edge(e, Complex64::new(l, 0.0), false, &cfg)?;
                Ok((sp_hat * s.s.v - s_hat * s.sp.v) * l)
            })
            .collect()
    };
    fit_edge(&residual, init, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeInversion {
    pub beta1: f64,
    /// `α₁` from the branch limit.
    pub alpha1_branch: f64,
    /// `α₁` minimising the system residual.
    pub alpha1_residual: f64,
    /// `√(μ_min/μ_max)` of the α-refinement quadratic form.
    pub alpha1_residual_ratio: f64,
    /// Value actually used.
    pub alpha1: f64,
    /// Spectral shift applied because `0 ∈ Λ`.
    pub shift: f64,
    pub rows: usize,
    pub unknowns: usize,
    pub diagnostics: LsqDiagnostics,
    /// Largest row residual of the solution.
    pub max_row_residual: f64,
    pub reconstruction: EdgeReconstruction,
    pub fit: Option<EdgeFit>,
}

/// Chooses a real shift moving every subspectrum value away from 0.
pub(crate) fn zero_avoiding_shift(sub: &Subspectrum) -> f64 {
    if !sub.contains_zero() {
        return 0.0;
    }
    let lambdas = sub.lambdas();
    let gap = |c: f64| lambdas.iter().map(|l| (l + c).norm()).fold(f64::INFINITY, f64::min);
    [0.25, -0.25, 0.125, -0.125, 0.375, -0.375]
        .into_iter()
        .max_by(|a, b| gap(*a).total_cmp(&gap(*b)))
        .expect("candidates")
}

/// Full recovery of edge 1: `β₁`, `α₁`, kernels, reconstruction and (optionally) the fit.
pub fn invert_edge(known: &[EdgeCoefficients], sub: &Subspectrum, opts: &EdgeInversionOptions) -> Result<EdgeInversion> {
    expect_kind(sub, SubspectrumKind::Edge)?;
    if known.is_empty() {
        return Err(Error::InvalidArgument("edge inversion needs edges 2..m".into()));
    }
    let beta1 = estimate_beta1(sub)?;
    let alphas_known: Vec<f64> = known[..known.len() - 1].iter().map(|e| e.alpha().re).collect();
    let alpha1_branch = recover_alpha1(beta1, &alphas_known)?;

    let shift = zero_avoiding_shift(sub);
    let (known_s, sub_s): (Vec<EdgeCoefficients>, Subspectrum) = if shift != 0.0 {
        let c = Complex64::new(shift, 0.0);
        (known.iter().map(|e| e.shifted(c)).collect(), sub.shifted(c))
    } else {
        (known.to_vec(), sub.clone())
    };
    let rows = sample_rows(&known_s, &sub_s, &opts.integrator)?;
    let (alpha_res, ratio) = residual_optimal_alpha(&rows, opts.truncation, &opts.lsq)?;
    let alpha1_residual = (alpha_res - shift).rem_euclid(1.0);
    let alpha1 = if opts.refine_alpha { alpha1_residual } else { alpha1_branch };

    let system = assemble(SubspectrumKind::Edge, &rows, alpha1 + shift, opts.truncation)?;
    let (kernels, diagnostics) = solve_system(&system, &opts.lsq)?;
    let max_row_residual = system.residuals(&kernels).into_iter().fold(0.0, f64::max);
    let reconstruction = EdgeReconstruction { alpha1, shift, kernels };
    let fit = opts.fit.as_ref().map(|f| fit_edge_coefficients(&reconstruction, f)).transpose()?;
    Ok(EdgeInversion {
        beta1,
        alpha1_branch,
        alpha1_residual,
        alpha1_residual_ratio: ratio,
        alpha1,
        shift,
        rows: system.matrix.nrows(),
        unknowns: system.unknowns(),
        diagnostics,
        max_row_residual,
        reconstruction,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::legendre::LegendreSeries;
    use crate::spectral::solve_betas;

    #[test]
    fn alpha_from_beta_round_trip() {
        for alpha in [0.3, 0.55, 0.81] {
            let b = solve_betas(&[alpha]).unwrap();
            for k in 1..=3 {
                let a = recover_alpha1(b.beta(k), &[]).unwrap();
                assert!((a - alpha).abs() < 1e-9, "k={k}: {a} vs {alpha}");
            }
        }
        let b = solve_betas(&[0.3, 0.7]).unwrap();
        let a = recover_alpha1(b.beta(1), &[0.7]).unwrap();
        assert!((a - 0.3).abs() < 1e-9);
    }

    #[test]
    fn branch_singular() {
        assert!(matches!(recover_alpha1(0.0, &[]), Err(Error::BranchSingular { .. })));
        assert!(matches!(recover_alpha1(1.0, &[0.2]), Err(Error::BranchSingular { .. })));
    }

    #[test]
    fn zero_kernels_give_free_solutions() {
        let r = reconstruct_edge_functions(KernelPair::zeros(8), 0.0);
        for l in [0.3, 1.7, -4.2] {
            let z = Complex64::new(l, 0.0);
            assert!((r.s(z) - (z * PI).sin() / z).norm() < 1e-14);
            assert!((r.sp(z) - (z * PI).cos()).norm() < 1e-14);
        }
        assert!((r.s(Complex64::new(0.0, 0.0)).re - PI).abs() < 1e-14);
    }

    #[test]
    fn shift_is_transparent() {
        let k = KernelPair {
            k: LegendreSeries::new(vec![Complex64::new(0.01, 0.0), Complex64::new(0.02, 0.0)]),
            second: LegendreSeries::new(vec![Complex64::new(-0.03, 0.0)]),
        };
        let plain = reconstruct_edge_functions(k.clone(), 0.55);
        let shifted = EdgeReconstruction {
            alpha1: 0.3,
            shift: 0.25,
            kernels: k,
        };
        let z = Complex64::new(1.1, 0.2);
        assert!((shifted.s(z) - plain.s(z + 0.25)).norm() < 1e-14);
        assert!((shifted.sp(z) - plain.sp(z + 0.25)).norm() < 1e-14);
    }
}
