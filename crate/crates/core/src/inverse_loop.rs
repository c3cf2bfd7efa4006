//! Recovery of the loop from the boundary edges, a subspectrum and the
//! sign data `Ω`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::characteristic::{dm_from_loop, q_from_loop, reconstruct_s, ALPHA_M_TOL};
use crate::error::{Error, Result};
use crate::fit::{fit_edge, EdgeFit, FitOptions};
use crate::inverse_edge::{expect_kind, zero_avoiding_shift};
use crate::lsq::{LsqDiagnostics, LsqOptions};
use crate::pencil::EdgeCoefficients;
use crate::rk::IntegratorConfig;
use crate::shooting::integrate_edge;
use crate::spectral::{omega_of, omega_sequence_for_loop, SpectralOptions, Subspectrum, SubspectrumKind};
use crate::system::{assemble, sample_rows, solve_system, KernelPair, ReconstructionSystem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopInversionOptions {
    pub truncation: usize,
    pub lsq: LsqOptions,
    pub integrator: IntegratorConfig,
    pub fit: Option<FitOptions>,
}

impl Default for LoopInversionOptions {
    fn default() -> Self {
        Self {
            truncation: crate::characteristic::DEFAULT_TRUNCATION,
            lsq: LsqOptions::default(),
            integrator: IntegratorConfig::default(),
            fit: Some(FitOptions::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopSystem {
    pub system: ReconstructionSystem,
    /// Input sign data `(n, ω_n)`.
    pub omega: Vec<(i64, i8)>,
    /// Spectral shift the system was assembled under.
    pub shift: f64,
}

fn check_omega(omega: &[(i64, i8)]) -> Result<()> {
    if let Some(&(n, _)) = omega.iter().find(|(_, w)| *w == 0) {
        return Err(Error::ConditionCViolated {
            nu: Complex64::new(n as f64, 0.0),
        });
    }
    Ok(())
}

/// Main-equation system for the loop; `known` holds edges `1..=m−1`.
pub fn assemble_loop_system(
    known: &[EdgeCoefficients],
    sub: &Subspectrum,
    truncation: usize,
    omega: &[(i64, i8)],
    cfg: &IntegratorConfig,
) -> Result<LoopSystem> {
    expect_kind(sub, SubspectrumKind::Loop)?;
    check_omega(omega)?;
    let shift = zero_avoiding_shift(sub);
    let rows = if shift != 0.0 {
        let c = Complex64::new(shift, 0.0);
        let shifted: Vec<EdgeCoefficients> = known.iter().map(|e| e.shifted(c)).collect();
        sample_rows(&shifted, &sub.shifted(c), cfg)?
    } else {
        sample_rows(known, sub, cfg)?
    };
    Ok(LoopSystem {
        system: assemble(SubspectrumKind::Loop, &rows, shift, truncation)?,
        omega: omega.to_vec(),
        shift,
    })
}

pub fn solve_loop_kernels(system: &LoopSystem, opts: &LsqOptions) -> Result<(KernelPair, LsqDiagnostics)> {
    solve_system(&system.system, opts)
}

/// `S_m(π,·)` and `d_m` synthesised from `(K_m, T_m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopReconstruction {
    pub shift: f64,
    pub kernels: KernelPair,
}

impl LoopReconstruction {
    pub fn s(&self, lambda: Complex64) -> Complex64 {
        reconstruct_s(&self.kernels.k, Complex64::new(self.shift, 0.0), lambda + self.shift)
    }

    pub fn dm(&self, lambda: Complex64) -> Complex64 {
        (lambda * PI).cos() * 2.0 - 2.0 + self.kernels.second.transform(lambda + self.shift)
    }

    /// Zero of `S_m(π,·)` by Newton's method from `start`.
    pub fn zero_near(&self, start: Complex64) -> Option<Complex64> {
        let mut z = start;
        for _ in 0..60 {
            let h = 1e-6 * z.norm().max(1.0);
            let d = (self.s(z + h) - self.s(z - h)) / (2.0 * h);
            let step = self.s(z) / d;
            z -= step;
            if !(z.re.is_finite() && z.im.is_finite()) {
                return None;
            }
            if step.norm() <= 1e-14 * z.norm().max(1.0) {
                break;
            }
        }
        ((z - start).norm() < 0.5).then_some(z)
    }
}

pub fn reconstruct_loop_functions(kernels: KernelPair) -> LoopReconstruction {
    LoopReconstruction { shift: 0.0, kernels }
}

/// `Q(ν)` at a zero of `S_m(π,·)` from `d_m(ν)` and the sign `ω`.
///
/// `C S' = 1` there, so `Q² = (d_m + 2)² − 4`; the root is chosen by the
/// same argument table that defines `ω`.
pub fn q_from_sign(dm: Complex64, omega: i8) -> Complex64 {
    let r = ((dm + 2.0) * (dm + 2.0) - 4.0).sqrt();
    if omega_of(r, 0.0) == omega {
        r
    } else {
        -r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopVerification {
    /// Zeros `ν̂_n` of the reconstructed `S_m(π,·)`.
    pub nu_hat: Vec<(i64, Complex64)>,
    /// `min_n |d̂_m(ν̂_n)|`.
    pub min_dm_at_nu: f64,
    /// Largest `|ν̂_n − ν_n|` against the truth.
    pub nu_gap: Option<f64>,
    /// `sup |Ŝ_m − S_m|` on the real grid.
    pub s_gap: Option<f64>,
    /// `sup |d̂_m − d_m|` on the real grid.
    pub dm_gap: Option<f64>,
    /// `Ω` recomputed from the truth.
    pub omega_truth: Option<Vec<(i64, i8)>>,
    pub omega_agrees: Option<bool>,
    /// Largest `|C_m S_m' − 1|` of the truth at its own zeros.
    pub cs_defect: Option<f64>,
}

/// Checks the reconstruction against the sign data and, if supplied, the true loop.
pub fn verify_loop_recovery(
    recon: &LoopReconstruction,
    omega: &[(i64, i8)],
    truth: Option<&EdgeCoefficients>,
    grid: &[f64],
    opts: &SpectralOptions,
) -> Result<LoopVerification> {
    let nu_hat: Vec<(i64, Complex64)> = omega
        .iter()
        .filter_map(|&(n, _)| recon.zero_near(Complex64::new(n as f64, 0.0)).map(|z| (n, z)))
        .collect();
    let min_dm_at_nu = nu_hat.iter().map(|(_, z)| recon.dm(*z).norm()).fold(f64::INFINITY, f64::min);
    let mut v = LoopVerification {
        nu_hat,
        min_dm_at_nu,
        nu_gap: None,
        s_gap: None,
        dm_gap: None,
        omega_truth: None,
        omega_agrees: None,
        cs_defect: None,
    };
    let Some(edge) = truth else {
        return Ok(v);
    };
    let n_max = omega.iter().map(|(n, _)| n.unsigned_abs() as usize).max().unwrap_or(0);
    let seq = omega_sequence_for_loop(edge, n_max, opts)?;
    let truth_omega: Vec<(i64, i8)> = seq.omegas();
    v.omega_agrees = Some(omega.iter().all(|o| truth_omega.contains(o)));
    v.omega_truth = Some(truth_omega);
    v.nu_gap = Some(
        v.nu_hat
            .iter()
            .filter_map(|(n, z)| seq.entries.iter().find(|e| e.n == *n).map(|e| (e.nu - z).norm()))
            .fold(0.0, f64::max),
    );
    let mut cs: f64 = 0.0;
    for e in &seq.entries {
        let s = integrate_edge(edge, e.nu, false, &opts.integrator)?;
        cs = cs.max((s.c.v * s.sp.v - 1.0).norm());
    }
    v.cs_defect = Some(cs);
    let gaps: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&l| {
            let z = Complex64::new(l, 0.0);
            let s = integrate_edge(edge, z, false, &opts.integrator)?;
            Ok(((recon.s(z) - s.s.v).norm(), (recon.dm(z) - dm_from_loop(&s).v).norm()))
        })
        .collect::<Result<_>>()?;
    v.s_gap = Some(gaps.iter().map(|g| g.0).fold(0.0, f64::max));
    v.dm_gap = Some(gaps.iter().map(|g| g.1).fold(0.0, f64::max));
    Ok(v)
}

/// Fits `(p_m, q_m)` to `(Ŝ_m, d̂_m)` on a real grid plus one row per sign
/// `ω_n` matching `Q(ν̂_n)` against [`q_from_sign`]; the sign rows select
/// between a loop and its reflection, which share `S_m` and `d_m`.
pub fn fit_loop_coefficients(recon: &LoopReconstruction, omega: &[(i64, i8)], opts: &FitOptions) -> Result<EdgeFit> {
    check_omega(omega)?;
    let grid: Vec<(f64, Complex64, Complex64)> = opts
        .grid()
        .into_iter()
        .map(|l| {
            let z = Complex64::new(l, 0.0);
            (l, recon.s(z), recon.dm(z))
        })
        .collect();
    let signs: Vec<(Complex64, Complex64)> = omega
        .iter()
        .filter_map(|&(n, w)| {
            let nu = recon.zero_near(Complex64::new(n as f64, 0.0))?;
            Some((nu, q_from_sign(recon.dm(nu), w)))
        })
        .collect();
    let cfg = opts.integrator;
    let residual = |e: &EdgeCoefficients| -> Result<Vec<Complex64>> {
        let mut r: Vec<Complex64> = grid
            .par_iter()
            .map(|&(l, s_hat, d_hat)| {
                let s = integrate_edge(e, Complex64::new(l, 0.0), false, &cfg)?;
                Ok([(s_hat - s.s.v) * l, d_hat - dm_from_loop(&s).v])
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        for &(nu, q_hat) in &signs {
            r.push(q_from_loop(&integrate_edge(e, nu, false, &cfg)?).v - q_hat);
        }
        Ok(r)
    };
    fit_edge(&residual, &EdgeCoefficients::zero(), opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopInversion {
    pub shift: f64,
    pub rows: usize,
    pub unknowns: usize,
    pub diagnostics: LsqDiagnostics,
    pub max_row_residual: f64,
    pub reconstruction: LoopReconstruction,
    pub nu_hat: Vec<(i64, Complex64)>,
    /// Lower bound `min_n |d̂_m(ν̂_n)|` reported for the Lemma check.
    pub min_dm_at_nu: f64,
    pub fit: Option<EdgeFit>,
}

/// Full loop recovery: kernels, reconstruction, zeros and (optionally) the fit.
pub fn invert_loop(known: &[EdgeCoefficients], sub: &Subspectrum, omega: &[(i64, i8)], opts: &LoopInversionOptions) -> Result<LoopInversion> {
    if known.is_empty() {
        return Err(Error::InvalidArgument("loop inversion needs edges 1..m−1".into()));
    }
    let system = assemble_loop_system(known, sub, opts.truncation, omega, &opts.integrator)?;
    let (kernels, diagnostics) = solve_loop_kernels(&system, &opts.lsq)?;
    let max_row_residual = system.system.residuals(&kernels).into_iter().fold(0.0, f64::max);
    let reconstruction = LoopReconstruction {
        shift: system.shift,
        kernels,
    };
    let nu_hat: Vec<(i64, Complex64)> = omega
        .iter()
        .filter_map(|&(n, _)| reconstruction.zero_near(Complex64::new(n as f64, 0.0)).map(|z| (n, z)))
        .collect();
    let min_dm_at_nu = nu_hat.iter().map(|(_, z)| reconstruction.dm(*z).norm()).fold(f64::INFINITY, f64::min);
    let fit = opts
        .fit
        .as_ref()
        .map(|f| fit_loop_coefficients(&reconstruction, omega, f))
        .transpose()?;
    Ok(LoopInversion {
        shift: system.shift,
        rows: system.system.matrix.nrows(),
        unknowns: system.system.unknowns(),
        diagnostics,
        max_row_residual,
        reconstruction,
        nu_hat,
        min_dm_at_nu,
        fit,
    })
}

/// Whether `α_m` is zero within the normalisation tolerance.
pub fn loop_is_normalized(edge: &EdgeCoefficients) -> bool {
    edge.alpha().norm() <= ALPHA_M_TOL
}
