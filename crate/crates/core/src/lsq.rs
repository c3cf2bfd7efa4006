//! Regularised complex least squares via the singular value decomposition.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LsqOptions {
    /// Tikhonov parameter relative to the largest singular value.
    pub tikhonov: f64,
    /// Relative parameter used when the system is too ill-conditioned.
    pub auto_tikhonov: f64,
    /// `σ_min/σ_max` below which `auto_tikhonov` replaces a smaller `tikhonov`.
    pub auto_threshold: f64,
    /// Singular values below `rank_tol · σ_max` do not count towards the rank.
    pub rank_tol: f64,
    /// Scale every row (and its right side) to unit Euclidean norm.
    pub normalize_rows: bool,
}

impl Default for LsqOptions {
    fn default() -> Self {
        Self {
            tikhonov: 0.0,
            auto_tikhonov: 1e-10,
            auto_threshold: 1e-12,
            rank_tol: 1e-14,
            normalize_rows: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsqDiagnostics {
    pub rows: usize,
    pub unknowns: usize,
    pub rank: usize,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub tikhonov_used: f64,
    /// `‖A x − b‖` of the (row-normalised) system, largest over right sides.
    pub residual_norm: f64,
    /// `residual_norm / ‖b‖`.
    pub relative_residual: f64,
}

impl LsqDiagnostics {
    pub fn condition(&self) -> f64 {
        self.sigma_max / self.sigma_min
    }
}

/// Solves `min ‖A X − B‖² + τ²‖X‖²` column by column.
pub fn solve(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, opts: &LsqOptions) -> Result<(DMatrix<Complex64>, LsqDiagnostics)> {
    let (rows, unknowns) = a.shape();
    if rows < unknowns {
        return Err(Error::RankDeficient { rank: rows, unknowns });
    }
    let mut a = a.clone();
    let mut b = b.clone();
    if opts.normalize_rows {
        for i in 0..rows {
            let norm = a.row(i).norm();
            if norm > 0.0 {
                let s = 1.0 / norm;
                a.row_mut(i).scale_mut(s);
                b.row_mut(i).scale_mut(s);
            }
        }
    }
    if a.iter().chain(b.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("least-squares system has non-finite entries".into()));
    }

    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.max();
    let sigma_min = sigma.min();
    let rank = sigma.iter().filter(|&&s| s > opts.rank_tol * sigma_max).count();
    if rank < unknowns {
        return Err(Error::RankDeficient { rank, unknowns });
    }

    let mut tik = opts.tikhonov;
    if sigma_min < opts.auto_threshold * sigma_max {
        tik = tik.max(opts.auto_tikhonov);
    }
    let tau2 = (tik * sigma_max).powi(2);
    let filter = DVector::from_iterator(sigma.len(), sigma.iter().map(|&s| Complex64::new(s / (s * s + tau2), 0.0)));

    let utb = u.adjoint() * &b;
    let mut scaled = utb;
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        row *= filter[i];
    }
    let x = v_t.adjoint() * scaled;

    let resid = &a * &x - &b;
    let mut residual_norm: f64 = 0.0;
    let mut relative_residual: f64 = 0.0;
    for c in 0..b.ncols() {
        let r = resid.column(c).norm();
        residual_norm = residual_norm.max(r);
        let bn = b.column(c).norm();
        relative_residual = relative_residual.max(if bn > 0.0 { r / bn } else { r });
    }
    Ok((
        x,
        LsqDiagnostics {
            rows,
            unknowns,
            rank,
            sigma_max,
            sigma_min,
            tikhonov_used: tik,
            residual_norm,
            relative_residual,
        },
    ))
}

/// Single right-hand side convenience wrapper.
pub fn solve_vector(
    a: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
    opts: &LsqOptions,
) -> Result<(DVector<Complex64>, LsqDiagnostics)> {
    let bm = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    let (x, diag) = solve(a, &bm, opts)?;
    Ok((x.column(0).into_owned(), diag))
}
