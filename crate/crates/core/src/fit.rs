//! Levenberg–Marquardt fit of Chebyshev coefficients of one edge.

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt, TerminationReason};
use nalgebra::{storage::Owned, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cheb::ChebSeries;
use crate::error::{Error, Result};
use crate::pencil::EdgeCoefficients;
use crate::rk::IntegratorConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Chebyshev degree of the fitted `p`.
    pub p_degree: usize,
    /// Chebyshev degree of the fitted `q`.
    pub q_degree: usize,
    /// Real sample points are spread over `[−lambda_max, lambda_max]`.
    pub lambda_max: f64,
    pub points: usize,
    /// Budget in Jacobian evaluations.
    pub max_iterations: usize,
    /// Relative forward-difference step.
    pub fd_step: f64,
    pub integrator: IntegratorConfig,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            p_degree: 12,
            q_degree: 12,
            lambda_max: 20.0,
            points: 80,
            max_iterations: 50,
            fd_step: 1e-7,
            integrator: IntegratorConfig::default(),
        }
    }
}

impl FitOptions {
    /// Sample grid, symmetric and free of `λ = 0`.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points.max(2);
        (0..n)
            .map(|i| -self.lambda_max + 2.0 * self.lambda_max * (i as f64 + 0.5) / n as f64)
            .collect()
    }

    pub fn parameters(&self) -> usize {
        self.p_degree + self.q_degree + 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeFit {
    pub edge: EdgeCoefficients,
    pub initial_residual: f64,
    /// Euclidean norm of the final residual vector.
    pub residual: f64,
    pub evaluations: usize,
    pub termination: String,
}

/// Real Chebyshev coefficients of `(p, q)` as one parameter vector.
pub fn edge_to_params(edge: &EdgeCoefficients, opts: &FitOptions) -> DVector<f64> {
    let p = edge.p().padded(opts.p_degree);
    let q = edge.q().padded(opts.q_degree);
    DVector::from_iterator(
        opts.parameters(),
        p.coeffs()[..=opts.p_degree].iter().chain(&q.coeffs()[..=opts.q_degree]).map(|c| c.re),
    )
}

pub fn params_to_edge(x: &DVector<f64>, opts: &FitOptions) -> EdgeCoefficients {
    let (p, q) = x.as_slice().split_at(opts.p_degree + 1);
    EdgeCoefficients::new(ChebSeries::from_real(p), ChebSeries::from_real(q))
}

struct Problem<'a, R> {
    residual: &'a R,
    opts: &'a FitOptions,
    x: DVector<f64>,
    r: Option<DVector<f64>>,
}

fn stack(r: &[Complex64]) -> DVector<f64> {
    DVector::from_iterator(2 * r.len(), r.iter().flat_map(|z| [z.re, z.im]))
}

impl<R> LeastSquaresProblem<f64, Dyn, Dyn> for Problem<'_, R>
where
    R: Fn(&EdgeCoefficients) -> Result<Vec<Complex64>> + Sync,
{
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, Dyn>;
    type ParameterStorage = Owned<f64, Dyn>;

    fn set_params(&mut self, x: &DVector<f64>) {
        self.x = x.clone();
        self.r = (self.residual)(&params_to_edge(x, self.opts)).ok().map(|r| stack(&r));
    }

    fn params(&self) -> DVector<f64> {
        self.x.clone()
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        self.r.clone()
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        use rayon::prelude::*;
        let r0 = self.r.as_ref()?;
        let cols: Vec<Option<DVector<f64>>> = (0..self.x.len())
            .into_par_iter()
            .map(|i| {
                let h = self.opts.fd_step * self.x[i].abs().max(1.0);
                let mut x = self.x.clone();
                x[i] += h;
                let r = stack(&(self.residual)(&params_to_edge(&x, self.opts)).ok()?);
                Some((r - r0) / h)
            })
            .collect();
        let mut j = DMatrix::zeros(r0.len(), self.x.len());
        for (i, c) in cols.into_iter().enumerate() {
            j.set_column(i, &c?);
        }
        Some(j)
    }
}

/// Minimises `‖residual(p, q)‖²` over real Chebyshev coefficients, starting
/// from `init`, with a forward-difference Jacobian.
pub fn fit_edge<R>(residual: &R, init: &EdgeCoefficients, opts: &FitOptions) -> Result<EdgeFit>
where
    R: Fn(&EdgeCoefficients) -> Result<Vec<Complex64>> + Sync,
{
    let x0 = edge_to_params(init, opts);
    let r0 = stack(&residual(&params_to_edge(&x0, opts))?);
    let initial_residual = r0.norm();
    let problem = Problem {
        residual,
        opts,
        x: x0,
        r: Some(r0),
    };
    let lm = LevenbergMarquardt::new()
        .with_ftol(1e-14)
        .with_xtol(1e-14)
        .with_gtol(1e-14)
        .with_patience(opts.max_iterations);
    let (problem, report) = lm.minimize(problem);
    let residual_norm = problem.r.as_ref().map(|r| r.norm()).unwrap_or(f64::INFINITY);
    let acceptable = report.termination.was_successful()
        || matches!(
            report.termination,
            TerminationReason::LostPatience | TerminationReason::NoImprovementPossible(_)
        );
    if !acceptable || !residual_norm.is_finite() || (residual_norm >= initial_residual && initial_residual > 1e-10) {
        return Err(Error::FitDiverged(format!(
            "{:?}: residual {residual_norm:e} from {initial_residual:e}",
            report.termination
        )));
    }
    Ok(EdgeFit {
        edge: params_to_edge(&problem.x, opts),
        initial_residual,
        residual: residual_norm,
        evaluations: report.number_of_evaluations,
        termination: format!("{:?}", report.termination),
    })
}
