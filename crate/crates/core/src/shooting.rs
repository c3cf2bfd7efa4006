//! Initial value problems for the pencil equation on a single edge.
//!
//! `S` and `C` are integrated together in one first-order system so that
//! both share the same step sequence. The numerical propagator is then a
//! single linear map and its determinant, the Wronskian, stays close to 1
//! even where the solutions grow like `e^{π|Im λ|}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::pencil::{EdgeCoefficients, LoopGraphPencil};
use crate::rk::{integrate, IntegratorConfig, StepError};

/// `S(π,λ)`, `S'(π,λ)`, `C(π,λ)`, `C'(π,λ)` as jets in λ.
///
/// The derivative parts are zero unless the sample was taken with
/// `with_lambda_derivative`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSample {
    pub s: Jet,
    pub sp: Jet,
    pub c: Jet,
    pub cp: Jet,
}

/// Per-edge values at a common λ for the whole pencil.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSample {
    pub lambda: Complex64,
    pub edges: Vec<EdgeSample>,
    pub has_derivative: bool,
}

impl SolutionSample {
    /// Edge `j` with 1-based indexing.
    pub fn edge(&self, j: usize) -> &EdgeSample {
        &self.edges[j - 1]
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }
}

fn step_failure(edge: usize, lambda: Complex64, e: StepError) -> Error {
    Error::StepFailure {
        edge,
        lambda,
        reason: e.to_string(),
    }
}

/// Integrates `-y'' + q y + 2λ p y = λ² y` on `[0, π]` for the `S` and `C`
/// initial data.
///
/// With `with_lambda_derivative` the variational system
/// `z'' = (q + 2λp − λ²) z + (2p − 2λ) y`, `z(0) = z'(0) = 0`, is carried
/// along and fills the derivative parts of the returned jets. A failure is
/// reported with edge index 0; [`sample_pencil`] fills in the real index.
pub fn integrate_edge(
    edge: &EdgeCoefficients,
    lambda: Complex64,
    with_lambda_derivative: bool,
    cfg: &IntegratorConfig,
) -> Result<EdgeSample> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let lam2 = lambda * lambda;
    let p = edge.p();
    let q = edge.q();
    let h0 = 0.5 / (1.0 + lambda.norm());

    if !with_lambda_derivative {
        let rhs = |x: f64, y: &[Complex64; 4], dy: &mut [Complex64; 4]| {
            let r = q.eval(x) + p.eval(x) * (2.0 * lambda) - lam2;
            dy[0] = y[1];
            dy[1] = r * y[0];
            dy[2] = y[3];
            dy[3] = r * y[2];
        };
        let (y, _) = integrate(rhs, 0.0, PI, [zero, one, one, zero], h0, cfg)
            .map_err(|e| step_failure(0, lambda, e))?;
        return Ok(EdgeSample {
            s: Jet::constant(y[0]),
            sp: Jet::constant(y[1]),
            c: Jet::constant(y[2]),
            cp: Jet::constant(y[3]),
        });
    }

    let rhs = |x: f64, y: &[Complex64; 8], dy: &mut [Complex64; 8]| {
        let pv = p.eval(x);
        let r = q.eval(x) + pv * (2.0 * lambda) - lam2;
        let g = (pv - lambda) * 2.0;
        dy[0] = y[1];
        dy[1] = r * y[0];
        dy[2] = y[3];
        dy[3] = r * y[2];
        dy[4] = y[5];
        dy[5] = r * y[4] + g * y[0];
        dy[6] = y[7];
        dy[7] = r * y[6] + g * y[2];
    };
    let y0 = [zero, one, one, zero, zero, zero, zero, zero];
    let (y, _) = integrate(rhs, 0.0, PI, y0, h0, cfg).map_err(|e| step_failure(0, lambda, e))?;
    Ok(EdgeSample {
        s: Jet::new(y[0], y[4]),
        sp: Jet::new(y[1], y[5]),
        c: Jet::new(y[2], y[6]),
        cp: Jet::new(y[3], y[7]),
    })
}

/// Samples every edge of the pencil at `lambda`.
pub fn sample_pencil(
    pencil: &LoopGraphPencil,
    lambda: Complex64,
    with_lambda_derivative: bool,
    cfg: &IntegratorConfig,
) -> Result<SolutionSample> {
    let edges = pencil
        .edges()
        .iter()
        .enumerate()
        .map(|(j, e)| {
            integrate_edge(e, lambda, with_lambda_derivative, cfg).map_err(|err| match err {
                Error::StepFailure { lambda, reason, .. } => Error::StepFailure {
                    edge: j + 1,
                    lambda,
                    reason,
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SolutionSample {
        lambda,
        edges,
        has_derivative: with_lambda_derivative,
    })
}

/// `|C S' − C' S − 1|`, zero for an exact solution.
pub fn wronskian_defect(sample: &EdgeSample) -> f64 {
    (sample.c.v * sample.sp.v - sample.cp.v * sample.s.v - 1.0).norm()
}

/// Defect divided by `max(1, |C S'|, |C' S|)`.
///
/// Off the real axis the two products grow like `e^{2π|Im λ|}` and cancel,
/// so the absolute defect is limited by roundoff in the products.
pub fn wronskian_defect_relative(sample: &EdgeSample) -> f64 {
    let scale = 1.0_f64
        .max((sample.c.v * sample.sp.v).norm())
        .max((sample.cp.v * sample.s.v).norm());
    wronskian_defect(sample) / scale
}

/// Closed-form sample for constant coefficients `p ≡ a`, `q ≡ b`.
///
/// With `ω² = λ² − 2λa − b`: `S = sin ωπ/ω`, `S' = C = cos ωπ`,
/// `C' = −ω sin ωπ`. The expressions are even in ω, so the branch of the
/// square root does not matter.
pub fn constant_coefficient_sample(a: Complex64, b: Complex64, lambda: Complex64) -> EdgeSample {
    let w2 = lambda * lambda - lambda * a * 2.0 - b;
    let w = w2.sqrt();
    let (s, cp) = if w.norm() < 1e-8 {
        // Series in ω² to stay accurate at the removable singularity.
        let x = w2 * (PI * PI);
        (
            (1.0 - x / 6.0 + x * x / 120.0) * PI,
            -w2 * PI * (1.0 - x / 6.0),
        )
    } else {
        ((w * PI).sin() / w, -w * (w * PI).sin())
    };
    let c = (w * PI).cos();
    EdgeSample {
        s: Jet::constant(s),
        sp: Jet::constant(c),
        c: Jet::constant(c),
        cp: Jet::constant(cp),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheb::ChebSeries;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn const_edge(a: Complex64, b: Complex64) -> EdgeCoefficients {
        EdgeCoefficients::new(ChebSeries::constant(a), ChebSeries::constant(b))
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn zero_coefficients_closed_form() {
        let cfg = IntegratorConfig::default();
        let e = EdgeCoefficients::zero();
        for lam in [c(0.7, 0.0), c(-3.2, 0.4), c(12.5, -1.0)] {
            let s = integrate_edge(&e, lam, false, &cfg).unwrap();
            let pl = lam * PI;
            assert!(close(s.s.v, pl.sin() / lam, 1e-10));
            assert!(close(s.sp.v, pl.cos(), 1e-10));
            assert!(close(s.c.v, pl.cos(), 1e-10));
            assert!(close(s.cp.v, -lam * pl.sin(), 1e-10));
        }
        let s = integrate_edge(&e, c(0.0, 0.0), false, &cfg).unwrap();
        assert!(close(s.s.v, c(PI, 0.0), 1e-12));
        assert!(close(s.sp.v, c(1.0, 0.0), 1e-12));
        assert!(close(s.c.v, c(1.0, 0.0), 1e-12));
        assert!(s.cp.v.norm() < 1e-12);
    }

    #[test]
    fn constant_coefficients_match_closed_form() {
        let cfg = IntegratorConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.2..0.2));
            let b = c(rng.gen_range(-2.0..2.0), rng.gen_range(-0.2..0.2));
            let lam = c(rng.gen_range(-15.0..15.0), rng.gen_range(-1.5..1.5));
            let got = integrate_edge(&const_edge(a, b), lam, false, &cfg).unwrap();
            let want = constant_coefficient_sample(a, b, lam);
            for (g, w) in [(got.s, want.s), (got.sp, want.sp), (got.c, want.c), (got.cp, want.cp)] {
                assert!(close(g.v, w.v, 1e-10), "λ={lam}: {} vs {}", g.v, w.v);
            }
        }
    }

    #[test]
    fn lambda_derivative_matches_central_difference() {
        let cfg = IntegratorConfig::default();
        let e = EdgeCoefficients::from_real_fns(|t| 0.3 + 0.1 * t.cos(), |t| 0.2 * t.sin(), 24);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-5;
        for _ in 0..20 {
            let r = 20.0 * rng.gen::<f64>().sqrt();
            let phi = rng.gen_range(0.0..2.0 * PI);
            let lam = Complex64::from_polar(r, phi);
            let s = integrate_edge(&e, lam, true, &cfg).unwrap();
            let sp = integrate_edge(&e, lam + h, false, &cfg).unwrap();
            let sm = integrate_edge(&e, lam - h, false, &cfg).unwrap();
            let fd = (sp.s.v - sm.s.v) / (2.0 * h);
            assert!((s.s.d - fd).norm() <= 1e-6 * s.s.d.norm().max(1e-3), "λ={lam}");
            let fd = (sp.cp.v - sm.cp.v) / (2.0 * h);
            assert!((s.cp.d - fd).norm() <= 1e-6 * s.cp.d.norm().max(1e-3), "λ={lam}");
        }
    }

    #[test]
    fn wronskian_at_complex_lambda() {
        let cfg = IntegratorConfig::default();
        let e = EdgeCoefficients::from_real_fns(|t| 0.7 + 0.1 * (2.0 * t).sin(), |t| 0.5 * t.cos(), 24);
        let s = integrate_edge(&e, c(10.0, 5.0), true, &cfg).unwrap();
        assert!(wronskian_defect_relative(&s) <= 1e-9, "{}", wronskian_defect_relative(&s));
        for lam in [c(10.0, 2.0), c(-25.0, -2.0), c(3.0, 0.5)] {
            let s = integrate_edge(&e, lam, true, &cfg).unwrap();
            assert!(wronskian_defect(&s) <= 1e-9, "λ={lam}: {}", wronskian_defect(&s));
        }
        let exact = constant_coefficient_sample(c(0.0, 0.0), c(0.0, 0.0), c(3.3, 0.2));
        assert!(wronskian_defect(&exact) < 1e-13);
    }

    #[test]
    fn coarse_tolerance_degrades_wronskian() {
        let e = EdgeCoefficients::from_real_fns(|t| 0.7 + 0.1 * (2.0 * t).sin(), |t| 0.5 * t.cos(), 24);
        let coarse = IntegratorConfig {
            rtol: 1e-2,
            atol: 1e-2,
            ..IntegratorConfig::default()
        };
        let s = integrate_edge(&e, c(30.0, 1.0), false, &coarse).unwrap();
        assert!(wronskian_defect(&s) > 1e-9);
    }

    #[test]
    fn step_budget_reports_edge() {
        let pencil = LoopGraphPencil::new(vec![EdgeCoefficients::zero(), EdgeCoefficients::zero()]).unwrap();
        let tight = IntegratorConfig {
            max_steps: 3,
            ..IntegratorConfig::default()
        };
        match sample_pencil(&pencil, c(40.0, 0.0), false, &tight) {
            Err(Error::StepFailure { edge, .. }) => assert_eq!(edge, 1),
            other => panic!("expected StepFailure, got {other:?}"),
        }
    }
}
