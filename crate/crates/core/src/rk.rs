//! Adaptive embedded Runge–Kutta integration of complex first-order systems.
//!
//! Uses Verner's efficient 9(8) pair ("RKV98.IIa"): the ninth-order solution
//! is propagated and the eighth-order embedded solution drives step-size
//! control.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Maximum number of attempted steps (accepted plus rejected).
    pub max_steps: usize,
    /// Smallest admissible step; a rejection at this size is a failure.
    pub h_min: f64,
    pub h_max: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-13,
            max_steps: 200_000,
            h_min: 1e-12,
            h_max: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepError {
    TooManySteps { steps: usize, x: f64 },
    StepTooSmall { h: f64, x: f64 },
    NonFinite { x: f64 },
}

impl std::fmt::Display for StepError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StepError::TooManySteps { steps, x } => write!(f, "step budget of {steps} exhausted at x = {x}"),
            StepError::StepTooSmall { h, x } => write!(f, "step size {h:e} below minimum at x = {x}"),
            StepError::NonFinite { x } => write!(f, "non-finite state at x = {x}"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrates `y' = f(x, y)` from `x0` to `x1` starting at `y0` with initial
/// step guess `h0`.
pub fn integrate<const N: usize, F>(
    f: F,
    x0: f64,
    x1: f64,
    y0: [Complex64; N],
    h0: f64,
    cfg: &IntegratorConfig,
) -> Result<([Complex64; N], IntegrationStats), StepError>
where
    F: Fn(f64, &[Complex64; N], &mut [Complex64; N]),
{
    let zero = Complex64::new(0.0, 0.0);
    let span = x1 - x0;
    let dir = span.signum();
    let mut x = x0;
    let mut y = y0;
    let mut h = h0.abs().min(span.abs()).min(cfg.h_max).max(cfg.h_min) * dir;
    let mut k = [[zero; N]; STAGES];
    let mut stage = [zero; N];
    let mut stats = IntegrationStats::default();

    while (x1 - x) * dir > 0.0 {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(StepError::TooManySteps {
                steps: cfg.max_steps,
                x,
            });
        }
        if (x + h - x1) * dir > 0.0 {
            h = x1 - x;
        }
        for s in 0..STAGES {
            for i in 0..N {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += kj[i] * (h * a);
                    }
                }
                stage[i] = acc;
            }
            let mut out = [zero; N];
            f(x + C[s] * h, &stage, &mut out);
            k[s] = out;
        }
        let mut y_new = y;
        let mut err = 0.0_f64;
        for i in 0..N {
            let mut hi = zero;
            let mut lo = zero;
            for s in 0..STAGES {
                hi += k[s][i] * B_HIGH[s];
                lo += k[s][i] * B_LOW[s];
            }
            y_new[i] = y[i] + hi * h;
            let scale = cfg.atol + cfg.rtol * y[i].norm().max(y_new[i].norm());
            err = err.max(((hi - lo) * h).norm() / scale);
        }
        if !err.is_finite() || y_new.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            if h.abs() <= cfg.h_min {
                return Err(StepError::NonFinite { x });
            }
            stats.rejected += 1;
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            x += h;
            y = y_new;
            stats.accepted += 1;
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-1.0 / 9.0)).clamp(0.2, 5.0) };
            h = (h * fac).abs().min(cfg.h_max) * dir;
        } else {
            stats.rejected += 1;
            if h.abs() <= cfg.h_min {
                return Err(StepError::StepTooSmall { h: h.abs(), x });
            }
            let fac = (0.9 * err.powf(-1.0 / 9.0)).clamp(0.1, 0.9);
            h = (h * fac).abs().max(cfg.h_min) * dir;
        }
    }
    Ok((y, stats))
}

const STAGES: usize = 16;

const C: [f64; STAGES] = [
    0.0,
    0.03571,
    0.09906028091267415,
    0.1485904213690112,
    0.6134,
    0.2327359473605627,
    0.5538640526394373,
    0.6555,
    0.491625,
    0.06858,
    0.253,
    0.6620641795412046,
    0.8309,
    0.8998,
    1.0,
    1.0,
];

const A: [[f64; STAGES]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.03571, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [-0.03833735636677017, 0.13739763727944432, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0371476053422528, 0.0, 0.11144281602675842, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.674764429871505, 0.0, -9.982382134885293, 7.921017705013789, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.05242104050577351, 0.0, 0.0, 0.17969111891759532, 0.0006237879371938568, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.15924922236476322, 0.0, 0.0, -0.4298429877241087, 0.06665266542726088, 0.757805152571522, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.07283333333333333, 0.0, 0.0, 0.0, 0.0, 0.33593445906651037, 0.2467322076001563, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0729755859375, 0.0, 0.0, 0.0, 0.0, 0.33480097296993333, 0.11841582390506665, -0.0345673828125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.049112136634520964, 0.0, 0.0, 0.0, 0.0, 0.03983857361308652, 0.10696752889393549, -0.021742591654586477, -0.10559564748695649, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [-0.027079888186412805, 0.0, 0.0, 0.0, 0.0, 0.0333, -0.16455260700360572, 0.0342826630649739, 0.1585264064439221, 0.2185234256811225, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.055846577691088625, 0.0, 0.0, 0.0, 0.0, 0.09166533166672539, 0.2392399655523627, 0.01023834712248415, -0.0026793313228595426, 0.042356241814742845, 0.2253970470166604, 0.0, 0.0, 0.0, 0.0, 0.0],
    [-0.4802510512725196, 0.0, 0.0, 0.0, 0.0, -6.3596101625559305, -0.2762313898040841, -6.500796633979847, 0.5734765877040957, 1.3471259948681389, 5.936840409706221, 6.590346245333925, 0.0, 0.0, 0.0, 0.0],
    [0.3307533067671401, 0.0, 0.0, 0.0, 0.0, 5.956207776829962, -0.48683164004815277, 4.462055288206771, 0.7410258231442072, -0.7118192034575913, -5.454619594516665, -4.14080372924471, 0.20383197231903866, 0.0, 0.0, 0.0],
    [-0.5847111122998945, 0.0, 0.0, 0.0, 0.0, -12.41268417116267, 1.360245445660928, -22.426105311118683, -0.8828857055865458, 1.7701551285382304, 12.158096519185339, 22.230375204077607, -0.6634483760201249, 0.45096237872581374, 0.0, 0.0],
    [1.9405755498106487, 0.0, 0.0, 0.0, 0.0, 21.977984081145564, 0.8230747326984729, 68.16441683626354, -3.117097463620267, -4.56884102182244, -18.74190987126265, -66.57711839637832, 1.0989155531654418, 0.0, 0.0, 0.0],
];

/// Ninth-order weights.
const B_HIGH: [f64; STAGES] = [0.015006690149797247, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0551809927463813, 0.2384947263782183, 0.12881517742829915, 0.22766231110462157, 1.2295325874375174, 0.04624976662810384, 0.13861963193662938, 0.030800101683194355, 0.0];

/// Embedded eighth-order weights.
const B_LOW: [f64; STAGES] = [0.018972105324811014, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.4081103145494938, 0.1260323883820921, 0.11883750634511497, 0.24910419978386875, -3.2699662199289783, 0.3023798100228883, 0.0, 0.0, 0.04652989552070924];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_is_consistent() {
        for (row, c) in A.iter().zip(C.iter()) {
            assert!((row.iter().sum::<f64>() - c).abs() < 1e-13);
        }
        for q in 1..=9 {
            let s: f64 = B_HIGH.iter().zip(C.iter()).map(|(b, c)| b * c.powi(q - 1)).sum();
            assert!((s - 1.0 / q as f64).abs() < 1e-14, "quadrature order {q}");
        }
    }

    #[test]
    fn harmonic_oscillator_to_tolerance() {
        // y'' = -ω² y, y(0)=0, y'(0)=1 → y = sin(ωx)/ω
        let w = 17.0;
        let cfg = IntegratorConfig::default();
        let (y, stats) = integrate(
            |_, y: &[Complex64; 2], out: &mut [Complex64; 2]| {
                out[0] = y[1];
                out[1] = -y[0] * (w * w);
            },
            0.0,
            std::f64::consts::PI,
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            0.01,
            &cfg,
        )
        .unwrap();
        let exact = (w * std::f64::consts::PI).sin() / w;
        assert!((y[0].re - exact).abs() < 1e-11);
        assert!(stats.accepted > 10);
    }

    #[test]
    fn step_budget_is_enforced() {
        let cfg = IntegratorConfig {
            max_steps: 3,
            ..Default::default()
        };
        let r = integrate(
            |_, y: &[Complex64; 2], out: &mut [Complex64; 2]| {
                out[0] = y[1];
                out[1] = -y[0] * 400.0;
            },
            0.0,
            3.0,
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            0.01,
            &cfg,
        );
        assert!(matches!(r, Err(StepError::TooManySteps { .. })));
    }
}
