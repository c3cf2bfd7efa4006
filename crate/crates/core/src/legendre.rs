//! Legendre series on `[-π, π]` and their exponential moments.
//!
//! Transformation-operator kernels are smooth on `[-π, π]` but not periodic,
//! so they are stored as `K(t) = Σ_k a_k P_k(t/π)`. The moment against an
//! exponential has the closed form
//!
//! ```text
//! ∫_{-π}^{π} P_k(t/π) e^{iλt} dt = 2π i^k j_k(πλ)
//! ```
//!
//! with `j_k` the spherical Bessel function, valid for complex `λ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::quadrature::legendre_all;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendreSeries {
    pub coeffs: Vec<Complex64>,
}

impl LegendreSeries {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(degree: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); degree + 1],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Value at `t ∈ [-π, π]`.
    pub fn eval(&self, t: f64) -> Complex64 {
        let p = legendre_all(self.degree(), t / PI);
        self.coeffs.iter().zip(&p).map(|(c, p)| c * p).sum()
    }

    /// `∫_{-π}^{π} K(t) dt`.
    pub fn integral(&self) -> Complex64 {
        self.coeffs.first().copied().unwrap_or_default() * (2.0 * PI)
    }

    /// `∫ K(t) e^{iλt} dt`.
    pub fn transform(&self, lambda: Complex64) -> Complex64 {
        let m = ExpMoments::new(lambda, self.degree());
        self.coeffs.iter().zip(&m.value).map(|(c, v)| c * v).sum()
    }

    /// `(∫ K e^{iλt} dt, ∫ K · it e^{iλt} dt)`.
    pub fn transform_with_derivative(&self, lambda: Complex64) -> (Complex64, Complex64) {
        let m = ExpMoments::new(lambda, self.degree());
        let v = self.coeffs.iter().zip(&m.value).map(|(c, v)| c * v).sum();
        let d = self.coeffs.iter().zip(&m.derivative).map(|(c, v)| c * v).sum();
        (v, d)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &LegendreSeries) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = Complex64::new(0.0, 0.0);
        Self::new(
            (0..n)
                .map(|k| self.coeffs.get(k).copied().unwrap_or(z) + other.coeffs.get(k).copied().unwrap_or(z))
                .collect(),
        )
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Moments `M_k(λ) = ∫ P_k(t/π) e^{iλt} dt` and their λ-derivatives
/// `∫ P_k(t/π) · it · e^{iλt} dt` for `k = 0..=degree`.
#[derive(Debug, Clone)]
pub struct ExpMoments {
    pub value: Vec<Complex64>,
    pub derivative: Vec<Complex64>,
}

impl ExpMoments {
    pub fn new(lambda: Complex64, degree: usize) -> Self {
        let z = lambda * PI;
        let j = spherical_bessel_j(z, degree + 1);
        let mut ik = Complex64::new(1.0, 0.0);
        let mut value = Vec::with_capacity(degree + 1);
        let mut derivative = Vec::with_capacity(degree + 1);
        for k in 0..=degree {
            value.push(ik * j[k] * (2.0 * PI));
            // j_k' = (k j_{k-1} − (k+1) j_{k+1}) / (2k+1); d/dλ brings a factor π.
            let jm1 = if k == 0 { Complex64::new(0.0, 0.0) } else { j[k - 1] };
            let kf = k as f64;
            let dj = (jm1 * kf - j[k + 1] * (kf + 1.0)) / (2.0 * kf + 1.0);
            derivative.push(ik * dj * (2.0 * PI * PI));
            ik *= I;
        }
        Self { value, derivative }
    }
}

/// Spherical Bessel functions `j_0..=j_n` at complex `z`.
///
/// Power series for `|z| < 1`, Miller's backward recurrence otherwise,
/// normalised against whichever of `j_0`, `j_1` is better conditioned.
pub fn spherical_bessel_j(z: Complex64, n: usize) -> Vec<Complex64> {
    if z.norm() < 1.0 {
        return (0..=n).map(|k| spherical_bessel_series(z, k)).collect();
    }
    let start = n.max(z.norm().ceil() as usize) + 30 + (4.0 * z.norm().sqrt()) as usize;
    let mut vals = vec![Complex64::new(0.0, 0.0); start + 2];
    vals[start + 1] = Complex64::new(0.0, 0.0);
    vals[start] = Complex64::new(1e-30, 0.0);
    let zinv = z.inv();
    for k in (1..=start).rev() {
        let next = vals[k] * ((2 * k + 1) as f64) * zinv - vals[k + 1];
        vals[k - 1] = next;
        if next.norm() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let j0 = z.sin() * zinv;
    let j1 = z.sin() * zinv * zinv - z.cos() * zinv;
    let scale = if j0.norm() >= j1.norm() {
        j0 / vals[0]
    } else {
        j1 / vals[1]
    };
    vals.truncate(n + 1);
    vals.iter().map(|v| v * scale).collect()
}

fn spherical_bessel_series(z: Complex64, k: usize) -> Complex64 {
    // z^k / (2k+1)!! · Σ_i (−z²/2)^i / (i! (2k+3)(2k+5)…(2k+2i+1))
    let mut lead = Complex64::new(1.0, 0.0);
    for i in 1..=k {
        lead *= z / ((2 * i + 1) as f64);
    }
    let w = -z * z * 0.5;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for i in 1..60 {
        term *= w / (i as f64 * (2 * k + 2 * i + 1) as f64);
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    lead * sum
}
