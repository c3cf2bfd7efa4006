//! Chebyshev series on the edge parameter interval `[0, π]`.
//!
//! A series `f(x) = Σ a_k T_k(2x/π − 1)` with complex coefficients. Real
//! coefficient lists take a cheaper evaluation path, which matters because
//! the integrator evaluates both pencil coefficients at every stage.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct ChebSeries {
    coeffs: Vec<Complex64>,
    real: Option<Vec<f64>>,
}

impl ChebSeries {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let coeffs = if coeffs.is_empty() {
            vec![Complex64::new(0.0, 0.0)]
        } else {
            coeffs
        };
        let real = coeffs
            .iter()
            .all(|c| c.im == 0.0)
            .then(|| coeffs.iter().map(|c| c.re).collect());
        Self { coeffs, real }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::from_real(&[0.0])
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// Interpolates `f` at the `degree + 1` Chebyshev points of the first kind.
    pub fn from_fn<F: Fn(f64) -> Complex64>(f: F, degree: usize) -> Self {
        let n = degree + 1;
        let nf = n as f64;
        let values: Vec<Complex64> = (0..n)
            .map(|j| {
                let theta = PI * (j as f64 + 0.5) / nf;
                f(to_edge(theta.cos()))
            })
            .collect();
        let coeffs = (0..n)
            .map(|k| {
                let s: Complex64 = values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * (PI * k as f64 * (j as f64 + 0.5) / nf).cos())
                    .sum();
                let scale = if k == 0 { 1.0 / nf } else { 2.0 / nf };
                s * scale
            })
            .collect();
        Self::new(coeffs).trimmed()
    }

    pub fn from_real_fn<F: Fn(f64) -> f64>(f: F, degree: usize) -> Self {
        Self::from_fn(|x| Complex64::new(f(x), 0.0), degree)
    }

    /// Least-squares fit of a series of the given degree to samples on a uniform
    /// grid `x_i = iπ/(n−1)`.
    pub fn from_uniform_samples(samples: &[Complex64], degree: usize) -> Self {
        let n = samples.len();
        if n == 1 {
            return Self::constant(samples[0]);
        }
        let deg = degree.min(n - 1);
        let xs: Vec<f64> = (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect();
        let mut a = nalgebra::DMatrix::<Complex64>::zeros(n, deg + 1);
        for (i, &x) in xs.iter().enumerate() {
            let u = to_unit(x);
            let mut t0 = 1.0;
            let mut t1 = u;
            for k in 0..=deg {
                let t = match k {
                    0 => 1.0,
                    1 => u,
                    _ => {
                        let t2 = 2.0 * u * t1 - t0;
                        t0 = t1;
                        t1 = t2;
                        t2
                    }
                };
                a[(i, k)] = Complex64::new(t, 0.0);
            }
        }
        let b = nalgebra::DVector::from_column_slice(samples);
        let svd = a.svd(true, true);
        let x = svd
            .solve(&b, 1e-14)
            .expect("SVD solve with both factors computed");
        Self::new(x.iter().copied().collect())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_real(&self) -> bool {
        self.real.is_some()
    }

    /// Clenshaw evaluation at `x ∈ [0, π]`.
    #[inline]
    pub fn eval(&self, x: f64) -> Complex64 {
        let u = to_unit(x);
        if let Some(r) = &self.real {
            return Complex64::new(clenshaw_real(r, u), 0.0);
        }
        let mut b1 = Complex64::new(0.0, 0.0);
        let mut b2 = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + b1 * (2.0 * u) - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + b1 * u - b2
    }

    /// Evaluation as `f64` when the series is real.
    #[inline]
    pub fn eval_real(&self, x: f64) -> Option<f64> {
        self.real.as_ref().map(|r| clenshaw_real(r, to_unit(x)))
    }

    /// `(1/π) ∫_0^π f(t) dt` by Gauss–Legendre quadrature that is exact for
    /// the stored degree.
    pub fn mean(&self) -> Complex64 {
        let n = self.degree() / 2 + 1;
        let (nodes, weights) = gauss_legendre(n);
        // dx = (π/2) du, so (1/π)∫ = (1/2) Σ w f.
        nodes
            .iter()
            .zip(&weights)
            .map(|(&u, &w)| self.eval(to_edge(u)) * w)
            .sum::<Complex64>()
            * 0.5
    }

    /// Mean from the closed-form integrals `∫_{-1}^{1} T_k = 2/(1−k²)` (k even).
    pub fn mean_closed_form(&self) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(k, _)| k % 2 == 0)
            .map(|(k, c)| c * (1.0 / (1.0 - (k * k) as f64)))
            .sum()
    }

    /// `a·self + b·other + c`, padded to the longer degree.
    pub fn affine_combination(&self, a: Complex64, other: &ChebSeries, b: Complex64, c: Complex64) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        let mut coeffs: Vec<Complex64> = (0..n)
            .map(|k| {
                a * self.coeffs.get(k).copied().unwrap_or(zero)
                    + b * other.coeffs.get(k).copied().unwrap_or(zero)
            })
            .collect();
        coeffs[0] += c;
        Self::new(coeffs)
    }

    pub fn add_constant(&self, c: Complex64) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] += c;
        Self::new(coeffs)
    }

    /// Max-norm distance on a fine grid of `[0, π]`.
    pub fn max_distance(&self, other: &ChebSeries, samples: usize) -> f64 {
        (0..=samples)
            .map(|i| {
                let x = PI * i as f64 / samples as f64;
                (self.eval(x) - other.eval(x)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Drops trailing coefficients below `1e-15` of the largest one.
    pub fn trimmed(self) -> Self {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut coeffs = self.coeffs;
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() <= 1e-15 * scale) {
            coeffs.pop();
        }
        Self::new(coeffs)
    }

    pub fn padded(&self, degree: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(degree + 1, Complex64::new(0.0, 0.0));
        Self::new(coeffs)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl From<Vec<Complex64>> for ChebSeries {
    fn from(coeffs: Vec<Complex64>) -> Self {
        Self::new(coeffs)
    }
}

impl From<ChebSeries> for Vec<Complex64> {
    fn from(s: ChebSeries) -> Self {
        s.coeffs
    }
}

#[inline]
fn clenshaw_real(c: &[f64], u: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * u * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c[0] + u * b1 - b2
}

#[inline]
fn to_unit(x: f64) -> f64 {
    2.0 * x / PI - 1.0
}

#[inline]
fn to_edge(u: f64) -> f64 {
    (u + 1.0) * PI / 2.0
}
