//! Finite-window probes of the Riesz-basis property of the edge system.
//!
//! Every element is a two-component function `(u + t w) e^{iλt}` on `[−π, π]`,
//! so Gram entries reduce to the moments `∫ t^k e^{iμt} dt`, `k ≤ 2`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inverse_edge::EdgeReconstruction;
use crate::jet::Jet;
use crate::legendre::ExpMoments;
use crate::pencil::EdgeCoefficients;
use crate::rk::IntegratorConfig;
use crate::shooting::integrate_edge;
use crate::spectral::{BetaSet, Subspectrum};

const SINGULAR_TOL: f64 = 1e-12;

/// `S₁(π,λ)` and `S₁'(π,λ)` with their λ-derivatives.
pub trait DirichletSource: Sync {
    fn sample(&self, lambda: Complex64) -> Result<(Jet, Jet)>;
}

/// Boundary edge known exactly.
pub struct TruthEdge<'a> {
    pub edge: &'a EdgeCoefficients,
    pub cfg: IntegratorConfig,
}

impl DirichletSource for TruthEdge<'_> {
    fn sample(&self, lambda: Complex64) -> Result<(Jet, Jet)> {
        let s = integrate_edge(self.edge, lambda, true, &self.cfg)?;
        Ok((s.s, s.sp))
    }
}

impl DirichletSource for EdgeReconstruction {
    fn sample(&self, lambda: Complex64) -> Result<(Jet, Jet)> {
        let h = 1e-5;
        let d = |f: &dyn Fn(Complex64) -> Complex64| (f(lambda + h) - f(lambda - h)) / (2.0 * h);
        Ok((
            Jet::new(self.s(lambda), d(&|l| self.s(l))),
            Jet::new(self.sp(lambda), d(&|l| self.sp(l))),
        ))
    }
}

/// `(u + t w) e^{iλt}` with two-component `u`, `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub index: Option<(i64, usize)>,
    pub lambda: Complex64,
    pub u: [Complex64; 2],
    pub w: [Complex64; 2],
}

impl Element {
    pub fn exponential(index: Option<(i64, usize)>, lambda: Complex64, u: [Complex64; 2]) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            index,
            lambda,
            u,
            w: [zero, zero],
        }
    }
}

/// `∫_{−π}^{π} t^k e^{iμt} dt` for `k = 0, 1, 2`.
fn moments(mu: Complex64) -> [Complex64; 3] {
    let m = ExpMoments::new(mu, 2);
    [m.value[0], m.value[1] * PI, (m.value[2] * 2.0 + m.value[0]) * (PI * PI / 3.0)]
}

fn dot(a: &[Complex64; 2], b: &[Complex64; 2]) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// `(f, g) = ∫ f̄ · g dt`.
pub fn inner(f: &Element, g: &Element) -> Complex64 {
    let [i0, i1, i2] = moments(g.lambda - f.lambda.conj());
    dot(&f.u, &g.u) * i0 + (dot(&f.u, &g.w) + dot(&f.w, &g.u)) * i1 + dot(&f.w, &g.w) * i2
}

pub fn gram(elements: &[Element]) -> DMatrix<Complex64> {
    let n = elements.len();
    let upper: Vec<(usize, usize, Complex64)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| (i..n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, inner(&elements[i], &elements[j])))
        .collect();
    let mut g = DMatrix::zeros(n, n);
    for (i, j, v) in upper {
        if i == j {
            g[(i, i)] = Complex64::new(v.re, 0.0);
        } else {
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    g
}

pub fn normalized_gram(g: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let d: Vec<f64> = (0..g.nrows()).map(|i| g[(i, i)].re.max(f64::MIN_POSITIVE).sqrt()).collect();
    DMatrix::from_fn(g.nrows(), g.ncols(), |i, j| g[(i, j)] / (d[i] * d[j]))
}

pub fn hermitian_defect(g: &DMatrix<Complex64>) -> f64 {
    (&g.adjoint() - g).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `v⁰_{nk} = [cos((β_k − α₁)π), −sin((β_k − α₁)π)] e^{i(2n+β_k)t}`.
pub fn reference_element(n: i64, k: usize, beta: f64, alpha1: f64) -> Element {
    let x = (beta - alpha1) * PI;
    Element::exponential(
        Some((n, k)),
        Complex64::new(2.0 * n as f64 + beta, 0.0),
        [Complex64::new(x.cos(), 0.0), Complex64::new(-x.sin(), 0.0)],
    )
}

/// `e_{nk} = e^{i(4n+2β_k)t}` in the first component.
pub fn exponential_element(n: i64, k: usize, beta: f64) -> Element {
    let zero = Complex64::new(0.0, 0.0);
    Element::exponential(
        Some((n, k)),
        Complex64::new(4.0 * n as f64 + 2.0 * beta, 0.0),
        [Complex64::new(1.0, 0.0), zero],
    )
}

/// Index set `{(n, k) : |n| ≤ n_window, k = 1..4}`.
pub fn reference_indices(n_window: usize) -> Vec<(i64, usize)> {
    let n = n_window as i64;
    (-n..=n).flat_map(|nn| (1..=4).map(move |k| (nn, k))).collect()
}

/// Elements `v_{θj}` for `θ ∈ Θ₀`; `λ₀ = 0` comes first and multiple
/// values add the λ-derivative element.
pub fn system_elements(sub: &Subspectrum, source: &dyn DirichletSource) -> Result<Vec<Element>> {
    let mut nodes = vec![(Some((0, 1)), Complex64::new(0.0, 0.0), 0)];
    for e in &sub.entries {
        nodes.push((Some(e.index), e.lambda, 0));
        if e.m_theta > 1 && e.order == 0 {
            nodes.push((Some(e.index), e.lambda, 1));
        }
    }
    nodes
        .par_iter()
        .map(|&(index, lambda, order)| {
            let (s, sp) = source.sample(lambda)?;
            let a = sp;
            let b = -(Jet::var(lambda) * s);
            let i = Complex64::new(0.0, 1.0);
            Ok(if order == 0 {
                Element::exponential(index, lambda, [a.v, b.v])
            } else {
                Element {
                    index,
                    lambda,
                    u: [a.d, b.d],
                    w: [i * a.v, i * b.v],
                }
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub m1: f64,
    pub m2: f64,
    pub condition: f64,
}

fn extreme_eigenvalues(g: &DMatrix<Complex64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(g.clone()).eigenvalues;
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Partial tail `Σ_{|n| ≥ n_star} ‖v_{nk0} − v⁰_{nk}‖²` over the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosenessTail {
    pub n_star: i64,
    pub tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisProbe {
    pub alpha1: f64,
    pub n_window: usize,
    pub elements: Vec<Element>,
    pub gram: DMatrix<Complex64>,
    pub eigenvalues: Vec<f64>,
    pub m1: f64,
    pub m2: f64,
    pub closeness: Vec<ClosenessTail>,
    /// Largest per-index `‖v_{nk0} − v⁰_{nk}‖²` in each `|n|` shell.
    pub shell_distances: Vec<(i64, f64)>,
}

/// Squared distance `‖f − g‖²` through the closed-form inner products.
pub fn distance_squared(f: &Element, g: &Element) -> f64 {
    (inner(f, f) + inner(g, g) - inner(f, g) * 2.0).re.max(0.0)
}

/// Builds the normalised Gram matrix of `𝒱(Λ)` and the closeness tails
/// against `𝒱⁰` on `|n| ≤ n_window`.
pub fn build_probe(sub: &Subspectrum, source: &dyn DirichletSource, betas: &BetaSet, alpha1: f64, n_window: usize) -> Result<BasisProbe> {
    let window = n_window.min(sub.n_window) as i64;
    let mut trimmed = sub.clone();
    trimmed.entries.retain(|e| e.index.0.abs() <= window);
    trimmed.n_window = window as usize;
    let elements = system_elements(&trimmed, source)?;
    let g = normalized_gram(&gram(&elements));
    let eig = SymmetricEigen::new(g.clone()).eigenvalues;
    let mut eigenvalues: Vec<f64> = eig.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);

    let mut shells = vec![0.0f64; window as usize + 1];
    let mut sums = vec![0.0f64; window as usize + 1];
    for e in elements.iter().skip(1) {
        if e.w != [Complex64::new(0.0, 0.0); 2] {
            continue;
        }
        let Some((n, k)) = e.index else { continue };
        let d = distance_squared(e, &reference_element(n, k, betas.beta(k), alpha1));
        let s = n.unsigned_abs() as usize;
        shells[s] = shells[s].max(d);
        sums[s] += d;
    }
    let mut closeness = Vec::with_capacity(sums.len());
    let mut acc = 0.0;
    for (s, v) in sums.iter().enumerate().rev() {
        acc += v;
        closeness.push(ClosenessTail { n_star: s as i64, tail: acc });
    }
    closeness.reverse();

    Ok(BasisProbe {
        alpha1,
        n_window: window as usize,
        elements,
        gram: g,
        m1: eigenvalues.first().copied().unwrap_or(0.0),
        m2: eigenvalues.last().copied().unwrap_or(0.0),
        eigenvalues,
        closeness,
        shell_distances: shells.into_iter().enumerate().map(|(s, d)| (s as i64, d)).collect(),
    })
}

pub fn frame_bounds(probe: &BasisProbe) -> Result<FrameBounds> {
    frame_bounds_of(&probe.gram)
}

/// Extreme eigenvalues of a normalised Gram matrix.
pub fn frame_bounds_of(g: &DMatrix<Complex64>) -> Result<FrameBounds> {
    let (m1, m2) = extreme_eigenvalues(g);
    if m1 <= SINGULAR_TOL {
        return Err(Error::SingularGram { min_eigenvalue: m1 });
    }
    Ok(FrameBounds {
        m1,
        m2,
        condition: m2 / m1,
    })
}

/// Gram matrices of `𝒱⁰` and `ℰ` on the same window.
pub fn reference_grams(betas: &BetaSet, alpha1: f64, n_window: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let idx = reference_indices(n_window);
    let v0: Vec<Element> = idx.iter().map(|&(n, k)| reference_element(n, k, betas.beta(k), alpha1)).collect();
    let e: Vec<Element> = idx.iter().map(|&(n, k)| exponential_element(n, k, betas.beta(k))).collect();
    (gram(&v0), gram(&e))
}

/// `|S(λ)| e^{−π|Im λ|}` extremes along `Im λ = ±K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripBound {
    pub height: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineTypeReport {
    pub betas: Vec<f64>,
    pub separation: f64,
    pub strips: Vec<StripBound>,
    pub ratio_spread: f64,
    pub passed: bool,
}

/// `S(λ) = ∏ sin((λ − 2β_j)π/4)`, whose zeros are `4n + 2β_j`.
pub fn sine_type_function(betas: &[f64], lambda: Complex64) -> Complex64 {
    betas.iter().map(|&b| ((lambda - 2.0 * b) * (PI / 4.0)).sin()).product()
}

/// Separation of `{4n + 2β_j}` and strip bounds of the sine-type function
/// generating it.
pub fn sine_type_check(betas: &[f64]) -> SineTypeReport {
    let mut residues: Vec<f64> = betas.iter().map(|b| (2.0 * b).rem_euclid(4.0)).collect();
    residues.sort_by(f64::total_cmp);
    let separation = if residues.is_empty() {
        0.0
    } else {
        let wrap = residues[0] + 4.0 - residues[residues.len() - 1];
        residues.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::min)
    };

    let samples = 801;
    let strips: Vec<StripBound> = [2.0, 4.0, 8.0]
        .iter()
        .map(|&h: &f64| {
            let mut lower = f64::INFINITY;
            let mut upper = 0.0f64;
            for sign in [-1.0, 1.0] {
                for i in 0..samples {
                    let x = 8.0 * i as f64 / (samples - 1) as f64;
                    let v = sine_type_function(betas, Complex64::new(x, sign * h)).norm() * (-PI * h).exp();
                    lower = lower.min(v);
                    upper = upper.max(v);
                }
            }
            StripBound { height: h, lower, upper }
        })
        .collect();
    let ratios: Vec<f64> = strips.iter().map(|s| s.upper / s.lower).collect();
    let ratio_spread = ratios.iter().copied().fold(0.0, f64::max) / ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let passed = separation > 1e-12 && strips.iter().all(|s| s.lower > 0.0 && s.upper.is_finite());
    SineTypeReport {
        betas: betas.to_vec(),
        separation,
        strips,
        ratio_spread,
        passed,
    }
}
