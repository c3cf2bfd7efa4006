#![allow(dead_code)]

use num_complex::Complex64;
use pencil_graph::cheb::ChebSeries;
use pencil_graph::pencil::{normalize_shift, EdgeCoefficients, LoopGraphPencil};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Smooth three-edge pencil with distinct means and a loop of zero mean.
pub fn reference_pencil() -> LoopGraphPencil {
    let e = |p: fn(f64) -> f64, q: fn(f64) -> f64| EdgeCoefficients::from_real_fns(p, q, 24);
    LoopGraphPencil::new(vec![
        e(|t| 0.3 + 0.1 * t.cos(), |t| 0.2 * t.sin()),
        e(|t| 0.7 + 0.1 * (2.0 * t).sin(), |t| 0.5 * t.cos()),
        e(|t| 0.2 * t.cos(), |t| 0.1 * (2.0 * t).cos()),
    ])
    .unwrap()
}

fn random_series(rng: &mut ChaCha8Rng, degree: usize, scale: f64) -> ChebSeries {
    let c: Vec<f64> = (0..=degree).map(|k| scale * rng.gen_range(-1.0..1.0) / (1.0 + k as f64).powi(2)).collect();
    ChebSeries::from_real(&c)
}

/// Random smooth pencil with `m` edges, normalised so that `α_m = 0`.
pub fn random_pencil(rng: &mut ChaCha8Rng, m: usize) -> LoopGraphPencil {
    let edges = (0..m)
        .map(|_| EdgeCoefficients::new(random_series(rng, 6, 0.6), random_series(rng, 6, 1.5)))
        .collect();
    normalize_shift(&LoopGraphPencil::new(edges).unwrap()).0
}

pub fn random_lambda(rng: &mut ChaCha8Rng, re: f64, im: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-re..=re), rng.gen_range(-im..=im))
}

/// Uniform interior grid of `n` points on `[−r, r]`.
pub fn grid(n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|i| -r + 2.0 * r * (i as f64 + 0.5) / n as f64).collect()
}
