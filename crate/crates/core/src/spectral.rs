//! Asymptotic branches, eigenvalue location and numbering, subspectra and
//! the sign data of the loop.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::assign::min_cost_assignment;
use crate::characteristic::{delta, delta_jet, dm_from_loop, q_from_loop, ALPHA_M_TOL};
use crate::contour::{find_zeros_in_strips, ContourOptions, Rect};
use crate::error::{Error, Result};
use crate::pencil::{dist_to_integer, EdgeCoefficients, LoopGraphPencil};
use crate::rk::IntegratorConfig;
use crate::shooting::{integrate_edge, sample_pencil};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub integrator: IntegratorConfig,
    pub contour: ContourOptions,
    /// Half height of the search window around the real axis.
    pub height: f64,
    /// `|S_j(π,λ)| ≤ zero_tol / max(1,|λ|)` counts as a zero.
    pub zero_tol: f64,
    /// `|Q(ν)| ≤ omega_zero_tol` gives `ω = 0`.
    pub omega_zero_tol: f64,
    /// Smallest admissible `|d_m(ν_n)|` in the Lemma check.
    pub lemma_tol: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            contour: ContourOptions::default(),
            height: 2.0,
            zero_tol: 1e-8,
            omega_zero_tol: 1e-9,
            lemma_tol: 1e-8,
        }
    }
}

/// `cot((λ−α)π)` summed over the given means.
pub fn kappa1(alphas: &[f64], lambda: f64) -> f64 {
    alphas.iter().map(|a| 1.0 / ((lambda - a) * PI).tan()).sum()
}

/// `2(1 − cos λπ)/sin λπ = 2 tan(λπ/2)`.
pub fn kappa2(lambda: f64) -> f64 {
    2.0 * (0.5 * lambda * PI).tan()
}

/// Leading term of `λ^{m−1} Δ(λ)`; `alphas` holds `α_1..α_{m−1}`.
pub fn d_function(alphas: &[f64], lambda: Complex64) -> Complex64 {
    let s: Vec<Complex64> = alphas.iter().map(|a| ((lambda - a) * PI).sin()).collect();
    let sl = (lambda * PI).sin();
    let mut total = Complex64::new(0.0, 0.0);
    for (j, a) in alphas.iter().enumerate() {
        let others: Complex64 = s.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v).product();
        total += ((lambda - a) * PI).cos() * others * sl;
    }
    total + ((lambda * PI).cos() - 1.0) * 2.0 * s.iter().product::<Complex64>()
}

/// Branch limits `β_1..β_{2m}` of the eigenvalue asymptotics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaSet {
    /// `β_1 < … < β_{2m−1}` followed by `β_{2m} = 0`.
    pub betas: Vec<f64>,
    /// The means `α_1..α_{m−1}` the set was computed from.
    pub alphas: Vec<f64>,
}

impl BetaSet {
    pub fn m(&self) -> usize {
        self.betas.len() / 2
    }

    /// `β_k` with 1-based `k`.
    pub fn beta(&self, k: usize) -> f64 {
        self.betas[k - 1]
    }

    /// Offset `c` at the centre of the widest gap of the β's modulo 2, so no
    /// limit `2n + β_k` lies near a block edge `2n + c`. A limit may fall in
    /// a neighbouring block when the widest gap is interior.
    pub fn block_offset(&self) -> f64 {
        let mut b = self.betas.clone();
        b.sort_by(f64::total_cmp);
        let mut best = (b[0] + 2.0 - b[b.len() - 1], b[b.len() - 1] - 2.0);
        for w in b.windows(2) {
            if w[1] - w[0] > best.0 {
                best = (w[1] - w[0], w[0]);
            }
        }
        let mut c = best.1 + 0.5 * best.0;
        while c >= b[0] {
            c -= 2.0;
        }
        while c < b[b.len() - 1] - 2.0 {
            c += 2.0;
        }
        c
    }

    /// Smallest distance between two limits `2n + β_k` modulo 2.
    pub fn separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.betas.len() {
            for j in i + 1..self.betas.len() {
                let d = (self.betas[i] - self.betas[j]).rem_euclid(2.0);
                best = best.min(d.min(2.0 - d));
            }
        }
        best
    }
}

/// Roots of `κ₁ = κ₂` on the `2m − 1` monotonicity intervals plus `β_{2m} = 0`.
pub fn solve_betas(alphas: &[f64]) -> Result<BetaSet> {
    if alphas.is_empty() {
        return Err(Error::InvalidArgument("at least one boundary-edge mean is required".into()));
    }
    let mut red: Vec<f64> = alphas.iter().map(|a| a.rem_euclid(1.0)).collect();
    for (i, a) in red.iter().enumerate() {
        if dist_to_integer(*a) < 1e-8 {
            return Err(Error::DegenerateAlphas {
                i: i + 1,
                j: alphas.len() + 1,
                a: alphas[i],
                b: 0.0,
            });
        }
        for j in i + 1..red.len() {
            if dist_to_integer(a - red[j]) < 1e-8 {
                return Err(Error::DegenerateAlphas {
                    i: i + 1,
                    j: j + 1,
                    a: alphas[i],
                    b: alphas[j],
                });
            }
        }
    }
    red.sort_by(f64::total_cmp);
    let mut ends = vec![-1.0];
    ends.extend(red.iter().map(|a| a - 1.0));
    ends.extend(red.iter().copied());
    ends.push(1.0);

    // κ₁ − κ₂ falls from +∞ to −∞ on every interval.
    let g = |x: f64| kappa1(&red, x) - kappa2(x);
    let mut betas = Vec::with_capacity(2 * red.len() + 2);
    for w in ends.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        betas.push(0.5 * (lo + hi));
    }
    betas.push(0.0);
    Ok(BetaSet {
        betas,
        alphas: alphas.to_vec(),
    })
}

/// Branch limits from the means of edges `1..m−1`; the means must be real.
pub fn betas_for_pencil(pencil: &LoopGraphPencil) -> Result<BetaSet> {
    let alphas = pencil.alphas();
    let mut re = Vec::with_capacity(alphas.len() - 1);
    for (j, a) in alphas[..alphas.len() - 1].iter().enumerate() {
        if a.im.abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("mean of edge {} is not real: {a}", j + 1)));
        }
        re.push(a.re);
    }
    solve_betas(&re)
}

/// Index set of the eigenvalue numbering restricted to one period `n`.
pub fn index_set_block(m: usize, n: i64) -> Vec<(i64, usize)> {
    let top = if n == 0 { m + 1 } else { 2 * m };
    (1..=top).map(|k| (n, k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    /// `(n, k)` once numbered.
    pub index: Option<(i64, usize)>,
    pub lambda: Complex64,
    /// Multiplicity of the eigenvalue (not of the entry).
    pub multiplicity: usize,
    /// `|Δ(λ)|`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub entries: Vec<SpectrumEntry>,
    pub window: Rect,
    /// Winding-number total over the window.
    pub contour_count: usize,
    /// Human-readable notes on near-tied numberings.
    pub ambiguities: Vec<String>,
}

impl Spectrum {
    pub fn get(&self, n: i64, k: usize) -> Option<&SpectrumEntry> {
        self.entries.iter().find(|e| e.index == Some((n, k)))
    }

    /// Distinct eigenvalues, multiplicity counted once.
    pub fn distinct(&self) -> Vec<&SpectrumEntry> {
        let mut out: Vec<&SpectrumEntry> = Vec::new();
        for e in &self.entries {
            if !out.iter().any(|o| o.lambda == e.lambda) {
                out.push(e);
            }
        }
        out
    }
}

/// Asymptotic positions `2n + β_k` covering `[re_min, re_max]`.
fn asymptotic_guesses(betas: &BetaSet, re_min: f64, re_max: f64) -> Vec<Complex64> {
    let lo = (re_min / 2.0).floor() as i64 - 1;
    let hi = (re_max / 2.0).ceil() as i64 + 1;
    let mut g = Vec::new();
    for n in lo..=hi {
        for &b in &betas.betas {
            let x = 2.0 * n as f64 + b;
            if x >= re_min && x <= re_max {
                g.push(Complex64::new(x, 0.0));
            }
        }
    }
    g
}

fn search(pencil: &LoopGraphPencil, cuts: &[f64], guesses: &[Complex64], opts: &SpectralOptions) -> Result<Spectrum> {
    let cfg = opts.integrator;
    let make = || {
        (
            move |z: Complex64| delta(pencil, z, &cfg),
            move |z: Complex64| delta_jet(pencil, z, &cfg),
        )
    };
    let s = find_zeros_in_strips(make, cuts, -opts.height, opts.height, guesses, &opts.contour)?;
    let entries = s
        .roots
        .iter()
        .map(|r| SpectrumEntry {
            index: None,
            lambda: r.z,
            multiplicity: r.multiplicity,
            residual: r.residual,
        })
        .collect();
    Ok(Spectrum {
        entries,
        window: Rect::new(s.cuts[0], *s.cuts.last().expect("two cuts"), s.im_min, s.im_max),
        contour_count: s.total_count(),
        ambiguities: Vec::new(),
    })
}

/// Eigenvalues in `window` by argument-principle subdivision and Newton.
///
/// The vertical edges of the window are nudged if they pass through an
/// eigenvalue; the window actually used is returned with the spectrum.
pub fn locate_eigenvalues(pencil: &LoopGraphPencil, window: &Rect, opts: &SpectralOptions) -> Result<Spectrum> {
    let strips = window.width().ceil().max(1.0) as usize;
    let cuts: Vec<f64> = (0..=strips)
        .map(|i| window.re_min + window.width() * i as f64 / strips as f64)
        .collect();
    let o = SpectralOptions {
        height: 0.5 * window.height(),
        ..*opts
    };
    let shift = 0.5 * (window.im_min + window.im_max);
    if shift != 0.0 {
        return Err(Error::InvalidArgument("search windows must be symmetric about the real axis".into()));
    }
    let guesses = betas_for_pencil(pencil)
        .map(|b| asymptotic_guesses(&b, window.re_min, window.re_max))
        .unwrap_or_default();
    search(pencil, &cuts, &guesses, &o)
}

/// Eigenvalues in the blocks `[2n + c, 2n + c + 2)` for `|n| ≤ n_max`.
pub fn spectrum_by_periods(pencil: &LoopGraphPencil, betas: &BetaSet, n_max: usize, opts: &SpectralOptions) -> Result<Spectrum> {
    let c = betas.block_offset();
    let n = n_max as i64;
    let cuts: Vec<f64> = (-n..=n + 1).map(|k| 2.0 * k as f64 + c).collect();
    let guesses = asymptotic_guesses(betas, cuts[0], cuts[cuts.len() - 1]);
    search(pencil, &cuts, &guesses, opts)
}

/// Assigns indices `(n, k)` by minimum-cost matching against `2n + β_k`.
///
/// Eigenvalues are grouped into consecutive whole blocks whose eigenvalue
/// count equals the number of limits `2n + β_k` falling in those blocks; eigenvalues outside the whole
/// blocks covered by the window stay unnumbered and are dropped.
pub fn number_eigenvalues(spectrum: &Spectrum, betas: &BetaSet) -> Result<Spectrum> {
    let m = betas.m();
    let c = betas.block_offset();
    let w = &spectrum.window;
    let tol = 1e-9;
    let n_lo = ((w.re_min - c) / 2.0 - tol).ceil() as i64;
    let n_hi = ((w.re_max - c) / 2.0 + tol).floor() as i64 - 1;
    if n_hi < n_lo {
        return Err(Error::NumberingFailed("window holds no complete period".into()));
    }

    let mut values: Vec<(Complex64, usize, f64)> = Vec::new();
    for e in &spectrum.entries {
        for _ in 0..e.multiplicity {
            values.push((e.lambda, e.multiplicity, e.residual));
        }
    }
    values.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    let block_of = |z: Complex64| ((z.re - c) / 2.0).floor() as i64;

    let mut out = Vec::new();
    let mut ambiguities = Vec::new();
    let mut start = n_lo;
    while start <= n_hi {
        let mut end = start;
        loop {
            let eig: Vec<_> = values.iter().filter(|v| (start..=end).contains(&block_of(v.0))).collect();
            let targets: Vec<(i64, usize)> = (start - 2..=end + 2)
                .flat_map(|n| index_set_block(m, n))
                .filter(|&(n, k)| (start..=end).contains(&block_of(Complex64::new(2.0 * n as f64 + betas.beta(k), 0.0))))
                .collect();
            if eig.len() == targets.len() {
                let cost: Vec<Vec<f64>> = eig
                    .iter()
                    .map(|v| {
                        targets
                            .iter()
                            .map(|&(n, k)| (v.0 - (2.0 * n as f64 + betas.beta(k))).norm_sqr())
                            .collect()
                    })
                    .collect();
                let col = min_cost_assignment(&cost);
                for i in 0..eig.len() {
                    for j in i + 1..eig.len() {
                        if eig[i].0 == eig[j].0 {
                            continue;
                        }
                        let d = cost[i][col[j]] + cost[j][col[i]] - cost[i][col[i]] - cost[j][col[j]];
                        if d < 1e-10 {
                            ambiguities.push(format!(
                                "indices {:?} and {:?} tie within {d:e}",
                                targets[col[i]], targets[col[j]]
                            ));
                        }
                    }
                }
                for (i, v) in eig.iter().enumerate() {
                    out.push(SpectrumEntry {
                        index: Some(targets[col[i]]),
                        lambda: v.0,
                        multiplicity: v.1,
                        residual: v.2,
                    });
                }
                break;
            }
            end += 1;
            if end > n_hi {
                return Err(Error::NumberingFailed(format!(
                    "eigenvalue and index counts never balance from block {start} to {n_hi}; \
                     complex eigenvalues outside the window height are a likely cause"
                )));
            }
        }
        start = end + 1;
    }
    out.sort_by_key(|e| e.index);
    Ok(Spectrum {
        entries: out,
        window: spectrum.window,
        contour_count: spectrum.contour_count,
        ambiguities,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubspectrumKind {
    /// Recovery on edge 1: classification by `S_2..S_m`.
    Edge,
    /// Recovery on the loop: classification by `S_1..S_{m−1}`.
    Loop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThetaClass {
    /// No relevant `S_j(π,λ)` vanishes.
    One,
    /// Exactly one relevant `S_j(π,λ)` vanishes, `j = j_theta`.
    Two { j_theta: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspectrumEntry {
    pub index: (i64, usize),
    pub lambda: Complex64,
    /// Number of selected entries sharing this value.
    pub m_theta: usize,
    /// Position of this entry among the entries sharing its value.
    pub order: usize,
    pub class: ThetaClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subspectrum {
    pub kind: SubspectrumKind,
    pub n_window: usize,
    pub entries: Vec<SubspectrumEntry>,
}

impl Subspectrum {
    pub fn lambdas(&self) -> Vec<Complex64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    pub fn contains_zero(&self) -> bool {
        self.entries.iter().any(|e| e.lambda.norm() <= 1e-10)
    }

    /// `λ_{n1} − 2n` over the selected `k = 1` entries.
    pub fn branch_one(&self) -> Vec<(i64, Complex64)> {
        self.entries
            .iter()
            .filter(|e| e.index.1 == 1)
            .map(|e| (e.index.0, e.lambda - 2.0 * e.index.0 as f64))
            .collect()
    }

    /// Same subspectrum with every value moved by `c`.
    pub fn shifted(&self, c: Complex64) -> Self {
        let mut s = self.clone();
        for e in &mut s.entries {
            e.lambda += c;
        }
        s
    }
}

/// Indices `(n,1)`, `n ≠ 0`, and `(n,k)`, `k = 2..4`, with `|n| ≤ n_window`,
/// intersected with the numbering index set.
pub fn subspectrum_indices(m: usize, n_window: usize) -> Vec<(i64, usize)> {
    let n = n_window as i64;
    let mut idx = Vec::new();
    for nn in -n..=n {
        let allowed = index_set_block(m, nn);
        for k in 1..=4 {
            if (k == 1 && nn == 0) || !allowed.contains(&(nn, k)) {
                continue;
            }
            idx.push((nn, k));
        }
    }
    idx
}

/// Classifies one value by the vanishing of the relevant `S_j(π,λ)`.
pub fn classify_theta(pencil: &LoopGraphPencil, lambda: Complex64, kind: SubspectrumKind, opts: &SpectralOptions) -> Result<ThetaClass> {
    let m = pencil.m();
    let edges: Vec<usize> = match kind {
        SubspectrumKind::Edge => (2..=m).collect(),
        SubspectrumKind::Loop => (1..m).collect(),
    };
    let threshold = opts.zero_tol / lambda.norm().max(1.0);
    let mut vanishing = Vec::new();
    for &j in &edges {
        let s = integrate_edge(pencil.edge(j), lambda, false, &opts.integrator)?;
        if s.s.v.norm() <= threshold {
            vanishing.push(j);
        }
    }
    match (vanishing.len(), kind) {
        (0, _) => Ok(ThetaClass::One),
        (1, SubspectrumKind::Edge) if vanishing[0] == m => {
            let d = dm_from_loop(&integrate_edge(pencil.loop_edge(), lambda, false, &opts.integrator)?).v;
            if d.norm() <= opts.lemma_tol {
                return Err(Error::AssumptionBViolated {
                    lambda,
                    vanishing,
                    extra: format!(" and d_m(λ) = {d} vanishes"),
                });
            }
            Ok(ThetaClass::Two { j_theta: m })
        }
        (1, _) => Ok(ThetaClass::Two { j_theta: vanishing[0] }),
        (_, SubspectrumKind::Edge) => Err(Error::AssumptionBViolated {
            lambda,
            vanishing,
            extra: String::new(),
        }),
        (_, SubspectrumKind::Loop) => Err(Error::AssumptionDViolated { lambda, vanishing }),
    }
}

/// Selects the four-branch subspectrum from a numbered spectrum and
/// classifies every entry.
pub fn build_subspectrum(
    pencil: &LoopGraphPencil,
    spectrum: &Spectrum,
    n_window: usize,
    kind: SubspectrumKind,
    opts: &SpectralOptions,
) -> Result<Subspectrum> {
    let mut selected = Vec::new();
    for idx in subspectrum_indices(pencil.m(), n_window) {
        let e = spectrum
            .get(idx.0, idx.1)
            .ok_or_else(|| Error::NumberingFailed(format!("index {idx:?} missing from the numbered spectrum")))?;
        selected.push((idx, e.lambda, e.multiplicity));
    }
    let mut entries = Vec::with_capacity(selected.len());
    for (i, &(idx, lam, mult)) in selected.iter().enumerate() {
        let same: Vec<usize> = (0..selected.len()).filter(|&j| selected[j].1 == lam).collect();
        let m_theta = same.len();
        if m_theta > mult {
            return Err(Error::NumberingFailed(format!(
                "value {lam} selected {m_theta} times but has multiplicity {mult}"
            )));
        }
        if m_theta > 2 {
            return Err(Error::MultiplicityTooHigh { lambda: lam, count: m_theta });
        }
        let order = same.iter().position(|&j| j == i).expect("contains itself");
        let class = classify_theta(pencil, lam, kind, opts)?;
        entries.push(SubspectrumEntry {
            index: idx,
            lambda: lam,
            m_theta,
            order,
            class,
        });
    }
    Ok(Subspectrum {
        kind,
        n_window,
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaEntry {
    pub n: i64,
    pub nu: Complex64,
    pub q: Complex64,
    pub omega: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignSequence {
    pub entries: Vec<OmegaEntry>,
}

impl SignSequence {
    pub fn omegas(&self) -> Vec<(i64, i8)> {
        self.entries.iter().map(|e| (e.n, e.omega)).collect()
    }
}

/// `ω` from `Q(ν)`: `+1` for `arg Q ∈ [0, π)`, `−1` for `[π, 2π)`, `0` when
/// `|Q| ≤ zero_tol`.
///
/// Imaginary parts below `1e-12 |Q|` are treated as roundoff so that a real
/// negative `Q` maps to `−1` regardless of the sign of its rounding error.
pub fn omega_of(q: Complex64, zero_tol: f64) -> i8 {
    if q.norm() <= zero_tol {
        return 0;
    }
    let im = if q.im.abs() <= 1e-12 * q.norm() { 0.0 } else { q.im };
    if im > 0.0 || (im == 0.0 && q.re > 0.0) {
        1
    } else {
        -1
    }
}

/// Zeros `ν_n` of `S_m(π,·)` for `|n| ≤ n_max` with their signs `ω_n`.
pub fn omega_sequence(pencil: &LoopGraphPencil, n_max: usize, opts: &SpectralOptions) -> Result<SignSequence> {
    omega_sequence_for_loop(pencil.loop_edge(), n_max, opts)
}

/// [`omega_sequence`] from the loop coefficients alone.
pub fn omega_sequence_for_loop(edge: &EdgeCoefficients, n_max: usize, opts: &SpectralOptions) -> Result<SignSequence> {
    let alpha_m = edge.alpha();
    if alpha_m.norm() > ALPHA_M_TOL {
        return Err(Error::NotNormalized { alpha_m });
    }
    let cfg = opts.integrator;
    let make = || {
        (
            move |z: Complex64| Ok(integrate_edge(edge, z, false, &cfg)?.s.v),
            move |z: Complex64| Ok(integrate_edge(edge, z, true, &cfg)?.s),
        )
    };
    let n = n_max as i64;
    let cuts: Vec<f64> = (-n..=n + 1).map(|k| k as f64 - 0.5).collect();
    let guesses: Vec<Complex64> = (-n..=n).map(|k| Complex64::new(k as f64, 0.0)).collect();
    let s = find_zeros_in_strips(make, &cuts, -opts.height, opts.height, &guesses, &opts.contour)?;

    let mut zeros: Vec<Complex64> = Vec::new();
    for r in &s.roots {
        for _ in 0..r.multiplicity {
            zeros.push(r.z);
        }
    }
    let targets: Vec<i64> = (-n..=n).filter(|&k| k != 0).collect();
    if zeros.len() != targets.len() {
        return Err(Error::NumberingFailed(format!(
            "found {} zeros of S_m(π,·) for {} indices",
            zeros.len(),
            targets.len()
        )));
    }
    let cost: Vec<Vec<f64>> = zeros
        .iter()
        .map(|z| targets.iter().map(|&t| (z - t as f64).norm_sqr()).collect())
        .collect();
    let col = min_cost_assignment(&cost);
    let mut entries: Vec<OmegaEntry> = zeros
        .iter()
        .enumerate()
        .map(|(i, &nu)| {
            let loop_sample = integrate_edge(edge, nu, false, &cfg)?;
            let q = q_from_loop(&loop_sample).v;
            Ok(OmegaEntry {
                n: targets[col[i]],
                nu,
                q,
                omega: omega_of(q, opts.omega_zero_tol),
            })
        })
        .collect::<Result<_>>()?;
    entries.sort_by_key(|e| e.n);
    Ok(SignSequence { entries })
}

/// Whether no `ω_n` vanishes, with the offending indices.
pub fn check_condition_c(seq: &SignSequence) -> (bool, Vec<i64>) {
    let bad: Vec<i64> = seq.entries.iter().filter(|e| e.omega == 0).map(|e| e.n).collect();
    (bad.is_empty(), bad)
}

/// Checks `|d_m(ν_n)| > lemma_tol` at every computed zero and returns the
/// smallest modulus.
pub fn verify_lemma_om(pencil: &LoopGraphPencil, seq: &SignSequence, opts: &SpectralOptions) -> Result<f64> {
    let mut min = f64::INFINITY;
    for e in &seq.entries {
        let d = dm_from_loop(&integrate_edge(pencil.loop_edge(), e.nu, false, &opts.integrator)?).v;
        if d.norm() <= opts.lemma_tol {
            return Err(Error::LemmaViolated { nu: e.nu, dm: d });
        }
        min = min.min(d.norm());
    }
    Ok(min)
}

/// `C_m(π,ν) S_m'(π,ν)` at every computed zero; equals 1 exactly.
pub fn cs_products(pencil: &LoopGraphPencil, seq: &SignSequence, opts: &SpectralOptions) -> Result<Vec<Complex64>> {
    seq.entries
        .iter()
        .map(|e| {
            let s = integrate_edge(pencil.loop_edge(), e.nu, false, &opts.integrator)?;
            Ok(s.c.v * s.sp.v)
        })
        .collect()
}

/// `|Δ(λ)|` for every entry, recomputed.
pub fn residuals(pencil: &LoopGraphPencil, lambdas: &[Complex64], cfg: &IntegratorConfig) -> Result<Vec<f64>> {
    lambdas
        .iter()
        .map(|&l| Ok(crate::characteristic::delta_from_sample(&sample_pencil(pencil, l, false, cfg)?).v.norm()))
        .collect()
}
