//! Zeros of analytic functions in rectangles by the argument principle.
//!
//! A rectangle is split into vertical strips; each strip is bisected
//! recursively until every cell holds a single zero, which Newton's method
//! then polishes. Cells that still hold two zeros at the resolution limit
//! are reported as double zeros.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourOptions {
    /// Largest accepted phase increment between neighbouring samples.
    pub max_phase_step: f64,
    /// Cells smaller than this are not split further.
    pub min_cell: f64,
    /// Relative Newton step size that counts as converged.
    pub newton_tol: f64,
    pub max_newton: usize,
}

impl Default for ContourOptions {
    fn default() -> Self {
        Self {
            max_phase_step: PI / 4.0,
            min_cell: 1e-6,
            newton_tol: 1e-13,
            max_newton: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re_min - slack && z.re <= self.re_max + slack && z.im >= self.im_min - slack && z.im <= self.im_max + slack
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }
}

/// A zero with its multiplicity and the modulus of the function there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub z: Complex64,
    pub multiplicity: usize,
    pub residual: f64,
}

/// Split positions tried in order when a cut passes too close to a zero.
const SPLIT_FRACTIONS: [f64; 6] = [0.5731, 0.4187, 0.6413, 0.3559, 0.7122, 0.2891];

type PointKey = (u64, u64);

fn key(z: Complex64) -> PointKey {
    (z.re.to_bits(), z.im.to_bits())
}

/// Memoising evaluator for one independent piece of work.
pub struct Evaluator<F, J> {
    f: F,
    jet: J,
    opts: ContourOptions,
    values: RefCell<HashMap<PointKey, Jet>>,
    segments: RefCell<HashMap<(PointKey, PointKey), f64>>,
}

impl<F, J> Evaluator<F, J>
where
    F: Fn(Complex64) -> Result<Complex64>,
    J: Fn(Complex64) -> Result<Jet>,
{
    pub fn new(f: F, jet: J, opts: ContourOptions) -> Self {
        Self {
            f,
            jet,
            opts,
            values: RefCell::new(HashMap::new()),
            segments: RefCell::new(HashMap::new()),
        }
    }

    fn value(&self, z: Complex64) -> Result<Jet> {
        if let Some(v) = self.values.borrow().get(&key(z)) {
            return Ok(*v);
        }
        let v = (self.jet)(z)?;
        if !(v.v.re.is_finite() && v.v.im.is_finite() && v.d.re.is_finite() && v.d.im.is_finite()) {
            return Err(Error::ContourFailure(format!("non-finite value at {z}")));
        }
        if v.v == Complex64::new(0.0, 0.0) {
            return Err(Error::ContourFailure(format!("zero on contour at {z}")));
        }
        self.values.borrow_mut().insert(key(z), v);
        Ok(v)
    }

    /// Records a phase change computed elsewhere for the segment `z0 → z1`.
    pub fn insert_segment(&self, z0: Complex64, z1: Complex64, phase: f64) {
        self.segments.borrow_mut().insert((key(z0), key(z1)), phase);
    }

    /// Phase change of `f` along the straight segment `z0 → z1`.
    pub fn segment_phase(&self, z0: Complex64, z1: Complex64) -> Result<f64> {
        if let Some(p) = self.segments.borrow().get(&(key(z0), key(z1))) {
            return Ok(*p);
        }
        if let Some(p) = self.segments.borrow().get(&(key(z1), key(z0))) {
            return Ok(-*p);
        }
        let f0 = self.value(z0)?;
        let f1 = self.value(z1)?;
        let min_len = 1e-5 * (z1 - z0).norm();
        let p = self.phase_rec(z0, f0, z1, f1, min_len)?;
        self.segments.borrow_mut().insert((key(z0), key(z1)), p);
        Ok(p)
    }

    /// Accepts a segment once the phase increments between the end points
    /// and the midpoint are small and the logarithmic derivative bounds the
    /// rotation over each half, so that no full turn can hide between
    /// samples.
    fn phase_rec(&self, z0: Complex64, f0: Jet, z1: Complex64, f1: Jet, min_len: f64) -> Result<f64> {
        let zm = (z0 + z1) * 0.5;
        let fm = self.value(zm)?;
        let d1 = (fm.v / f0.v).arg();
        let d2 = (f1.v / fm.v).arg();
        let step = self.opts.max_phase_step;
        let half = 0.5 * (z1 - z0).norm();
        let rate = [f0, fm, f1].iter().map(|j| (j.d / j.v).norm()).fold(0.0, f64::max);
        if d1.abs() < step && d2.abs() < step && rate * half < 2.0 * step {
            return Ok(d1 + d2);
        }
        if (z1 - z0).norm() < min_len {
            return Err(Error::ContourFailure(format!(
                "phase not resolved near {zm}; the contour passes too close to a zero"
            )));
        }
        Ok(self.phase_rec(z0, f0, zm, fm, min_len)? + self.phase_rec(zm, fm, z1, f1, min_len)?)
    }

    /// Number of zeros inside `rect`, counted with multiplicity.
    pub fn count(&self, rect: &Rect) -> Result<usize> {
        let c = rect.corners();
        let mut total = 0.0;
        for i in 0..4 {
            total += self.segment_phase(c[i], c[(i + 1) % 4])?;
        }
        let w = total / (2.0 * PI);
        let n = w.round();
        if (w - n).abs() > 0.05 || n < 0.0 {
            return Err(Error::ContourFailure(format!("winding number {w} is not a non-negative integer")));
        }
        Ok(n as usize)
    }

    fn newton(&self, z0: Complex64, multiplicity: f64) -> Result<Option<Complex64>> {
        self.newton_deflated(z0, multiplicity, &[])
    }

    /// Newton's method on `f(z) / Π (z − r)` over the known zeros `r`.
    fn newton_deflated(&self, z0: Complex64, multiplicity: f64, known: &[Complex64]) -> Result<Option<Complex64>> {
        let mut z = z0;
        let mut last_step = f64::INFINITY;
        for _ in 0..self.opts.max_newton {
            let j = (self.jet)(z)?;
            if j.v == Complex64::new(0.0, 0.0) {
                return Ok(Some(z));
            }
            let log_d = j.d / j.v - known.iter().map(|r| (z - r).inv()).sum::<Complex64>();
            if log_d == Complex64::new(0.0, 0.0) {
                return Ok(None);
            }
            let step = log_d.inv() * multiplicity;
            z -= step;
            let s = step.norm();
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Ok(None);
            }
            if s <= self.opts.newton_tol * z.norm().max(1.0) {
                return Ok(Some(z));
            }
            // Roundoff floor: steps stopped shrinking at a tiny size.
            if s < 1e-9 * z.norm().max(1.0) && s >= 0.5 * last_step {
                return Ok(Some(z));
            }
            last_step = s;
        }
        Ok(None)
    }

    fn split(&self, rect: &Rect, frac: f64) -> (Rect, Rect) {
        if rect.width() >= rect.height() {
            let x = rect.re_min + frac * rect.width();
            (Rect { re_max: x, ..*rect }, Rect { re_min: x, ..*rect })
        } else {
            let y = rect.im_min + frac * rect.height();
            (Rect { im_max: y, ..*rect }, Rect { im_min: y, ..*rect })
        }
    }

    /// Zeros inside `rect`, which is known to contain `count` of them.
    pub fn resolve(&self, rect: &Rect, count: usize) -> Result<Vec<Root>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        let size = rect.width().max(rect.height());
        let slack = 1e-9 * rect.center().norm().max(1.0);
        if count == 1 {
            if let Some(z) = self.newton(rect.center(), 1.0)? {
                if rect.contains(z, slack) {
                    return Ok(vec![self.root(z, 1)?]);
                }
            }
        }
        if size < self.opts.min_cell {
            return match count {
                1 => Err(Error::ContourFailure(format!("Newton failed in a resolved cell at {}", rect.center()))),
                2 => match self.newton(rect.center(), 2.0)? {
                    Some(z) if rect.contains(z, 10.0 * size) => Ok(vec![self.root(z, 2)?]),
                    _ => Err(Error::ContourFailure(format!("double-root iteration failed at {}", rect.center()))),
                },
                _ => Err(Error::MultiplicityTooHigh {
                    lambda: rect.center(),
                    count,
                }),
            };
        }
        let mut last_err = None;
        for frac in SPLIT_FRACTIONS {
            let (a, b) = self.split(rect, frac);
            match (self.count(&a), self.count(&b)) {
                (Ok(ca), Ok(cb)) if ca + cb == count => {
                    let mut roots = self.resolve(&a, ca)?;
                    roots.extend(self.resolve(&b, cb)?);
                    return Ok(roots);
                }
                (Err(e), _) | (_, Err(e)) => last_err = Some(e),
                (Ok(ca), Ok(cb)) => {
                    last_err = Some(Error::ContourFailure(format!(
                        "child counts {ca} + {cb} differ from parent count {count} near {}",
                        rect.center()
                    )))
                }
            }
        }
        Err(last_err.expect("at least one split attempted"))
    }

    /// Newton from every guess inside `rect`; `Some` only if exactly `count`
    /// distinct zeros were found there.
    pub fn seeded(&self, rect: &Rect, count: usize, guesses: &[Complex64]) -> Result<Option<Vec<Root>>> {
        if count == 0 {
            return Ok(Some(Vec::new()));
        }
        let slack = 1e-9 * rect.center().norm().max(1.0);
        let mut found: Vec<Complex64> = Vec::new();
        for &g in guesses.iter().filter(|g| rect.contains(**g, 0.0)) {
            if let Some(z) = self.newton_deflated(g, 1.0, &found)? {
                let tol = 1e-8 * z.norm().max(1.0);
                if rect.contains(z, slack) && !found.iter().any(|w| (w - z).norm() <= tol) {
                    found.push(z);
                }
            }
            if found.len() > count {
                return Ok(None);
            }
        }
        if found.len() != count {
            return Ok(None);
        }
        found.into_iter().map(|z| self.root(z, 1)).collect::<Result<Vec<_>>>().map(Some)
    }

    fn root(&self, z: Complex64, multiplicity: usize) -> Result<Root> {
        Ok(Root {
            z,
            multiplicity,
            residual: (self.f)(z)?.norm(),
        })
    }
}

/// Outcome of a strip search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripSearch {
    /// Cut abscissae actually used, possibly nudged from the requested ones.
    pub cuts: Vec<f64>,
    pub im_min: f64,
    pub im_max: f64,
    /// Zero count of each strip `[cuts[i], cuts[i+1]]`.
    pub counts: Vec<usize>,
    /// Zeros sorted by real part then imaginary part.
    pub roots: Vec<Root>,
}

impl StripSearch {
    pub fn total_count(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Finds all zeros in `[cuts[0], cuts.last()] × [im_min, im_max]`.
///
/// `make` builds the value and jet closures; it is called once per strip so
/// every strip has its own cache and can run on its own thread.
///
/// `guesses` are optional starting points for Newton's method. A strip whose
/// argument-principle count is matched by distinct converged roots needs no
/// subdivision: `n` distinct zeros among `n` counted with multiplicity are
/// necessarily all simple.
pub fn find_zeros_in_strips<M, F, J>(
    make: M,
    cuts: &[f64],
    im_min: f64,
    im_max: f64,
    guesses: &[Complex64],
    opts: &ContourOptions,
) -> Result<StripSearch>
where
    M: Fn() -> (F, J) + Sync,
    F: Fn(Complex64) -> Result<Complex64>,
    J: Fn(Complex64) -> Result<Jet>,
{
    if cuts.len() < 2 || cuts.windows(2).any(|w| w[1] <= w[0]) || im_max <= im_min {
        return Err(Error::InvalidArgument("strip cuts must increase and the window must have positive height".into()));
    }
    let mut im_lo = im_min;
    let mut im_hi = im_max;
    for attempt in 0..6 {
        match search_once(&make, cuts, im_lo, im_hi, guesses, opts) {
            Ok(s) => return Ok(s),
            Err(Error::ContourFailure(msg)) if msg.starts_with("horizontal") && attempt < 5 => {
                let h = im_hi - im_lo;
                im_lo -= 0.0173 * h;
                im_hi += 0.0119 * h;
            }
            Err(e) => return Err(e),
        }
    }
    unreachable!("loop returns on the final attempt")
}

fn search_once<M, F, J>(
    make: &M,
    cuts: &[f64],
    im_lo: f64,
    im_hi: f64,
    guesses: &[Complex64],
    opts: &ContourOptions,
) -> Result<StripSearch>
where
    M: Fn() -> (F, J) + Sync,
    F: Fn(Complex64) -> Result<Complex64>,
    J: Fn(Complex64) -> Result<Jet>,
{
    // Nudge every cut until its vertical segment is resolvable.
    let verticals: Vec<(f64, f64)> = cuts
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let (f, j) = make();
            let ev = Evaluator::new(f, j, *opts);
            let spacing = if i + 1 < cuts.len() { cuts[i + 1] - x } else { x - cuts[i - 1] };
            let mut last = None;
            for k in 0..8 {
                let shift = if k == 0 { 0.0 } else { 0.0113 * spacing * (k as f64) * if k % 2 == 0 { 1.0 } else { -1.0 } };
                let xs = x + shift;
                match ev.segment_phase(Complex64::new(xs, im_lo), Complex64::new(xs, im_hi)) {
                    Ok(p) => return Ok((xs, p)),
                    Err(e @ Error::ContourFailure(_)) => last = Some(e),
                    Err(e) => return Err(e),
                }
            }
            Err(last.expect("attempted"))
        })
        .collect::<Result<_>>()?;

    let cuts: Vec<f64> = verticals.iter().map(|v| v.0).collect();
    let per_strip: Vec<(usize, Vec<Root>)> = verticals
        .windows(2)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|v| {
            let w = [v[0].0, v[1].0];
            let (f, j) = make();
            let ev = Evaluator::new(f, j, *opts);
            for &(x, p) in v.iter() {
                ev.insert_segment(Complex64::new(x, im_lo), Complex64::new(x, im_hi), p);
            }
            let rect = Rect::new(w[0], w[1], im_lo, im_hi);
            let horizontal = ev
                .segment_phase(Complex64::new(w[0], im_lo), Complex64::new(w[1], im_lo))
                .and_then(|_| ev.segment_phase(Complex64::new(w[1], im_hi), Complex64::new(w[0], im_hi)));
            if let Err(Error::ContourFailure(msg)) = horizontal {
                return Err(Error::ContourFailure(format!("horizontal edge: {msg}")));
            }
            horizontal?;
            let n = ev.count(&rect)?;
            if let Some(roots) = ev.seeded(&rect, n, guesses)? {
                return Ok((n, roots));
            }
            let roots = ev.resolve(&rect, n)?;
            Ok((n, roots))
        })
        .collect::<Result<_>>()?;

    let counts = per_strip.iter().map(|(n, _)| *n).collect();
    let mut roots: Vec<Root> = per_strip.into_iter().flat_map(|(_, r)| r).collect();
    roots.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
    Ok(StripSearch {
        cuts,
        im_min: im_lo,
        im_max: im_hi,
        counts,
        roots,
    })
}
