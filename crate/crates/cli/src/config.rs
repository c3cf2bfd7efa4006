//! Run configuration, read from TOML or JSON.
//!
//! ```toml
//! seed = 7
//!
//! [pencil]
//! edges = [
//!   { p = { cheb = [0.3, 0.1] }, q = { cheb = [0.0, 0.2] } },
//!   { p = { samples = [0.7, 0.75, 0.7] }, q = { cheb = [[0.5, 0.0]] } },
//!   { p = { cheb = [0.0] }, q = { cheb = [0.1] } },
//! ]
//!
//! [forward]
//! n_max = 25
//!
//! [subspectrum]
//! n_window = 24
//! ```

use std::path::Path;

use num_complex::Complex64;
use pencil_graph::cheb::ChebSeries;
use pencil_graph::contour::Rect;
use pencil_graph::fit::FitOptions;
use pencil_graph::lsq::LsqOptions;
use pencil_graph::pencil::{AssumptionTolerances, EdgeCoefficients, LoopGraphPencil};
use pencil_graph::rk::IntegratorConfig;
use pencil_graph::spectral::SpectralOptions;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// A real number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl Scalar {
    pub fn value(self) -> Complex64 {
        match self {
            Scalar::Real(x) => Complex64::new(x, 0.0),
            Scalar::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// A coefficient function on `[0, π]`: Chebyshev coefficients, or values on
/// the uniform grid `x_i = iπ/(n−1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Coefficient {
    Cheb(Vec<Scalar>),
    Samples(Vec<Scalar>),
}

/// Largest degree fitted to sampled coefficients.
const SAMPLE_DEGREE: usize = 24;

impl Coefficient {
    pub fn series(&self) -> Result<ChebSeries, CliError> {
        let values: Vec<Complex64> = match self {
            Coefficient::Cheb(c) | Coefficient::Samples(c) => c.iter().map(|s| s.value()).collect(),
        };
        if values.is_empty() {
            return Err(CliError::Config("coefficient list is empty".into()));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(CliError::Config("coefficient list holds a non-finite value".into()));
        }
        Ok(match self {
            Coefficient::Cheb(_) => ChebSeries::new(values),
            Coefficient::Samples(_) => ChebSeries::from_uniform_samples(&values, SAMPLE_DEGREE.min(values.len() - 1)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub p: Coefficient,
    pub q: Coefficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PencilSpec {
    /// Edge `m` is the loop.
    pub edges: Vec<EdgeSpec>,
}

impl PencilSpec {
    pub fn build(&self) -> Result<LoopGraphPencil, CliError> {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(j, e)| {
                let p = e.p.series().map_err(|err| CliError::Config(format!("edge {}: p: {err}", j + 1)))?;
                let q = e.q.series().map_err(|err| CliError::Config(format!("edge {}: q: {err}", j + 1)))?;
                Ok(EdgeCoefficients::new(p, q))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        LoopGraphPencil::new(edges).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSpec {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        Self {
            rtol: d.rtol,
            atol: d.atol,
            max_steps: d.max_steps,
        }
    }
}

impl IntegratorSpec {
    pub fn config(&self) -> IntegratorConfig {
        IntegratorConfig {
            rtol: self.rtol,
            atol: self.atol,
            max_steps: self.max_steps,
            ..IntegratorConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub re_min: f64,
    pub re_max: f64,
    /// Half-height; the window is `|Im λ| ≤ height`.
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForwardSpec {
    /// Periods `|n| ≤ n_max` searched when no explicit window is given.
    pub n_max: usize,
    /// Half-height of the period strips.
    pub height: f64,
    /// Explicit search rectangle; eigenvalues are then left unnumbered when
    /// the branch limits are unavailable.
    pub window: Option<WindowSpec>,
    pub zero_tol: f64,
    pub omega_zero_tol: f64,
    pub lemma_tol: f64,
}

impl Default for ForwardSpec {
    fn default() -> Self {
        let d = SpectralOptions::default();
        Self {
            n_max: 25,
            height: d.height,
            window: None,
            zero_tol: d.zero_tol,
            omega_zero_tol: d.omega_zero_tol,
            lemma_tol: d.lemma_tol,
        }
    }
}

impl WindowSpec {
    pub fn rect(&self) -> Rect {
        Rect::new(self.re_min, self.re_max, -self.height, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SubspectrumSpec {
    pub n_window: usize,
}

impl Default for SubspectrumSpec {
    fn default() -> Self {
        Self { n_window: 24 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InversionSpec {
    pub truncation: usize,
    pub tikhonov: f64,
    pub auto_tikhonov: f64,
    pub refine_alpha: bool,
    /// Run the coefficient fit after the kernel solve.
    pub fit: bool,
    pub fit_degree: usize,
    pub fit_lambda_max: f64,
    pub fit_points: usize,
    pub fit_max_iterations: usize,
    /// Real sample points for reconstructed-function output.
    pub sample_points: usize,
    pub sample_lambda_max: f64,
}

impl Default for InversionSpec {
    fn default() -> Self {
        let l = LsqOptions::default();
        let f = FitOptions::default();
        Self {
            truncation: pencil_graph::characteristic::DEFAULT_TRUNCATION,
            tikhonov: l.tikhonov,
            auto_tikhonov: l.auto_tikhonov,
            refine_alpha: true,
            fit: true,
            fit_degree: f.p_degree,
            fit_lambda_max: f.lambda_max,
            fit_points: f.points,
            fit_max_iterations: f.max_iterations,
            sample_points: 50,
            sample_lambda_max: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasisSpec {
    /// Windows `|n| ≤ N` on which frame bounds are estimated.
    pub windows: Vec<usize>,
}

impl Default for BasisSpec {
    fn default() -> Self {
        Self {
            windows: vec![4, 8, 12, 16, 20, 24],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySpec {
    /// Random λ per check, drawn from the seeded generator.
    pub samples: usize,
    /// Sampled λ lie in `|Re λ| ≤ radius`, `|Im λ| ≤ imag`.
    pub radius: f64,
    pub imag: f64,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            samples: 50,
            radius: 20.0,
            imag: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssumptionSpec {
    /// Largest admissible `|Im α_j|`.
    pub imag: f64,
    /// Minimal distance of `α_j − α_k` to the nearest integer.
    pub mod1_spacing: f64,
    /// Largest admissible `|α_m|` after normalisation.
    pub alpha_m: f64,
}

impl Default for AssumptionSpec {
    fn default() -> Self {
        let d = AssumptionTolerances::default();
        Self {
            imag: d.imag,
            mod1_spacing: d.mod1_spacing,
            alpha_m: d.alpha_m,
        }
    }
}

impl AssumptionSpec {
    pub fn tolerances(&self) -> AssumptionTolerances {
        AssumptionTolerances {
            imag: self.imag,
            mod1_spacing: self.mod1_spacing,
            alpha_m: self.alpha_m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub pencil: PencilSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub forward: ForwardSpec,
    #[serde(default)]
    pub subspectrum: SubspectrumSpec,
    #[serde(default)]
    pub inversion: InversionSpec,
    #[serde(default)]
    pub basis: BasisSpec,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub assumptions: AssumptionSpec,
}

impl RunConfig {
    pub fn parse(text: &str, json: bool) -> Result<Self, CliError> {
        let cfg: RunConfig = if json {
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        Self::parse(&text, json)
    }

    // Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: &str| Err(CliError::Config(msg.into()));
        if self.pencil.edges.len() < 2 {
            return bad("pencil.edges needs at least 2 edges");
        }
        if !(self.integrator.rtol > 0.0 && self.integrator.rtol < 1e-2) || !(self.integrator.atol > 0.0) {
            return bad("integrator tolerances must lie in (0, 1e-2)");
        }
        if self.forward.n_max == 0 || self.forward.n_max > 200 {
            return bad("forward.n_max must lie in 1..=200");
        }
        if !(self.forward.height > 0.0) {
            return bad("forward.height must be positive");
        }
        if let Some(w) = self.forward.window {
            if !(w.re_max > w.re_min) || !(w.height > 0.0) {
                return bad("forward.window needs re_max > re_min and height > 0");
            }
        }
        if self.subspectrum.n_window == 0 {
            return bad("subspectrum.n_window must be positive");
        }
        if self.forward.window.is_none() && self.subspectrum.n_window >= self.forward.n_max {
            return bad("subspectrum.n_window must be smaller than forward.n_max");
        }
        if self.inversion.truncation == 0 || self.inversion.truncation > 128 {
            return bad("inversion.truncation must lie in 1..=128");
        }
        if self.inversion.tikhonov < 0.0 || self.inversion.auto_tikhonov < 0.0 {
            return bad("regularization parameters must be non-negative");
        }
        let a = &self.assumptions;
        if !(a.imag >= 0.0 && a.mod1_spacing >= 0.0 && a.alpha_m >= 0.0) {
            return bad("assumption tolerances must be non-negative");
        }
        if self.basis.windows.is_empty() {
            return bad("basis.windows must not be empty");
        }
        Ok(())
    }

    /// Applies command-line overrides.
    pub fn with_overrides(mut self, seed: Option<u64>, window: Option<usize>, truncation: Option<usize>) -> Result<Self, CliError> {
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(n) = window {
            self.subspectrum.n_window = n;
            self.forward.n_max = self.forward.n_max.max(n + 1);
        }
        if let Some(l) = truncation {
            self.inversion.truncation = l;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn spectral_options(&self) -> SpectralOptions {
        SpectralOptions {
            integrator: self.integrator.config(),
            height: self.forward.height,
            zero_tol: self.forward.zero_tol,
            omega_zero_tol: self.forward.omega_zero_tol,
            lemma_tol: self.forward.lemma_tol,
            ..SpectralOptions::default()
        }
    }

    pub fn lsq_options(&self) -> LsqOptions {
        LsqOptions {
            tikhonov: self.inversion.tikhonov,
            auto_tikhonov: self.inversion.auto_tikhonov,
            ..LsqOptions::default()
        }
    }

    pub fn fit_options(&self) -> Option<FitOptions> {
        self.inversion.fit.then(|| FitOptions {
            p_degree: self.inversion.fit_degree,
            q_degree: self.inversion.fit_degree,
            lambda_max: self.inversion.fit_lambda_max,
            points: self.inversion.fit_points,
            max_iterations: self.inversion.fit_max_iterations,
            integrator: self.integrator.config(),
            ..FitOptions::default()
        })
    }

    /// SHA-256 of the canonical JSON form, first 16 hex digits.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))[..16].to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [pencil]
        edges = [
          { p = { cheb = [0.3] }, q = { cheb = [0.0] } },
          { p = { cheb = [[0.0, 0.0]] }, q = { samples = [0.1, 0.2, 0.1] } },
        ]
    "#;

    #[test]
    fn parses_minimal_toml() {
        let c = RunConfig::parse(MINIMAL, false).unwrap();
        let p = c.pencil.build().unwrap();
        assert_eq!(p.m(), 2);
        assert!((p.edge(1).alpha().re - 0.3).abs() < 1e-14);
        assert_eq!(c.subspectrum.n_window, 24);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = format!("{MINIMAL}\n[forward]\nnmax = 3\n");
        match RunConfig::parse(&text, false) {
            Err(CliError::Config(msg)) => assert!(msg.contains("nmax"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::parse(MINIMAL, false).unwrap();
        let b = a.clone().with_overrides(Some(3), None, None).unwrap();
        assert_eq!(a.hash(), RunConfig::parse(MINIMAL, false).unwrap().hash());
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn json_and_toml_agree() {
        let a = RunConfig::parse(MINIMAL, false).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(RunConfig::parse(&json, true).unwrap(), a);
    }
}
