//! Subcommand implementations. Each writes its artifacts into the run
//! directory and returns a short summary for stdout.

use num_complex::Complex64;
use pencil_graph::basis::{self, build_probe, frame_bounds, reference_grams, sine_type_check, TruthEdge};
use pencil_graph::characteristic::{delta, dm, edge1_pair, extract_kernels, loop_pair};
use pencil_graph::inverse_edge::{invert_edge, EdgeInversionOptions};
use pencil_graph::inverse_loop::{invert_loop, verify_loop_recovery, LoopInversionOptions};
use pencil_graph::pencil::{check_assumption_a, normalize_shift, EdgeCoefficients, LoopGraphPencil};
use pencil_graph::shooting::{integrate_edge, sample_pencil, wronskian_defect, wronskian_defect_relative};
use pencil_graph::spectral::{
    betas_for_pencil, build_subspectrum, check_condition_c, d_function, locate_eigenvalues, number_eigenvalues, omega_sequence,
    spectrum_by_periods, verify_lemma_om, BetaSet, SignSequence, Spectrum, Subspectrum, SubspectrumKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::artifact::{num, RunDir};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::plot::spectrum_svg;

pub const SPECTRUM: &str = "spectrum.json";
pub const EDGE_SUB: &str = "subspectrum-edge.json";
pub const LOOP_SUB: &str = "subspectrum-loop.json";
pub const OMEGA: &str = "omega.json";

pub struct Context {
    pub cfg: RunConfig,
    pub run: RunDir,
    /// Pencil after the shift that makes the loop mean vanish.
    pub pencil: LoopGraphPencil,
    pub shift: Complex64,
}

impl Context {
    pub fn new(cfg: RunConfig, out: &std::path::Path) -> Result<Self, CliError> {
        let raw = cfg.pencil.build()?;
        let (pencil, shift) = normalize_shift(&raw);
        let run = RunDir::new(out, &cfg)?;
        Ok(Self { cfg, run, pencil, shift })
    }

    fn betas(&self) -> Result<BetaSet, CliError> {
        Ok(betas_for_pencil(&self.pencil)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumArtifact {
    /// Eigenvalues belong to the pencil shifted by this amount.
    pub shift: Complex64,
    pub betas: Option<Vec<f64>>,
    pub spectrum: Spectrum,
}

pub fn forward(ctx: &Context) -> Result<Value, CliError> {
    let opts = ctx.cfg.spectral_options();
    let betas = betas_for_pencil(&ctx.pencil).ok();
    let spectrum = match ctx.cfg.forward.window {
        Some(w) => {
            let s = locate_eigenvalues(&ctx.pencil, &w.rect(), &opts)?;
            match &betas {
                Some(b) => number_eigenvalues(&s, b).unwrap_or(s),
                None => s,
            }
        }
        None => {
            let b = ctx.betas()?;
            number_eigenvalues(&spectrum_by_periods(&ctx.pencil, &b, ctx.cfg.forward.n_max, &opts)?, &b)?
        }
    };
    let rows: Vec<String> = spectrum
        .entries
        .iter()
        .map(|e| {
            let (n, k) = e.index.map_or((String::new(), String::new()), |(n, k)| (n.to_string(), k.to_string()));
            format!("{n},{k},{},{},{},{}", num(e.lambda.re), num(e.lambda.im), e.multiplicity, num(e.residual))
        })
        .collect();
    ctx.run.write_csv("spectrum.csv", "n,k,re,im,multiplicity,residual", &rows)?;
    let lattice = betas.as_ref().map(|b| lattice_points(b, &spectrum)).unwrap_or_default();
    ctx.run.write_text("spectrum.svg", &spectrum_svg(&spectrum, &lattice))?;
    let artifact = SpectrumArtifact {
        shift: ctx.shift,
        betas: betas.as_ref().map(|b| b.betas.clone()),
        spectrum,
    };
    ctx.run.write_json(SPECTRUM, &artifact)?;
    Ok(json!({
        "eigenvalues": artifact.spectrum.entries.len(),
        "contour_count": artifact.spectrum.contour_count,
        "ambiguities": artifact.spectrum.ambiguities.len(),
    }))
}

fn lattice_points(b: &BetaSet, s: &Spectrum) -> Vec<f64> {
    let lo = (s.window.re_min / 2.0).floor() as i64;
    let hi = (s.window.re_max / 2.0).ceil() as i64;
    (lo..=hi)
        .flat_map(|n| b.betas.iter().map(move |beta| 2.0 * n as f64 + beta))
        .filter(|x| *x >= s.window.re_min && *x <= s.window.re_max)
        .collect()
}

pub fn betas(ctx: &Context) -> Result<Value, CliError> {
    let b = ctx.betas()?;
    let residuals: Vec<f64> = b.betas.iter().map(|&x| d_function(&b.alphas, Complex64::new(x, 0.0)).norm()).collect();
    let data = json!({
        "alphas": b.alphas,
        "betas": b.betas,
        "separation": b.separation(),
        "residuals": residuals,
    });
    ctx.run.write_json("betas.json", &data)?;
    Ok(json!({ "count": b.betas.len(), "separation": b.separation() }))
}

fn read_spectrum(ctx: &Context) -> Result<SpectrumArtifact, CliError> {
    ctx.run.read_json(SPECTRUM, "forward")
}

fn numbered(ctx: &Context) -> Result<Spectrum, CliError> {
    let s = read_spectrum(ctx)?.spectrum;
    if s.entries.iter().all(|e| e.index.is_none()) {
        return Err(CliError::Config("spectrum is unnumbered; run `forward` without an explicit window".into()));
    }
    Ok(s)
}

pub fn subspectrum(ctx: &Context) -> Result<Value, CliError> {
    let spectrum = numbered(ctx)?;
    let opts = ctx.cfg.spectral_options();
    let n = ctx.cfg.subspectrum.n_window;
    let mut summary = json!({});
    let mut failures = Vec::new();
    for (kind, name) in [(SubspectrumKind::Edge, EDGE_SUB), (SubspectrumKind::Loop, LOOP_SUB)] {
        match build_subspectrum(&ctx.pencil, &spectrum, n, kind, &opts) {
            Ok(sub) => {
                summary[name] = json!(sub.entries.len());
                ctx.run.write_json(name, &sub)?;
            }
            Err(e) => {
                summary[name] = json!(e.to_string());
                failures.push(format!("{name}: {e}"));
            }
        }
    }
    let seq = omega_sequence(&ctx.pencil, n, &opts)?;
    let (c_holds, zeros) = check_condition_c(&seq);
    let lemma = verify_lemma_om(&ctx.pencil, &seq, &opts)?;
    ctx.run.write_json(
        OMEGA,
        &json!({ "sequence": seq, "condition_c": c_holds, "zero_omega": zeros, "min_dm_at_nu": lemma }),
    )?;
    let mut report = check_assumption_a(&ctx.pencil, &ctx.cfg.assumptions.tolerances());
    report.c_holds = Some(c_holds);
    ctx.run.write_json("assumptions.json", &report)?;
    summary["condition_c"] = json!(c_holds);
    if !failures.is_empty() {
        return Err(CliError::Assumption(failures.join("; ")));
    }
    Ok(summary)
}

fn load_subspectrum(ctx: &Context, kind: SubspectrumKind) -> Result<Subspectrum, CliError> {
    let name = match kind {
        SubspectrumKind::Edge => EDGE_SUB,
        SubspectrumKind::Loop => LOOP_SUB,
    };
    if ctx.run.exists(name) {
        return ctx.run.read_json(name, "subspectrum");
    }
    let spectrum = numbered(ctx)?;
    let sub = build_subspectrum(&ctx.pencil, &spectrum, ctx.cfg.subspectrum.n_window, kind, &ctx.cfg.spectral_options())?;
    ctx.run.write_json(name, &sub)?;
    Ok(sub)
}

fn sample_grid(ctx: &Context) -> Vec<f64> {
    let n = ctx.cfg.inversion.sample_points.max(2);
    let r = ctx.cfg.inversion.sample_lambda_max;
    (0..n).map(|i| -r + 2.0 * r * (i as f64 + 0.5) / n as f64).collect()
}

fn coefficient_errors(fit: &EdgeCoefficients, truth: &EdgeCoefficients) -> Value {
    json!({
        "p_max_error": fit.p().max_distance(truth.p(), 400),
        "q_max_error": fit.q().max_distance(truth.q(), 400),
    })
}

pub fn invert_edge_cmd(ctx: &Context) -> Result<Value, CliError> {
    let sub = load_subspectrum(ctx, SubspectrumKind::Edge)?;
    let cfg = ctx.cfg.integrator.config();
    let opts = EdgeInversionOptions {
        truncation: ctx.cfg.inversion.truncation,
        lsq: ctx.cfg.lsq_options(),
        integrator: cfg,
        refine_alpha: ctx.cfg.inversion.refine_alpha,
        fit: ctx.cfg.fit_options(),
    };
    let known = &ctx.pencil.edges()[1..];
    let inv = invert_edge(known, &sub, &opts)?;
    let truth = ctx.pencil.edge(1);
    let recon = &inv.reconstruction;

    let mut rows = Vec::new();
    let mut s_err: f64 = 0.0;
    for l in sample_grid(ctx) {
        let z = Complex64::new(l, 0.0);
        let t = integrate_edge(truth, z, false, &cfg)?;
        let (s, sp) = (recon.s(z), recon.sp(z));
        s_err = s_err.max((s - t.s.v).norm());
        rows.push(format!(
            "{},{},{},{},{},{},{},{},{}",
            num(l),
            num(s.re),
            num(s.im),
            num(t.s.v.re),
            num(t.s.v.im),
            num(sp.re),
            num(sp.im),
            num(t.sp.v.re),
            num(t.sp.v.im)
        ));
    }
    ctx.run.write_csv(
        "edge-samples.csv",
        "lambda,s_re,s_im,s_true_re,s_true_im,sp_re,sp_im,sp_true_re,sp_true_im",
        &rows,
    )?;
    ctx.run.write_json("edge-kernels.json", recon)?;
    let errors = inv.fit.as_ref().map(|f| coefficient_errors(&f.edge, truth));
    if let Some(f) = &inv.fit {
        ctx.run.write_json("edge-fit.json", &json!({ "fit": f, "errors_vs_config": errors }))?;
    }
    let diag = json!({
        "beta1": inv.beta1,
        "alpha1_branch": inv.alpha1_branch,
        "alpha1_residual": inv.alpha1_residual,
        "alpha1_residual_ratio": inv.alpha1_residual_ratio,
        "alpha1": inv.alpha1,
        "alpha1_config": truth.alpha().re,
        "shift": inv.shift,
        "rows": inv.rows,
        "unknowns": inv.unknowns,
        "lsq": inv.diagnostics,
        "max_row_residual": inv.max_row_residual,
        "s_max_error_vs_config": s_err,
    });
    ctx.run.write_json("edge-diagnostics.json", &diag)?;
    Ok(json!({ "alpha1": inv.alpha1, "s_max_error": s_err, "fit": errors }))
}

fn load_omega(ctx: &Context) -> Result<Vec<(i64, i8)>, CliError> {
    #[derive(Deserialize)]
    struct OmegaArtifact {
        sequence: SignSequence,
    }
    if ctx.run.exists(OMEGA) {
        let a: OmegaArtifact = ctx.run.read_json(OMEGA, "subspectrum")?;
        return Ok(a.sequence.omegas());
    }
    let seq = omega_sequence(&ctx.pencil, ctx.cfg.subspectrum.n_window, &ctx.cfg.spectral_options())?;
    Ok(seq.omegas())
}

pub fn invert_loop_cmd(ctx: &Context) -> Result<Value, CliError> {
    let sub = load_subspectrum(ctx, SubspectrumKind::Loop)?;
    let omega = load_omega(ctx)?;
    let cfg = ctx.cfg.integrator.config();
    let opts = LoopInversionOptions {
        truncation: ctx.cfg.inversion.truncation,
        lsq: ctx.cfg.lsq_options(),
        integrator: cfg,
        fit: ctx.cfg.fit_options(),
    };
    let m = ctx.pencil.m();
    let known = &ctx.pencil.edges()[..m - 1];
    let inv = invert_loop(known, &sub, &omega, &opts)?;
    let truth = ctx.pencil.loop_edge();
    let recon = &inv.reconstruction;
    let grid = sample_grid(ctx);
    let verification = verify_loop_recovery(recon, &omega, Some(truth), &grid, &ctx.cfg.spectral_options())?;

    let mut rows = Vec::new();
    for &l in &grid {
        let z = Complex64::new(l, 0.0);
        let t = integrate_edge(truth, z, false, &cfg)?;
        let (s, d) = (recon.s(z), recon.dm(z));
        let dt = pencil_graph::characteristic::dm_from_loop(&t).v;
        rows.push(format!(
            "{},{},{},{},{},{},{},{},{}",
            num(l),
            num(s.re),
            num(s.im),
            num(t.s.v.re),
            num(t.s.v.im),
            num(d.re),
            num(d.im),
            num(dt.re),
            num(dt.im)
        ));
    }
    ctx.run.write_csv(
        "loop-samples.csv",
        "lambda,s_re,s_im,s_true_re,s_true_im,dm_re,dm_im,dm_true_re,dm_true_im",
        &rows,
    )?;
    ctx.run.write_json("loop-kernels.json", recon)?;
    ctx.run.write_json("loop-verification.json", &verification)?;
    let errors = inv.fit.as_ref().map(|f| coefficient_errors(&f.edge, truth));
    if let Some(f) = &inv.fit {
        ctx.run.write_json("loop-fit.json", &json!({ "fit": f, "errors_vs_config": errors }))?;
    }
    ctx.run.write_json(
        "loop-diagnostics.json",
        &json!({
            "shift": inv.shift,
            "rows": inv.rows,
            "unknowns": inv.unknowns,
            "lsq": inv.diagnostics,
            "max_row_residual": inv.max_row_residual,
            "min_dm_at_nu": inv.min_dm_at_nu,
        }),
    )?;
    Ok(json!({
        "s_gap": verification.s_gap,
        "dm_gap": verification.dm_gap,
        "omega_agrees": verification.omega_agrees,
        "min_dm_at_nu": verification.min_dm_at_nu,
        "fit": errors,
    }))
}

pub fn diagnose_basis(ctx: &Context) -> Result<Value, CliError> {
    let sub = load_subspectrum(ctx, SubspectrumKind::Edge)?;
    let b = ctx.betas()?;
    let alpha1 = ctx.pencil.edge(1).alpha().re;
    let source = TruthEdge {
        edge: ctx.pencil.edge(1),
        cfg: ctx.cfg.integrator.config(),
    };
    let mut windows: Vec<usize> = ctx.cfg.basis.windows.iter().map(|&w| w.min(sub.n_window)).collect();
    windows.dedup();

    let mut gram_rows = Vec::new();
    let mut bounds = Vec::new();
    let mut last = None;
    for &w in &windows {
        let probe = build_probe(&sub, &source, &b, alpha1, w)?;
        for (i, e) in probe.eigenvalues.iter().enumerate() {
            gram_rows.push(format!("{w},{i},{}", num(*e)));
        }
        let fb = frame_bounds(&probe);
        let (v0, e) = reference_grams(&b, alpha1, w);
        let defect = (&v0 - &e).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let diag = (0..v0.nrows()).map(|i| (v0[(i, i)].re - 2.0 * std::f64::consts::PI).abs()).fold(0.0, f64::max);
        bounds.push(json!({
            "window": w,
            "elements": probe.elements.len(),
            "m1": probe.m1,
            "m2": probe.m2,
            "condition": fb.as_ref().ok().map(|f| f.condition),
            "singular": fb.is_err(),
            "hermitian_defect": basis::hermitian_defect(&probe.gram),
            "reference_gram_defect": defect,
            "reference_diagonal_defect": diag,
        }));
        last = Some(probe);
    }
    ctx.run.write_csv("gram-spectrum.csv", "window,index,eigenvalue", &gram_rows)?;
    let probe = last.expect("at least one window");
    let tails: Vec<String> = probe
        .closeness
        .iter()
        .zip(&probe.shell_distances)
        .map(|(c, (_, d))| format!("{},{},{}", c.n_star, num(c.tail), num(*d)))
        .collect();
    ctx.run.write_csv("closeness.csv", "n_star,tail,shell_max", &tails)?;
    let sine = sine_type_check(&b.betas[..4.min(b.betas.len())]);
    ctx.run.write_json("sine-type.json", &sine)?;
    ctx.run.write_json("basis-summary.json", &json!({ "alpha1": alpha1, "windows": bounds }))?;
    if probe.m1 <= 1e-12 {
        return Err(pencil_graph::Error::SingularGram { min_eigenvalue: probe.m1 }.into());
    }
    Ok(json!({ "m1": probe.m1, "m2": probe.m2, "separation": sine.separation }))
}

fn random_lambdas(rng: &mut ChaCha8Rng, count: usize, radius: f64, imag: f64) -> Vec<Complex64> {
    (0..count)
        .map(|_| Complex64::new(rng.gen_range(-radius..=radius), rng.gen_range(-imag..=imag)))
        .collect()
}

fn relative(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// Forward-model consistency checks on the configured pencil.
pub fn verify(ctx: &Context) -> Result<Value, CliError> {
    let cfg = ctx.cfg.integrator.config();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    let lambdas = random_lambdas(&mut rng, ctx.cfg.verify.samples, ctx.cfg.verify.radius, ctx.cfg.verify.imag);
    let p = &ctx.pencil;
    let mut wronskian: f64 = 0.0;
    let mut wronskian_rel: f64 = 0.0;
    let mut edge1: f64 = 0.0;
    let mut loop_id: f64 = 0.0;
    for &z in &lambdas {
        let s = sample_pencil(p, z, false, &cfg)?;
        for e in &s.edges {
            wronskian = wronskian.max(wronskian_defect(e));
            wronskian_rel = wronskian_rel.max(wronskian_defect_relative(e));
        }
        let d = delta(p, z, &cfg)?;
        let (a1, b1) = edge1_pair(p, z, &cfg)?;
        edge1 = edge1.max(relative(d, a1 * s.edge(1).s.v + b1 * s.edge(1).sp.v));
        let (am, bm) = loop_pair(p, z, &cfg)?;
        loop_id = loop_id.max(relative(d, am * s.edges[p.m() - 1].s.v + bm * dm(p, z, &cfg)?));
    }
    let ks = extract_kernels(p, ctx.cfg.inversion.truncation.max(8), &cfg)?;
    let a1 = p.edge(1).alpha();
    let k1 = (ks.edge(1).k.integral() - (a1 * std::f64::consts::PI).sin()).norm();
    let km = ks.edge(p.m()).k.integral().norm();
    let assumptions = check_assumption_a(p, &ctx.cfg.assumptions.tolerances());
    let data = json!({
        "seed": ctx.cfg.seed,
        "samples": lambdas.len(),
        "shift": ctx.shift,
        "wronskian_max_defect": wronskian,
        "wronskian_max_relative_defect": wronskian_rel,
        "edge1_identity_max_relative": edge1,
        "loop_identity_max_relative": loop_id,
        "kernel_moment_edge1": k1,
        "kernel_moment_loop": km,
        "kernel_fit_residual": ks.fit_residual,
        "assumption_a": assumptions,
    });
    ctx.run.write_json("verify.json", &data)?;
    if !assumptions.a_holds {
        return Err(CliError::Assumption(assumptions.violations.join("; ")));
    }
    Ok(json!({
        "wronskian": wronskian,
        "edge1_identity": edge1,
        "loop_identity": loop_id,
        "kernel_moments": [k1, km],
    }))
}
