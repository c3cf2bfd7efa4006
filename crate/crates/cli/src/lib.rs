//! Command-line front end: configuration, run directories and artifacts.

pub mod artifact;
pub mod commands;
pub mod config;
pub mod error;
pub mod plot;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::Value;

use crate::commands::Context;
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "pencil-graph", version, about = "Spectral problems for quadratic pencils on a graph with a loop")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Run configuration (TOML, or JSON by extension).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output root; artifacts go to `<out>/run-<config hash>`.
    #[arg(long, global = true, default_value = "runs")]
    pub out: PathBuf,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Subspectrum window `|n| ≤ N`.
    #[arg(long, global = true)]
    pub window: Option<usize>,

    /// Legendre degree of the unknown kernels.
    #[arg(long, global = true)]
    pub truncation: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Eigenvalues of the configured pencil.
    Forward,
    /// Branch limits of the eigenvalue asymptotics.
    Betas,
    /// Edge and loop subspectra, sign data and assumption report.
    Subspectrum,
    /// Recover the boundary edge from its subspectrum.
    InvertEdge,
    /// Recover the loop from its subspectrum and signs.
    InvertLoop,
    /// Frame bounds and closeness of the edge system.
    DiagnoseBasis,
    /// Forward-model consistency checks.
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Forward => "forward",
            Command::Betas => "betas",
            Command::Subspectrum => "subspectrum",
            Command::InvertEdge => "invert-edge",
            Command::InvertLoop => "invert-loop",
            Command::DiagnoseBasis => "diagnose-basis",
            Command::Verify => "verify",
        }
    }
}

/// Runs one command; the result is the summary printed on success.
pub fn run(cli: &Cli) -> Result<Value, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let cfg = RunConfig::load(path)?.with_overrides(cli.seed, cli.window, cli.truncation)?;
    let ctx = Context::new(cfg, &cli.out)?;
    let summary = match cli.command {
        Command::Forward => commands::forward(&ctx),
        Command::Betas => commands::betas(&ctx),
        Command::Subspectrum => commands::subspectrum(&ctx),
        Command::InvertEdge => commands::invert_edge_cmd(&ctx),
        Command::InvertLoop => commands::invert_loop_cmd(&ctx),
        Command::DiagnoseBasis => commands::diagnose_basis(&ctx),
        Command::Verify => commands::verify(&ctx),
    }?;
    Ok(serde_json::json!({
        "command": cli.command.name(),
        "run_dir": ctx.run.path.display().to_string(),
        "summary": summary,
    }))
}
