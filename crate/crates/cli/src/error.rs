use std::path::PathBuf;

use pencil_graph::Error as CoreError;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("missing artifact {path}: run `{producer}` first")]
    MissingArtifact { path: PathBuf, producer: &'static str },

    #[error("I/O error on {path}: {reason}")]
    Io { path: PathBuf, reason: String },

    #[error("malformed artifact {path}: {reason}")]
    Artifact { path: PathBuf, reason: String },

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::MissingArtifact { .. } => 2,
            CliError::Assumption(_) => 3,
            CliError::Io { .. } | CliError::Artifact { .. } => 4,
            CliError::Core(e) => match e {
                CoreError::InvalidPencil(_) | CoreError::InvalidArgument(_) => 2,
                CoreError::DegenerateAlphas { .. }
                | CoreError::NotNormalized { .. }
                | CoreError::AssumptionBViolated { .. }
                | CoreError::AssumptionDViolated { .. }
                | CoreError::ConditionCViolated { .. }
                | CoreError::LemmaViolated { .. }
                | CoreError::BranchSingular { .. }
                | CoreError::DivisionDegeneracy { .. } => 3,
                _ => 4,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::MissingArtifact { .. } => "MissingArtifact",
            CliError::Io { .. } => "IoError",
            CliError::Artifact { .. } => "MalformedArtifact",
            CliError::Assumption(_) => "AssumptionViolated",
            CliError::Core(e) => match e {
                CoreError::InvalidPencil(_) => "InvalidPencil",
                CoreError::StepFailure { .. } => "StepFailure",
                CoreError::DegenerateAlphas { .. } => "DegenerateAlphas",
                CoreError::NotNormalized { .. } => "NotNormalized",
                CoreError::MultiplicityTooHigh { .. } => "MultiplicityTooHigh",
                CoreError::ContourFailure(_) => "ContourFailure",
                CoreError::NumberingFailed(_) => "NumberingFailed",
                CoreError::AssumptionBViolated { .. } => "AssumptionBViolated",
                CoreError::AssumptionDViolated { .. } => "AssumptionDViolated",
                CoreError::ConditionCViolated { .. } => "ConditionCViolated",
                CoreError::LemmaViolated { .. } => "LemmaViolated",
                CoreError::DivisionDegeneracy { .. } => "DivisionDegeneracy",
                CoreError::RankDeficient { .. } => "RankDeficient",
                CoreError::BranchSingular { .. } => "BranchSingular",
                CoreError::FitDiverged(_) => "FitDiverged",
                CoreError::SingularGram { .. } => "SingularGram",
                CoreError::InvalidArgument(_) => "InvalidArgument",
            },
        }
    }

    /// One-line JSON report for stderr.
    pub fn report(&self) -> String {
        let mut v = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::MissingArtifact { path, .. } = self {
            v["path"] = json!(path.display().to_string());
        }
        v.to_string()
    }
}

pub fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}
