use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid pencil: {0}")]
    InvalidPencil(String),

    #[error("integration failed on edge {edge} at λ = {lambda}: {reason}")]
    StepFailure {
        edge: usize,
        lambda: Complex64,
        reason: String,
    },

    #[error("edge means collide modulo 1: α_{i} = {a}, α_{j} = {b}")]
    DegenerateAlphas { i: usize, j: usize, a: f64, b: f64 },

    #[error("loop mean α_m = {alpha_m} is not zero; apply normalize_shift first")]
    NotNormalized { alpha_m: Complex64 },

    #[error("cluster of {count} roots near λ = {lambda} cannot be separated")]
    MultiplicityTooHigh { lambda: Complex64, count: usize },

    #[error("argument principle failed: {0}")]
    ContourFailure(String),

    #[error("eigenvalue numbering failed: {0}")]
    NumberingFailed(String),

    #[error("assumption (B) violated at λ = {lambda}: vanishing S_j for j in {vanishing:?}{extra}")]
    AssumptionBViolated {
        lambda: Complex64,
        vanishing: Vec<usize>,
        extra: String,
    },

    #[error("assumption (D) violated at λ = {lambda}: vanishing S_j for j in {vanishing:?}")]
    AssumptionDViolated { lambda: Complex64, vanishing: Vec<usize> },

    #[error("condition (C) violated: ω_n = 0 for ν_n = {nu}")]
    ConditionCViolated { nu: Complex64 },

    #[error("Lemma check failed: d_m(ν) = {dm} at ν = {nu}")]
    LemmaViolated { nu: Complex64, dm: Complex64 },

    #[error("row divisor vanishes at λ = {lambda} (|divisor| = {magnitude:e}); subspectrum entry misclassified")]
    DivisionDegeneracy { lambda: Complex64, magnitude: f64 },

    #[error("least-squares system rank deficient: effective rank {rank} < {unknowns} unknowns")]
    RankDeficient { rank: usize, unknowns: usize },

    #[error("β = {beta} lies on the excluded lattice (sin βπ = 0)")]
    BranchSingular { beta: f64 },

    #[error("coefficient fit diverged: {0}")]
    FitDiverged(String),

    #[error("Gram matrix numerically singular (smallest eigenvalue {min_eigenvalue:e})")]
    SingularGram { min_eigenvalue: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
