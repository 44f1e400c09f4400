use thiserror::Error;

/// Failures raised by the estimation toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("vector is not normalised: |v| = {norm}")]
    NotNormalized { norm: f64 },

    #[error("vector has zero norm and cannot be normalised")]
    ZeroVector,

    #[error("operator {index} is not Hermitian (defect {defect:e})")]
    NotHermitian { index: usize, defect: f64 },

    #[error("operator {index} is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { index: usize, min_eigenvalue: f64 },

    #[error("normalisation violated for {mode} instrument (defect {defect:e})")]
    Normalization { mode: &'static str, defect: f64 },

    #[error("instrument has no elements")]
    EmptyInstrument,

    #[error("{0}")]
    ModeMismatch(String),

    #[error("every outcome is rejected{}", theta.as_ref().map(|t| format!(" at theta = {t}")).unwrap_or_default())]
    ZeroAcceptance { theta: Option<String> },

    #[error("element {index} has rank {rank}, expected rank one")]
    NonRankOne { index: usize, rank: usize },

    #[error("all Kraus operators are numerically zero")]
    ZeroInstrument,

    #[error("generalized eigenproblem has a numerically zero D matrix")]
    SingularD,

    #[error("post-selection never succeeded after {retries} attempts at theta = {theta}")]
    RetryExhausted { retries: u64, theta: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<V> = std::result::Result<V, Error>;
