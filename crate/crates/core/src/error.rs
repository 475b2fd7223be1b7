use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("weights are not symmetric at ({row}, {col}): {a} vs {b}")]
    AsymmetricWeights {
        row: usize,
        col: usize,
        a: f64,
        b: f64,
    },
    #[error("negative weight {value} at ({row}, {col})")]
    NegativeWeight { row: usize, col: usize, value: f64 },
    #[error("nonzero diagonal weight {value} at node index {index}")]
    NonzeroDiagonal { index: usize, value: f64 },
    #[error("duplicate node id {0}")]
    DuplicateNodeId(u64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("eigendecomposition failed: {0}")]
    DecompositionFailure(String),
    #[error("invalid probability {0}")]
    InvalidProbability(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cannot remove {requested} items, only {available} available")]
    TooManyRemovals { requested: usize, available: usize },
    #[error("cannot add {requested} edges, only {available} non-adjacent pairs")]
    NoRoomToAdd { requested: usize, available: usize },
    #[error("spectrum is identically zero (edgeless graph)")]
    ZeroSpectrum,
    #[error("linear system is singular or non-finite")]
    SingularSystem,
    #[error("empty sample set")]
    EmptySampleSet,
    #[error("ARMA denominator vanishes at eigenvalue {lambda}")]
    PoleOnGrid { lambda: f64 },
    #[error("QP solver diverged after {iterations} iterations")]
    SolverDiverged { iterations: usize },
    #[error("regularization parameter must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("covariance is not positive definite")]
    SingularCovariance,
    #[error("density-ratio weights collapsed to zero")]
    DegenerateWeights,
    #[error("node mapping inconsistent with graphs: {0}")]
    MappingMismatch(String),
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("all {0} trials failed")]
    AllTrialsFailed(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::AsymmetricWeights { .. } => "AsymmetricWeights",
            Error::NegativeWeight { .. } => "NegativeWeight",
            Error::NonzeroDiagonal { .. } => "NonzeroDiagonal",
            Error::DuplicateNodeId(_) => "DuplicateNodeId",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DecompositionFailure(_) => "DecompositionFailure",
            Error::InvalidProbability(_) => "InvalidProbability",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::TooManyRemovals { .. } => "TooManyRemovals",
            Error::NoRoomToAdd { .. } => "NoRoomToAdd",
            Error::ZeroSpectrum => "ZeroSpectrum",
            Error::SingularSystem => "SingularSystem",
            Error::EmptySampleSet => "EmptySampleSet",
            Error::PoleOnGrid { .. } => "PoleOnGrid",
            Error::SolverDiverged { .. } => "SolverDiverged",
            Error::NonPositiveLambda(_) => "NonPositiveLambda",
            Error::SingularCovariance => "SingularCovariance",
            Error::DegenerateWeights => "DegenerateWeights",
            Error::MappingMismatch(_) => "MappingMismatch",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::AllTrialsFailed(_) => "AllTrialsFailed",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}
