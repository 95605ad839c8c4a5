use std::path::PathBuf;

use crate::conic::{ConicProgram, SolveStatus};

/// Regime violations detected before (or instead of) building a program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeKind {
    /// ρ does not exceed ρ_min (plus the routing tolerance).
    RhoBelowMin,
    /// The worst-case value equals sup over the support of the loss.
    Uninformative,
    /// ρ sits on the ρ_max boundary, which is left unresolved.
    Boundary,
    /// ε̲ was requested with ρ ≥ ρ_max.
    NullProbability,
    /// The type-∞ index set 𝒥 is empty.
    EmptyTypeInftySet,
    /// The builder does not match the (γ, ε, support, loss) of the spec.
    WrongBuilder,
    /// A support set is unbounded where a bounded one is required.
    UnboundedSupport,
}

impl RegimeKind {
    pub fn code(self) -> &'static str {
        match self {
            RegimeKind::RhoBelowMin => "REGIME_RHO_BELOW_MIN",
            RegimeKind::Uninformative => "REGIME_UNINFORMATIVE",
            RegimeKind::Boundary => "REGIME_BOUNDARY",
            RegimeKind::NullProbability => "REGIME_NULL_PROBABILITY",
            RegimeKind::EmptyTypeInftySet => "REGIME_EMPTY_TYPE_INFTY_SET",
            RegimeKind::WrongBuilder => "REGIME_WRONG_BUILDER",
            RegimeKind::UnboundedSupport => "REGIME_UNBOUNDED_SUPPORT",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{message}")]
    Regime { kind: RegimeKind, message: String },

    #[error("conditioning on empirical null event: no sample lies in the fiber")]
    EmptyFiber,

    #[error("solver finished with status {status:?}")]
    Solver {
        status: SolveStatus,
        program: Box<ConicProgram>,
    },

    #[error("program failed validation: {}", .0.join("; "))]
    InvalidProgram(Vec<String>),

    #[error("backend cannot handle this program: {0}")]
    Backend(String),

    #[error("{path}: line {line}: {message}")]
    Data {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn regime(kind: RegimeKind, message: impl Into<String>) -> Self {
        Error::Regime {
            kind,
            message: message.into(),
        }
    }

    /// Stable machine-readable code, used for the CLI error JSON.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "DIMENSION_MISMATCH",
            Error::InvalidParameter(_) => "INVALID_PARAMETER",
            Error::Regime { kind, .. } => kind.code(),
            Error::EmptyFiber => "EMPTY_FIBER",
            Error::Solver { .. } => "SOLVER_STATUS",
            Error::InvalidProgram(_) => "INVALID_PROGRAM",
            Error::Backend(_) => "SOLVER_BACKEND",
            Error::Data { .. } => "DATA_SCHEMA",
            Error::Numeric(_) => "NUMERIC",
            Error::Io(_) => "IO",
            Error::Json(_) => "JSON",
            Error::Csv(_) => "CSV",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
