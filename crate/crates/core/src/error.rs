use thiserror::Error;

use crate::expr::Symbol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by the zero expression")]
    DivisionByZero,
    #[error("substitution creates a zero denominator")]
    SubstitutionZeroDenominator,
    #[error("result is not representable: {0}")]
    NonRepresentable(String),
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(Symbol),
    #[error("pole at evaluation point")]
    PoleAtPoint,
    #[error("fractional power of a negative base")]
    NegativeBaseFractionalPower,
    #[error("jet order {order} exceeds the order cap {cap}")]
    OrderCapExceeded { order: u32, cap: u32 },
    #[error("point is not on the equation: {0}")]
    PointNotOnEquation(String),
    #[error("pseudogroup element is not invertible on the domain: {0}")]
    NonInvertibleElement(String),
    #[error("solution leaves its domain: {0}")]
    SolutionLeavesDomain(String),
    #[error("lift of shape-preserving field is inconsistent: {0}")]
    InconsistentLift(String),
    #[error("degenerate metric")]
    DegenerateMetric,
    #[error("degenerate metric at point {0:?}")]
    DegenerateMetricAtPoint([String; 3]),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("canonical frame degenerate: {0}")]
    FrameDegenerate(String),
    #[error("unknown catalog id `{0}`")]
    UnknownCatalogId(String),
    #[error("potential does not satisfy the universal-hierarchy equation: {0}")]
    HierarchyCheckFailed(String),
    #[error("not a solution of the modified Manakov-Santini system: {0}")]
    NotASolution(String),
    #[error("point lies on the singular locus: {0}")]
    SingularLocus(String),
    #[error("every sample point is singular: {0}")]
    AllSamplesSingular(String),
    #[error("signature clouds have different precision classes")]
    PrecisionMismatch,
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown identifier: {0}")]
    UnknownIdentifier(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Process exit status for a failed check.
pub const EXIT_CHECK_FAILED: u8 = 1;
/// Exit status for rejected command-line usage.
pub const EXIT_USAGE: u8 = 2;

impl Error {
    /// Process exit status reported by the command-line tool.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Syntax { .. } => 3,
            Error::UnknownIdentifier(_) | Error::UnknownCatalogId(_) => 4,
            Error::NotASolution(_) | Error::HierarchyCheckFailed(_) => 5,
            Error::SingularLocus(_) | Error::AllSamplesSingular(_) | Error::FrameDegenerate(_) => 6,
            Error::DegenerateMetric | Error::DegenerateMetricAtPoint(_) => 7,
            Error::PoleAtPoint
            | Error::NegativeBaseFractionalPower
            | Error::DomainViolation(_)
            | Error::SolutionLeavesDomain(_) => 8,
            Error::OrderCapExceeded { .. } | Error::PointNotOnEquation(_) => 9,
            Error::NonInvertibleElement(_) | Error::InconsistentLift(_) => 10,
            Error::DivisionByZero
            | Error::SubstitutionZeroDenominator
            | Error::NonRepresentable(_)
            | Error::UnboundSymbol(_) => 11,
            Error::PrecisionMismatch => 12,
            Error::InvalidArgument(_) => 13,
            Error::Io(_) => 14,
        }
    }
}
