use alloc::string::String;
use alloc::vec::Vec;
use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

/// Why an interaction expression was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    UnexpectedToken(String),
    /// `zj` with `j` outside `1..=l`.
    ComponentOutOfRange { index: usize, l: usize },
    /// Division by a non-constant expression.
    NonPolynomial,
    DivisionByZero,
    BadExponent,
    /// Rational arithmetic overflowed `i128`.
    Overflow,
}

impl core::fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{c}'"),
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ParseErrorKind::UnexpectedToken(t) => write!(f, "unexpected token '{t}'"),
            ParseErrorKind::ComponentOutOfRange { index, l } => {
                write!(f, "component z{index} out of range (l = {l})")
            }
            ParseErrorKind::NonPolynomial => {
                f.write_str("division by a non-constant expression is not polynomial")
            }
            ParseErrorKind::DivisionByZero => f.write_str("division by zero"),
            ParseErrorKind::BadExponent => {
                f.write_str("exponent must be a non-negative integer literal")
            }
            ParseErrorKind::Overflow => f.write_str("coefficient overflow"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at position {pos}: {kind}")]
    Parse { pos: usize, kind: ParseErrorKind },

    #[error("component index {index} out of range 1..={l}")]
    ComponentOutOfRange { index: usize, l: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension {0} out of supported range")]
    DimensionOutOfRange(usize),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("singular tridiagonal system (zero pivot at row {row})")]
    SingularSystem { row: usize },

    #[error("charge weights sigma are not available")]
    MissingSigma,

    #[error("field lies outside the set P > 0 (P = {potential:e})")]
    OutsideDomain { potential: f64 },

    #[error("{quantity} must be positive (got {value:e})")]
    NonPositive { quantity: &'static str, value: f64 },

    #[error("Petviashvili iteration diverged at step {iteration} (stabilizer {stabilizer:e})")]
    Divergence { iteration: usize, stabilizer: f64, history: Vec<f64> },

    #[error("no convergence after {iterations} iterations (|M-1| = {defect:e})")]
    MaxIterations { iterations: usize, defect: f64, history: Vec<f64> },

    #[error("unknown builtin system '{0}'")]
    UnknownBuiltin(String),

    #[error("{fraction:.3e} of the mass leaves the grid")]
    MassLoss { fraction: f64 },

    #[error("field under-resolved after rescaling ({fraction:.3e} of the mass in the first cells)")]
    UnderResolved { fraction: f64 },

    #[error("G(0) equals the barrier gamma; branch undecided")]
    BoundaryUndecided,

    #[error("snapshots are not uniformly spaced in time")]
    NonUniformSampling,

    #[error("precondition violated: {0}")]
    Precondition(String),
}
