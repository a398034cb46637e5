//! Process exit codes and the error type carrying them.

use std::fmt;

pub const SUCCESS: i32 = 0;
/// A hypothesis or certification check failed.
pub const FAILURE: i32 = 1;
/// Bad configuration, arguments or input files.
pub const CONFIG: i32 = 2;
/// The ground-state solver diverged or stalled.
pub const DIVERGENCE: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn new(code: i32, error: impl Into<anyhow::Error>) -> Self {
        CliError { code, error: error.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

/// Exit code for a library error, looking through any added context.
pub fn code_for(error: &anyhow::Error) -> i32 {
    use qnls_core::Error as E;
    for cause in error.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Divergence { .. } | E::MaxIterations { .. } | E::SingularSystem { .. } => DIVERGENCE,
                E::Parse { .. }
                | E::ComponentOutOfRange { .. }
                | E::InvalidParameter(_)
                | E::DimensionOutOfRange(_)
                | E::MissingSigma
                | E::NonPositive { .. }
                | E::UnknownBuiltin(_)
                | E::Precondition(_)
                | E::OutsideDomain { .. } => CONFIG,
                _ => FAILURE,
            };
        }
    }
    CONFIG
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        let error = e.into();
        CliError { code: code_for(&error), error }
    }
}
