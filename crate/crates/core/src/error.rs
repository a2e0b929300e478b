use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("positivity error: {0}")]
    Positivity(String),

    #[error("degenerate symbol: {0}")]
    DegenerateSymbol(String),

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("frequency {frequency:?} falls outside the truncation window after reduction")]
    Truncation { frequency: Vec<f64> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("fit error: {0}")]
    Fit(String),
}

impl Error {
    /// Errors caused by malformed or inconsistent input, as opposed to a
    /// numerical or certification failure on valid input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::Geometry(_)
                | Error::Domain(_)
                | Error::Positivity(_)
                | Error::DegenerateSymbol(_)
                | Error::Truncation { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
