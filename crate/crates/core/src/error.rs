use thiserror::Error;

/// Errors raised by the solvers, dictionaries, and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("location {t} lies outside the parameter domain [{lo}, {hi}{close}")]
    Domain {
        t: f64,
        lo: f64,
        hi: f64,
        close: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("restricted solver did not converge at outer iteration {iteration} ({inner_iterations} inner steps, mapping norm {mapping_norm:e})")]
    NotConverged {
        iteration: usize,
        inner_iterations: usize,
        mapping_norm: f64,
    },

    #[error("refused: {0}")]
    Refused(String),

    #[error("solver invariant violated: {0}")]
    Numerical(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}
