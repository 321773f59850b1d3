use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter outside what the model accepts (grid size, kernel resolution, fiber ranges).
    #[error("configuration error: {0}")]
    Config(String),

    /// A value outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "aliasing at z = {z_m:.6} m: {fraction:.3e} of the spectral energy sits within 3 bins of the \
         Nyquist edge; enlarge the grid to at least {suggested_points} points"
    )]
    Aliasing {
        z_m: f64,
        fraction: f64,
        suggested_points: usize,
    },

    #[error("numerical failure at z = {z_m:.6} m: {what}")]
    Numerical { z_m: f64, what: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("validation failed with {} violation(s): {}", .0.len(), .0.join("; "))]
    Validation(Vec<String>),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Propagation distance at which the failure happened, when it has one.
    pub fn z_position(&self) -> Option<f64> {
        match self {
            Error::Aliasing { z_m, .. } | Error::Numerical { z_m, .. } => Some(*z_m),
            _ => None,
        }
    }

    /// Short machine-readable tag for structured error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Domain(_) => "domain",
            Error::Aliasing { .. } => "aliasing",
            Error::Numerical { .. } => "numerical",
            Error::Contract(_) => "contract",
            Error::Validation(_) => "validation",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
        }
    }
}
