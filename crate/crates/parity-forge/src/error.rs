//! Crate-wide error type and process exit-code mapping.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("type error in column `{column}`, row {row}: {message}")]
    ColumnType {
        column: String,
        row: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("role error: {0}")]
    Role(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unknown group `{0}` at evaluation time")]
    UnknownGroup(String),

    #[error(
        "no convergence after {iterations} iterations (gradient norm {gradient_norm:.3e}); last iterate {last_iterate:?}"
    )]
    Convergence {
        iterations: usize,
        gradient_norm: f64,
        last_iterate: Vec<f64>,
    },

    #[error("divergent fit: {0}")]
    Divergence(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("fitted model assigns zero mass to observed value {value} at row {row}")]
    ZeroMass { row: usize, value: f64 },

    #[error("non-finite CDF value at row {row}: {message}")]
    NanPropagation { row: usize, message: String },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("replicate {replicate}, step {step} (variable `{variable}`): {source}")]
    Pipeline {
        replicate: usize,
        step: usize,
        variable: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 0 ok, 2 config, 3 data, 4 numeric/convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Schema(_) => 2,
            Error::ColumnType { .. }
            | Error::Validation(_)
            | Error::Role(_)
            | Error::Contract(_)
            | Error::InsufficientData(_)
            | Error::UnknownGroup(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => 3,
            Error::Domain(_)
            | Error::Convergence { .. }
            | Error::Divergence(_)
            | Error::DegenerateFit(_)
            | Error::ZeroMass { .. }
            | Error::NanPropagation { .. }
            | Error::Numeric(_) => 4,
            Error::Pipeline { source, .. } => source.exit_code(),
        }
    }
}
