use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A malformed or inconsistent scenario file.
    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("invalid sweep: {0}")]
    Sweep(String),

    #[error(transparent)]
    Solver(mdirand::Error),
}

impl CliError {
    /// 1 for input problems, 2 when the solver could not certify a bound.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
