use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },
    /// A numeric module error, passed through verbatim.
    #[error("{0}")]
    Numeric(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numeric(_) => 2,
            _ => 1,
        }
    }
}

macro_rules! numeric_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Numeric(e.to_string())
            }
        })*
    };
}

numeric_from!(
    offdiag_holonomy::HolonomyError,
    offdiag_holonomy::SubspaceError,
    offdiag_holonomy::KernelError,
    offdiag_holonomy::interferometer::InterferometerError,
    offdiag_holonomy::quadrature::QuadratureError
);

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}
