use thiserror::Error;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const SCHEMA: i32 = 2;
    pub const NOT_CONVERGED: i32 = 3;
    pub const ESTIMATE_FAILED: i32 = 4;
    pub const IO: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Schema(String),
    #[error("{0}")]
    NotConverged(String),
    #[error("estimate {name}: {message}")]
    Estimate { name: String, message: String },
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn schema(msg: impl Into<String>) -> Self {
        CliError::Schema(msg.into())
    }

    pub fn io(e: impl std::fmt::Display) -> Self {
        CliError::Io(e.to_string())
    }

    /// A core error raised while evaluating the estimate `name`.
    pub fn in_estimate(name: &str, e: fracg::Error) -> Self {
        match CliError::from(e) {
            CliError::Estimate { message, .. } => CliError::Estimate { name: name.to_string(), message },
            other => other,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => exit::SCHEMA,
            CliError::NotConverged(_) => exit::NOT_CONVERGED,
            CliError::Estimate { .. } => exit::ESTIMATE_FAILED,
            CliError::Io(_) => exit::IO,
        }
    }
}

impl From<fracg::Error> for CliError {
    fn from(e: fracg::Error) -> Self {
        use fracg::Error as E;
        match e {
            E::Io(m) => CliError::Io(m),
            E::NotConverged(_) | E::Stagnation(_) => CliError::NotConverged(e.to_string()),
            E::InvalidParameter(_) | E::Domain { .. } | E::EmptyRegion | E::Precondition(_) | E::OutOfTable { .. } => {
                CliError::Schema(e.to_string())
            }
            E::Overflow(_) | E::NoConvergence { .. } | E::Divergent { .. } | E::Inadmissible(_) => {
                CliError::Estimate { name: String::new(), message: e.to_string() }
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
