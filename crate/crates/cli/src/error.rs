use std::path::PathBuf;

use hk_core::Error as CoreError;

/// Process exit codes. Stable: scripts depend on them.
pub mod exit {
    pub const PASS: u8 = 0;
    pub const IO: u8 = 1;
    pub const GENERATION: u8 = 2;
    pub const PRECONDITION: u8 = 3;
    pub const FLOW_ASSUMPTION: u8 = 4;
    pub const CONVERGENCE_ANOMALY: u8 = 5;
    /// The run completed but at least one check did not pass.
    pub const CHECK_FAILED: u8 = 6;
    pub const USAGE: u8 = 64;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } => exit::IO,
            CliError::Usage(_) => exit::USAGE,
            CliError::Core(e) => match e {
                CoreError::Generation(_)
                | CoreError::RejectedShape { .. }
                | CoreError::InvalidGrid(_)
                | CoreError::DegenerateSurface { .. } => exit::GENERATION,
                CoreError::Precondition { .. }
                | CoreError::ConeViolation { .. }
                | CoreError::NumericDomain(_) => exit::PRECONDITION,
                CoreError::FlowAssumption { .. } | CoreError::Focal { .. } => exit::FLOW_ASSUMPTION,
                CoreError::Serialization(_) => exit::IO,
                CoreError::Domain(_) | CoreError::NotSymmetric { .. } => exit::USAGE,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
