//! Error type of the command-line layer and its process exit codes.

use thiserror::Error;

use crate::edgelist::EdgeListError;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const GENERIC: i32 = 1;
    /// Reserved for command-line usage errors.
    pub const USAGE: i32 = 2;
    pub const PARSE: i32 = 3;
    pub const DIMENSION: i32 = 4;
    pub const CONTROLLABILITY: i32 = 5;
    pub const BUDGET: i32 = 6;
    pub const PARAMETER: i32 = 7;
    pub const IO: i32 = 8;
    pub const NUMERICAL: i32 = 9;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    EdgeList(#[from] EdgeListError),
    /// An error raised by one of the analysis modules, prefixed by its name.
    #[error("{module}: {source}")]
    Module {
        module: &'static str,
        #[source]
        source: tvsched::Error,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn module(module: &'static str) -> impl FnOnce(tvsched::Error) -> CliError {
        move |source| CliError::Module { module, source }
    }

    pub fn exit_code(&self) -> i32 {
        use tvsched::Error as E;
        match self {
            CliError::EdgeList(EdgeListError::Io { .. }) | CliError::Io { .. } => exit::IO,
            CliError::EdgeList(EdgeListError::NodeOutOfRange { .. }) => exit::DIMENSION,
            CliError::EdgeList(_) => exit::PARSE,
            CliError::Module { source, .. } => match source {
                E::Dimension(_)
                | E::NodeOutOfRange { .. }
                | E::InvalidSchedule(_)
                | E::NotSymmetric { .. } => exit::DIMENSION,
                E::Uncontrollable { .. } => exit::CONTROLLABILITY,
                E::BudgetExceeded { .. } => exit::BUDGET,
                E::InvalidParameter(_) | E::DegenerateBaseline(_) | E::NilpotentMatrix => {
                    exit::PARAMETER
                }
                E::Numerical(_) => exit::NUMERICAL,
            },
            CliError::Usage(_) => exit::USAGE,
            CliError::Pool(_) | CliError::Json(_) => exit::GENERIC,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
