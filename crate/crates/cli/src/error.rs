//! Command failures and their process exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config, parameters or unwritable output. Exit code 1.
    #[error("{0}")]
    Input(String),
    /// Solver breakdown. Exit code 2.
    #[error("{0}")]
    Numerical(String),
    /// A validation check fell outside its tolerance. Exit code 3.
    #[error("{0}")]
    Tolerance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Tolerance(_) => 3,
        }
    }
}

impl From<cavity_ladder::Error> for CliError {
    fn from(e: cavity_ladder::Error) -> Self {
        use cavity_ladder::Error as E;
        match e {
            E::InvalidParams(_) | E::InvalidInput(_) | E::GridTooNarrow(_) | E::Inapplicable(_) => {
                CliError::Input(e.to_string())
            }
            E::NumericalFailure(_) | E::Resource(_) => CliError::Numerical(e.to_string()),
        }
    }
}
