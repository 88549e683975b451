//! Configuration-driven front end for the `wigner-kg` solvers.

pub mod config;
pub mod io;
pub mod run;

pub use config::RunConfig;
pub use run::{run, Command, RunSummary};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("solver aborted: {0}")]
    Solver(String),
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<wigner_kg::Error> for CliError {
    fn from(e: wigner_kg::Error) -> Self {
        use wigner_kg::Error as E;
        match &e {
            E::InvalidParameter { name, reason } => CliError::config(*name, reason.clone()),
            E::Stability { .. } => CliError::config("solver.dt", e.to_string()),
            E::OutsideWindow { .. } => CliError::config("medium.window", e.to_string()),
            E::NonFinite { step } => CliError::Solver(format!("non-finite state at step {step}")),
            _ => CliError::Solver(e.to_string()),
        }
    }
}
