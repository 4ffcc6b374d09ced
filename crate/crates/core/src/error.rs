use std::path::PathBuf;

use crate::env::{Action, State};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no prediction for state {state} action {action}: coverage gap{context}")]
    CoverageGap {
        state: State,
        action: Action,
        /// Optional identity of the offending population, prefixed with ": ".
        context: String,
    },

    #[error("value iteration did not converge within {iterations} sweeps (last delta {delta:e})")]
    NonConvergence { iterations: usize, delta: f64 },

    #[error("invalid hyperparameter `{name}`: {reason}")]
    InvalidHyperparameter { name: &'static str, reason: String },

    #[error("invalid grid map: {0}")]
    InvalidMap(String),

    #[error("unknown mass function `{0}` (expected fit, tan or inv_fit)")]
    UnknownMass(String),

    #[error("parse error in {path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn gap(state: State, action: Action) -> Self {
        Error::CoverageGap {
            state,
            action,
            context: String::new(),
        }
    }

    /// Attaches a population identity to a coverage-gap error; other errors pass through.
    pub fn with_context(self, what: impl std::fmt::Display) -> Self {
        match self {
            Error::CoverageGap { state, action, .. } => Error::CoverageGap {
                state,
                action,
                context: format!(": {what}"),
            },
            other => other,
        }
    }
}
