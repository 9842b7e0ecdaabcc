//! Batch front-end for `vikit-core`.
//!
//! A scenario file names an operator, a convex set, solver settings and a
//! list of tasks. [`runner::run_scenario`] executes the tasks and writes
//! one CSV trace per solver task plus an aggregated JSON report.

pub mod golden;
pub mod runner;
pub mod scenario;
pub mod trace_csv;

use std::fmt;

pub use runner::{run_scenario, ExitStatus, Overrides, RunOutcome};
pub use scenario::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("malformed scenario JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid scenario: {0}")]
    Schema(String),

    #[error("invalid {what}: {source}")]
    Invalid {
        what: &'static str,
        source: vikit_core::Error,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl ScenarioError {
    pub(crate) fn invalid(what: &'static str) -> impl Fn(vikit_core::Error) -> Self {
        move |source| Self::Invalid { what, source }
    }

    pub(crate) fn io(path: impl fmt::Display) -> impl FnOnce(std::io::Error) -> Self {
        move |source| Self::Io {
            path: path.to_string(),
            source,
        }
    }
}
