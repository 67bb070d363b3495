//! Error types shared across the crate.

use thiserror::Error;

/// Scenario document problems: malformed JSON or a failed validation rule.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario: {field}: {message}")]
    Invalid { field: String, message: String },
}

impl ScenarioError {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Calibration table construction/loading problems.
#[derive(Debug, Error, PartialEq)]
pub enum TableError {
    #[error("calibration table is empty")]
    Empty,
    #[error("calibration table row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("calibration table distances must be strictly increasing (row {row})")]
    NonIncreasingDistance { row: usize },
    #[error("calibration table voltages must be nondecreasing (row {row})")]
    DecreasingVoltage { row: usize },
}

/// Line-fit failure: a vertical line has no slope/intercept form.
#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least 2 knots to fit a line")]
    TooFewKnots,
    #[error("all knot distances are equal; line fit is degenerate")]
    DegenerateDistances,
}

/// Trace CSV parsing problems.
#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace header mismatch: expected {expected:?}, got {got:?}")]
    Header { expected: String, got: String },
    #[error("trace line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("trace is empty")]
    Empty,
}
