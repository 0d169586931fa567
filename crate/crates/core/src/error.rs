use std::path::PathBuf;

use thiserror::Error;

use crate::engine::ChainState;

#[derive(Debug, Error)]
pub enum FiducialError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An update left the model's domain (or produced a non-finite value).
    #[error("flagged step at m={m} (z={z}): {reason}; state before step: {state}")]
    FlaggedStep {
        m: u64,
        state: Box<ChainState>,
        z: f64,
        reason: String,
    },

    #[error("{operation} is not supported for model family `{family}`")]
    Unsupported {
        operation: &'static str,
        family: String,
    },

    #[error("{} of {total} chains failed; first failure in chain {}: {}", failures.len(), failures[0].0, failures[0].1)]
    ChainFailures {
        total: usize,
        failures: Vec<(usize, FiducialError)>,
    },

    #[error("degenerate design point at m={m}: {reason} (covariates {x:?}, parameter {theta:?})")]
    DegenerateDesign {
        m: u64,
        x: Vec<f64>,
        theta: Vec<f64>,
        reason: String,
    },

    #[error("least-squares fit diverged after {iterations} iterations (loss {loss})")]
    Divergence { iterations: usize, loss: f64 },

    #[error("{path}: row {row}, column `{column}`: {reason}")]
    Data {
        path: PathBuf,
        row: usize,
        column: String,
        reason: String,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("NaN encountered in {0}")]
    NotANumber(&'static str),
}

impl FiducialError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        FiducialError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures caused by the numerics of a run (domain excursions,
    /// degenerate design points, divergence) rather than by bad input.
    pub fn is_numeric_domain(&self) -> bool {
        match self {
            FiducialError::FlaggedStep { .. }
            | FiducialError::DegenerateDesign { .. }
            | FiducialError::Divergence { .. }
            | FiducialError::NotANumber(_) => true,
            FiducialError::ChainFailures { failures, .. } => {
                failures.iter().all(|(_, e)| e.is_numeric_domain())
            }
            _ => false,
        }
    }
}

pub type Result<T, E = FiducialError> = std::result::Result<T, E>;
