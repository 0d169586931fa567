//! Doob fiducial sampling: forward simulation of statistic chains
//! `T_{m+1} = H_m(T_m, Z_m)` to their almost-sure limits, closed-form Fisher
//! fiducial oracles to compare against, and convergence diagnostics.

pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod models;
pub mod oracles;
pub mod quadrature;
pub mod regression;
pub mod rng;
pub mod special;

pub use diagnostics::{kakutani_diagnostic, series_diagnostic, DiagnosticsReport};
pub use engine::{
    normal_closed_form_sample, run_chain, sample_fiducial, step, tail_sum_inverse_squares, ChainRun, ChainState,
    RunOptions, SampleSet, StateValue, Summary,
};
pub use error::{FiducialError, Result};
pub use models::{Family, ModelSpec};
pub use oracles::{fisher_oracle, ks_distance, ks_two_sample, FisherFamily, OracleDistribution};
pub use regression::{run_regression_fiducial, Linear, Logistic, RegressionDataset, RegressionModel};
