//! Experiment harness for logistic matrix factorization: multi-trial runs of
//! iADMMn variants, their non-inertial versions and a gradient baseline,
//! summary statistics and plot data.

pub mod check;
pub mod config;
pub mod error;
pub mod experiment;
pub mod gendata;
pub mod summarize;

pub use config::{BudgetConfig, ExperimentConfig, SizeConfig, VariantConfig};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, Algorithm, ExperimentOutput, RunOptions, Summary, SummaryRow};
pub use summarize::summarize;
