//! Logistic matrix factorization: model, data, closed-form steps and the
//! alternating gradient baseline.

pub mod data;
pub mod gd;
pub mod model;
pub mod problem;
pub mod updates;

pub use data::{generate_instance, init_factors};
pub use gd::{run_gd, GdOutput};
pub use model::{lipschitz_g, sigmoid, softplus, LogMfInstance};
pub use problem::LogMfProblem;
pub use updates::{gd_baseline_step, update_u, update_v, update_w};
