//! Inertial ADMM for nonconvex composite problems with nonlinear coupling
//! constraints `h(x) + B y = 0`.

pub mod diagnostics;
pub mod error;
pub mod formats;
pub mod linalg;
pub mod logmf;
pub mod problem;
pub mod rng;
pub mod solver;

pub use error::{Error, Result, ValidationError};
pub use linalg::{CouplingMap, Mat, Shape};
pub use problem::{BlockStructure, BlockVector, DualState, JointProx, LipschitzKind, Problem, Residuals};
pub use solver::{run, InitialPoint, RunOutput, SolverConfig};
