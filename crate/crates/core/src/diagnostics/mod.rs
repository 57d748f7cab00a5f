//! Independent checks of solver output.

pub mod checks;
pub mod oracles;
pub mod report;

pub use checks::{check_descent, check_limit_feasibility, check_lower_bound, DescentKind};
pub use oracles::{brute_force_argmin, finite_diff_grad};
pub use report::{CheckReport, CheckStatus, Location, ViolationTracker};
