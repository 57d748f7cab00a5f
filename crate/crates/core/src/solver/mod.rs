//! The inertial ADMM iteration.

pub mod block;
pub mod config;
pub mod engine;
pub mod extrapolation;
pub mod trace;

pub use block::{block_coefficients, update_block, BlockCoefficients, BlockMemory, BlockStep};
pub use config::{
    validate_config, BlockParams, Budget, CheckLevel, DerivedConstants, Extrapolation, KappaRule, SolverConfig,
    UpdateRule,
};
pub use engine::{
    lyapunov_value, run, run_with_observer, update_multiplier, update_y, InitialPoint, IterateState, RunOutput,
    StopReason,
};
pub use trace::{format_trace_csv, parse_trace_csv, RecordDetail, TraceRecord, TRACE_HEADER};
