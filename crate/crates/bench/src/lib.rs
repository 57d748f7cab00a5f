//! Shared fixtures for the benchmarks.

use iadmmn_core::linalg::Mat;
use iadmmn_core::logmf::{generate_instance, init_factors, LogMfInstance};

/// Log-MF instance with density 0.1, `c = 1`, `lambda = 0.25`, and a starting point.
pub fn fixture(m: usize, n: usize, r: usize, seed: u64) -> (LogMfInstance, Mat, Mat) {
    let y = generate_instance(m, n, 0.1, seed).expect("valid density");
    let inst = LogMfInstance::new(y, r, 1.0, 0.25, 0.25).expect("valid instance");
    let (u, v) = init_factors(m, n, r, seed + 1);
    (inst, u, v)
}
