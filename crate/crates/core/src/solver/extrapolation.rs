//! Inertial weights.
//!
//! The momentum schedule is Nesterov's `t_k = (1 + sqrt(1 + 4 t_{k-1}^2)) / 2`
//! with `t_0 = 1`. The raw weight `(t_{k-1} - 1)/t_k` is capped so that the
//! error coefficient of the current step never exceeds `B1` times the descent
//! coefficient of the previous one.

use crate::error::{Error, Result};

pub fn nesterov_t_next(t_prev: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * t_prev * t_prev).sqrt())
}

/// `(t_{k-1} - 1) / t_k`
pub fn momentum_weight(t_prev: f64, t: f64) -> f64 {
    (t_prev - 1.0) / t
}

/// Cap `B1 sqrt(lip_prev / lip)` for the exact-kappa case, where
/// `gamma = (s/2) lip alpha^2` and `eta = (s/2) lip`.
pub fn ratio_cap(b1: f64, lip_prev: f64, lip: f64) -> Result<f64> {
    if !(lip > 0.0) || !(lip_prev >= 0.0) {
        return Err(Error::Numeric(format!(
            "extrapolation cap needs positive Lipschitz constants, got {lip_prev} and {lip}"
        )));
    }
    Ok(b1 * (lip_prev / lip).sqrt())
}

/// Largest `alpha` with `(a alpha)^2 / (2 nu rho) <= B1 eta_prev`.
pub fn nsdp_cap(b1: f64, nu: f64, rho: f64, a: f64, eta_prev: f64) -> Result<f64> {
    if !(a > 0.0) || !(rho > 0.0) {
        return Err(Error::Numeric(format!(
            "extrapolation cap needs positive coefficients, got a = {a}, rho = {rho}"
        )));
    }
    Ok((2.0 * nu * rho * b1 * eta_prev.max(0.0)).sqrt() / a)
}

/// `min{(t_{k-1} - 1)/t_k, cap}`, and `0` at the first iteration.
pub fn extrapolation_weight(k: usize, t_prev: f64, t: f64, cap: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    momentum_weight(t_prev, t).min(cap).max(0.0)
}
