use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::{self, gram_norm, Mat};
use crate::solver::{Budget, RecordDetail, TraceRecord};

use super::model::LogMfInstance;

#[derive(Debug, Clone)]
pub struct GdOutput {
    pub trace: Vec<TraceRecord>,
    pub u: Mat,
    pub v: Mat,
}

/// Alternating gradient descent from `(u0, v0)` under `budget`.
///
/// Trace rows use the solver's columns: the augmented Lagrangian and
/// Lyapunov columns repeat the objective, `feas` and `stat_y` are zero and
/// `stat_x_max` is the larger block gradient norm.
pub fn run_gd(inst: &LogMfInstance, u0: Mat, v0: Mat, budget: Budget) -> Result<GdOutput> {
    if budget.max_iters.is_none() && budget.max_seconds.is_none() {
        return Err(Error::Validation(crate::error::ValidationError::EmptyBudget));
    }
    let start = Instant::now();
    let lg = inst.lipschitz_g();
    let (mut u, mut v) = (u0, v0);
    let (mut value, mut g) = inst.g_value_and_grad(&u.dot(&v))?;
    let mut trace = Vec::new();
    let mut k = 0usize;
    let mut du = 0.0;
    loop {
        let mut gu = g.dot(&v.t());
        gu.scaled_add(inst.lambda_d, &u);
        let mut gv = u.t().dot(&g);
        gv.scaled_add(inst.lambda_t, &v);
        let objective = value + 0.5 * inst.lambda_d * linalg::norm_sq(&u) + 0.5 * inst.lambda_t * linalg::norm_sq(&v);
        trace.push(TraceRecord {
            k,
            time_s: start.elapsed().as_secs_f64(),
            objective,
            aug_lagrangian: objective,
            lyapunov: if k == 0 { f64::NAN } else { objective },
            feas: 0.0,
            stat_x_max: linalg::norm(&gu).max(linalg::norm(&gv)),
            stat_y: 0.0,
            dx: du,
            dy: 0.0,
            domega: 0.0,
            detail: RecordDetail::default(),
        });
        if budget.max_iters.is_some_and(|n| k >= n)
            || budget.max_seconds.is_some_and(|t| start.elapsed().as_secs_f64() >= t)
        {
            break;
        }

        let su = lg * gram_norm(&v) + inst.lambda_d;
        if !(su > 0.0) {
            return Err(Error::Numeric("GD step: U block Lipschitz constant is zero".into()));
        }
        let u_new = &u - &(gu / su);
        let g_mid = inst.g_grad(&u_new.dot(&v))?;
        let sv = lg * gram_norm(&u_new) + inst.lambda_t;
        if !(sv > 0.0) {
            return Err(Error::Numeric("GD step: V block Lipschitz constant is zero".into()));
        }
        let mut gv = u_new.t().dot(&g_mid);
        gv.scaled_add(inst.lambda_t, &v);
        let v_new = &v - &(gv / sv);
        du = (linalg::dist_sq(&u_new, &u) + linalg::dist_sq(&v_new, &v)).sqrt();
        u = u_new;
        v = v_new;
        (value, g) = inst.g_value_and_grad(&u.dot(&v))?;
        k += 1;
    }
    Ok(GdOutput { trace, u, v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logmf::{gd_baseline_step, generate_instance, init_factors};

    #[test]
    fn runner_matches_repeated_single_steps_and_descends() {
        let y = generate_instance(8, 6, 0.3, 5).unwrap();
        let inst = LogMfInstance::new(y, 3, 1.0, 0.25, 0.25).unwrap();
        let (u0, v0) = init_factors(8, 6, 3, 6);
        let out = run_gd(&inst, u0.clone(), v0.clone(), Budget::iterations(5)).unwrap();
        let (mut u, mut v) = (u0, v0);
        for _ in 0..5 {
            (u, v) = gd_baseline_step(&inst, &u, &v).unwrap();
        }
        assert_eq!(out.u, u);
        assert_eq!(out.v, v);
        assert_eq!(out.trace.len(), 6);
        for w in out.trace.windows(2) {
            assert!(w[1].objective < w[0].objective);
        }
        let last = out.trace.last().unwrap();
        assert!((last.objective - inst.objective(&u, &v).unwrap()).abs() < 1e-12 * last.objective);
    }
}
