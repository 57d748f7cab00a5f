//! Trace-level checks of the descent and stationarity guarantees.

use crate::error::{Error, Result};
use crate::solver::{SolverConfig, TraceRecord};

use super::report::{CheckReport, CheckStatus, Location, ViolationTracker};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DescentKind {
    /// `L^{k+1} <= L^k + tol (1 + |L^k|)` for every `k >= 1`.
    Lyapunov,
    /// `L(x^{k+1}, y^{k+1}, w^k) + (delta/2)||dy||^2 <= L(x^{k+1}, y^k, w^k) + tol (1 + |.|)`;
    /// needs records from a `full` check-level run.
    YSufficientDecrease { delta: f64 },
}

pub fn check_descent(trace: &[TraceRecord], kind: DescentKind, tol: f64) -> Result<CheckReport> {
    match kind {
        DescentKind::Lyapunov => {
            let mut t = ViolationTracker::new("lyapunov_descent", tol);
            let vals: Vec<(usize, f64)> = trace.iter().filter(|r| r.k >= 1).map(|r| (r.k, r.lyapunov)).collect();
            if vals.len() < 2 {
                return Err(Error::Schema("Lyapunov check needs two records with k >= 1".into()));
            }
            if let Some((k, _)) = vals.iter().find(|(_, v)| v.is_nan()) {
                return Err(Error::Schema(format!("record {k} has no Lyapunov value")));
            }
            for w in vals.windows(2) {
                let (prev, next) = (w[0].1, w[1].1);
                t.observe((next - prev) / (1.0 + prev.abs()), w[1].0, None);
            }
            Ok(t.report())
        }
        DescentKind::YSufficientDecrease { delta } => {
            let mut t = ViolationTracker::new("y_sufficient_decrease", tol);
            let mut seen = 0;
            for r in trace.iter().filter(|r| r.k >= 1) {
                let (Some(before), Some(after)) = (r.detail.lagrangian_before_y, r.detail.lagrangian_after_y) else {
                    return Err(Error::Schema(format!(
                        "record {} lacks the Lagrangian values of a full check-level run",
                        r.k
                    )));
                };
                t.observe(
                    (after + 0.5 * delta * r.dy * r.dy - before) / (1.0 + before.abs()),
                    r.k,
                    None,
                );
                seen += 1;
            }
            if seen == 0 {
                return Err(Error::Schema("trace has no iterations".into()));
            }
            Ok(t.report())
        }
    }
}

/// `L^k >= nu - tol` for every recorded `k >= 1`.
pub fn check_lower_bound(trace: &[TraceRecord], nu: f64, tol: f64) -> Result<CheckReport> {
    let mut t = ViolationTracker::new("lyapunov_lower_bound", tol);
    let mut seen = 0;
    for r in trace.iter().filter(|r| r.k >= 1) {
        t.observe(nu - r.lyapunov, r.k, None);
        seen += 1;
    }
    if seen == 0 {
        return Err(Error::Schema("trace has no iterations".into()));
    }
    Ok(t.report())
}

/// At a converged run, the residual must match `((1 - tau1)/(tau2 beta)) ||omega||`:
/// `|feas - c ||omega||| <= tol (feas + cfg.tolerance)`. Unconverged runs are inconclusive.
pub fn check_limit_feasibility(trace: &[TraceRecord], cfg: &SolverConfig, tol: f64) -> Result<CheckReport> {
    const NAME: &str = "approximate_stationarity_residual";
    let last = trace.last().ok_or_else(|| Error::Schema("empty trace".into()))?;
    let Some(stat_tol) = cfg.tolerance else {
        return Ok(CheckReport::inconclusive(
            NAME,
            tol,
            "no stationarity tolerance configured",
        ));
    };
    if !(last.stat_x_max <= stat_tol && last.stat_y <= stat_tol) {
        return Ok(CheckReport::inconclusive(
            NAME,
            tol,
            "run did not reach the stationarity tolerance",
        ));
    }
    let omega = last
        .detail
        .omega_norm
        .ok_or_else(|| Error::Schema("final record lacks ||omega||".into()))?;
    let predicted = (1.0 - cfg.tau1) / (cfg.tau2 * cfg.beta) * omega;
    let worst = (last.feas - predicted).abs() / (last.feas + stat_tol);
    let passed = worst <= tol;
    Ok(CheckReport {
        name: NAME.to_string(),
        passed,
        status: if passed { CheckStatus::Pass } else { CheckStatus::Fail },
        worst_violation: Some(worst),
        location: Location {
            iteration: Some(last.k),
            block: None,
        },
        tolerance: tol,
        note: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::RecordDetail;

    fn rec(k: usize, lyap: f64) -> TraceRecord {
        TraceRecord {
            k,
            time_s: 0.0,
            objective: lyap,
            aug_lagrangian: lyap,
            lyapunov: if k == 0 { f64::NAN } else { lyap },
            feas: 0.0,
            stat_x_max: 0.0,
            stat_y: 0.0,
            dx: 0.0,
            dy: 0.0,
            domega: 0.0,
            detail: RecordDetail::default(),
        }
    }

    #[test]
    fn increase_of_one_fails() {
        let trace = vec![rec(0, 0.0), rec(1, 0.0), rec(2, 1.0), rec(3, 1.0)];
        let r = check_descent(&trace, DescentKind::Lyapunov, 1e-8).unwrap();
        assert!(!r.passed);
        assert!((r.worst_violation.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.location.iteration, Some(2));
    }

    #[test]
    fn constant_trace_passes_with_zero_violation() {
        let trace: Vec<_> = (0..5).map(|k| rec(k, 3.0)).collect();
        let r = check_descent(&trace, DescentKind::Lyapunov, 1e-8).unwrap();
        assert!(r.passed);
        assert_eq!(r.worst_violation, Some(0.0));
    }

    #[test]
    fn missing_fields_are_schema_errors() {
        assert!(check_descent(&[rec(0, 0.0), rec(1, 0.0)], DescentKind::Lyapunov, 1e-8).is_err());
        let trace = vec![rec(0, 0.0), rec(1, 0.0), rec(2, 0.0)];
        assert!(matches!(
            check_descent(&trace, DescentKind::YSufficientDecrease { delta: 1.0 }, 1e-8),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn y_decrease_uses_delta() {
        let mut r = rec(1, 0.0);
        r.dy = 2.0;
        r.detail.lagrangian_before_y = Some(10.0);
        r.detail.lagrangian_after_y = Some(7.0);
        let trace = vec![rec(0, 0.0), r];
        // 7 + (1/2) 1.5 * 4 = 10
        assert!(
            check_descent(&trace, DescentKind::YSufficientDecrease { delta: 1.5 }, 1e-12)
                .unwrap()
                .passed
        );
        assert!(
            !check_descent(&trace, DescentKind::YSufficientDecrease { delta: 2.0 }, 1e-12)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn lower_bound_check() {
        let trace = vec![rec(0, -5.0), rec(1, 0.5), rec(2, -1e-7)];
        assert!(check_lower_bound(&trace, 0.0, 1e-6).unwrap().passed);
        assert!(!check_lower_bound(&trace, 0.0, 1e-8).unwrap().passed);
    }

    #[test]
    fn limit_feasibility_statuses() {
        let mut cfg = SolverConfig::new(1).with_taus(0.5, 0.5);
        cfg.tolerance = Some(0.05);
        let mut last = rec(3, 0.0);
        last.stat_x_max = 1.0;
        let r = check_limit_feasibility(&[last.clone()], &cfg, 0.05).unwrap();
        assert_eq!(r.status, CheckStatus::Inconclusive);
        assert!(!r.passed);

        last.stat_x_max = 0.01;
        last.detail.omega_norm = Some(2.0);
        last.feas = 2.0;
        assert!(check_limit_feasibility(&[last.clone()], &cfg, 0.05).unwrap().passed);
        last.feas = 1.0;
        let r = check_limit_feasibility(&[last.clone()], &cfg, 0.05).unwrap();
        assert_eq!(r.status, CheckStatus::Fail);

        let cfg1 = {
            let mut c = SolverConfig::new(1);
            c.tolerance = Some(1e-6);
            c
        };
        last.feas = 1e-9;
        last.stat_x_max = 0.0;
        assert!(check_limit_feasibility(&[last], &cfg1, 0.05).unwrap().passed);
    }
}
