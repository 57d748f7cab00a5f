//! Diagnostics on stored traces.

use std::path::{Path, PathBuf};

use iadmmn_core::diagnostics::{check_descent, check_lower_bound, CheckReport, DescentKind};
use iadmmn_core::solver::parse_trace_csv;
use iadmmn_core::Error;
use serde::Serialize;

use crate::error::{io_err, HarnessError, Result};

#[derive(Debug, Clone, Serialize)]
pub struct TraceCheck {
    pub trace: String,
    pub reports: Vec<CheckReport>,
}

impl TraceCheck {
    /// No check failed; inconclusive checks do not count as failures.
    pub fn ok(&self) -> bool {
        self.reports
            .iter()
            .all(|r| r.passed || r.status == iadmmn_core::diagnostics::CheckStatus::Inconclusive)
    }
}

fn or_inconclusive(name: &str, tol: f64, r: iadmmn_core::Result<CheckReport>) -> Result<CheckReport> {
    match r {
        Ok(r) => Ok(r),
        Err(Error::Schema(msg)) => Ok(CheckReport::inconclusive(name, tol, msg)),
        Err(e) => Err(e.into()),
    }
}

/// Check every trace in `dir/traces`: the Lyapunov column must be
/// nonincreasing within `descent_tol` (relative) and stay above `nu - bound_tol`.
pub fn check_traces(dir: &Path, descent_tol: f64, nu: f64, bound_tol: f64) -> Result<Vec<TraceCheck>> {
    let trace_dir = dir.join("traces");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&trace_dir)
        .map_err(io_err(&trace_dir))?
        .map(|e| e.map(|e| e.path()).map_err(io_err(&trace_dir)))
        .collect::<Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "csv"));
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
        let trace = parse_trace_csv(&text).map_err(|e| HarnessError::Trace {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let reports = vec![
            or_inconclusive(
                "lyapunov_descent",
                descent_tol,
                check_descent(&trace, DescentKind::Lyapunov, descent_tol),
            )?,
            or_inconclusive(
                "lyapunov_lower_bound",
                bound_tol,
                check_lower_bound(&trace, nu, bound_tol),
            )?,
        ];
        out.push(TraceCheck {
            trace: path
                .file_name()
                .and_then(|f| f.to_str())
                .unwrap_or_default()
                .to_string(),
            reports,
        });
    }
    Ok(out)
}
