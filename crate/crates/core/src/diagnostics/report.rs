use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The check could not be evaluated, e.g. a convergence bound on a run
    /// that did not converge.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub iteration: Option<usize>,
    pub block: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub status: CheckStatus,
    pub worst_violation: Option<f64>,
    pub location: Location,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn inconclusive(name: &str, tolerance: f64, note: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: false,
            status: CheckStatus::Inconclusive,
            worst_violation: None,
            location: Location::default(),
            tolerance,
            note: Some(note.into()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Running maximum of a violation measure.
#[derive(Debug, Clone)]
pub struct ViolationTracker {
    name: String,
    tolerance: f64,
    worst: Option<f64>,
    location: Location,
}

impl ViolationTracker {
    pub fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            tolerance,
            worst: None,
            location: Location::default(),
        }
    }

    /// Record a violation (`<= 0` means satisfied). `NaN` counts as a violation.
    pub fn observe(&mut self, violation: f64, iteration: usize, block: Option<usize>) {
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        if self.worst.is_none_or(|w| v > w) {
            self.worst = Some(v);
            self.location = Location {
                iteration: Some(iteration),
                block,
            };
        }
    }

    pub fn report(&self) -> CheckReport {
        let worst = self.worst.map(|w| w.max(0.0));
        let passed = worst.is_none_or(|w| w <= self.tolerance);
        CheckReport {
            name: self.name.clone(),
            passed,
            status: if passed { CheckStatus::Pass } else { CheckStatus::Fail },
            worst_violation: worst,
            location: self.location,
            tolerance: self.tolerance,
            note: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracker_keeps_the_worst_location() {
        let mut t = ViolationTracker::new("x", 1e-3);
        t.observe(-1.0, 0, None);
        t.observe(5e-4, 3, Some(1));
        t.observe(1e-4, 4, Some(0));
        let r = t.report();
        assert!(r.passed);
        assert_eq!(r.worst_violation, Some(5e-4));
        assert_eq!(
            r.location,
            Location {
                iteration: Some(3),
                block: Some(1)
            }
        );
        t.observe(f64::NAN, 9, None);
        assert!(!t.report().passed);
    }

    #[test]
    fn json_round_trip() {
        let r = CheckReport::inconclusive("limit_feasibility", 1e-6, "not converged");
        let back: CheckReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
