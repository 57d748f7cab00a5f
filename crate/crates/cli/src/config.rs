//! Experiment configuration, read from TOML. Unknown keys are rejected.
//!
//! ```toml
//! name = "desk"
//! rank = 100
//! density = 0.1
//! c = 1.0
//! lambda_d = 0.25
//! lambda_t = 0.25
//! beta = 1.0
//! n_datasets = 5
//! n_inits = 5
//! master_seed = 1
//! gd = true
//! output_dir = "out/desk"          # optional
//!
//! [budget]                         # at least one of the two
//! iterations = 2000
//! seconds = 10.0
//!
//! [[sizes]]
//! m = 200
//! n = 200
//! iterations = 2000                # optional, overrides budget.iterations
//!
//! [[variants]]
//! tau1 = 0.1
//! tau2 = 0.1
//! inertial = true                  # default true
//! b2 = 0.5                         # optional, default 0.5
//! ```

use std::path::{Path, PathBuf};

use iadmmn_core::solver::{Budget, CheckLevel, Extrapolation};
use iadmmn_core::SolverConfig;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub sizes: Vec<SizeConfig>,
    pub rank: usize,
    pub density: f64,
    pub c: f64,
    pub lambda_d: f64,
    pub lambda_t: f64,
    pub beta: f64,
    pub n_datasets: usize,
    pub n_inits: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub gd: bool,
    pub budget: BudgetConfig,
    pub variants: Vec<VariantConfig>,
    /// Not echoed into summaries, so the same experiment written to two
    /// places yields identical summaries.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeConfig {
    pub m: usize,
    pub n: usize,
    /// Iteration budget calibrated for this size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantConfig {
    pub tau1: f64,
    pub tau2: f64,
    #[serde(default = "default_true")]
    pub inertial: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b2: Option<f64>,
}

impl VariantConfig {
    /// `iADMMn(0.1,0.1)` or `ADMMn(0.1,0.1)`.
    pub fn label(&self) -> String {
        let name = if self.inertial { "iADMMn" } else { "ADMMn" };
        format!("{name}({},{})", self.tau1, self.tau2)
    }

    pub fn solver_config(&self, beta: f64, budget: Budget, check_level: CheckLevel) -> SolverConfig {
        let mut cfg = SolverConfig::new(2)
            .with_beta(beta)
            .with_taus(self.tau1, self.tau2)
            .with_budget(budget)
            .with_check_level(check_level)
            .with_extrapolation(if self.inertial {
                Extrapolation::NesterovCapped
            } else {
                Extrapolation::None
            });
        if let Some(b2) = self.b2 {
            cfg.b2 = b2;
        }
        cfg
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml_str(&text)
    }

    /// Structural checks. Solver parameters are validated per dataset by
    /// [`crate::run_experiment`] before any run starts.
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.sizes.is_empty() {
            return bad("at least one size is required".into());
        }
        if self.sizes.iter().any(|s| s.m == 0 || s.n == 0) {
            return bad("sizes must be at least 1x1".into());
        }
        if self.rank == 0 || self.n_datasets == 0 || self.n_inits == 0 {
            return bad("rank, n_datasets and n_inits must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.density) {
            return bad(format!("density must lie in [0, 1], got {}", self.density));
        }
        if self.variants.is_empty() && !self.gd {
            return bad("no algorithm selected".into());
        }
        let b = self.budget;
        if b.iterations.is_none() && b.seconds.is_none() && self.sizes.iter().any(|s| s.iterations.is_none()) {
            return bad("budget needs iterations or seconds".into());
        }
        if b.seconds.is_some_and(|s| !(s > 0.0)) {
            return bad("budget.seconds must be positive".into());
        }
        let mut labels: Vec<String> = self.variants.iter().map(VariantConfig::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return bad("duplicate variant".into());
        }
        Ok(())
    }

    /// Budget shared by every algorithm on `size`.
    pub fn budget_for(&self, size: &SizeConfig) -> Budget {
        Budget {
            max_iters: size.iterations.or(self.budget.iterations),
            max_seconds: self.budget.seconds,
        }
    }
}
