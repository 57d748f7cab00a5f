use serde::{Deserialize, Serialize};

use crate::error::ValidationError;
use crate::problem::Problem;

/// How block `x_i` is updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateRule {
    /// Lipschitz surrogate of `(1/2)||h||^2` in the block, `F` through its own
    /// block surrogate, `<h, omega + beta B y>` kept exact. Needs `l_i`.
    #[serde(alias = "A")]
    ConstraintSurrogate,
    /// Lipschitz surrogate of `F + (beta/2)||h||^2` with constant `L_i + beta l_i`.
    #[serde(alias = "B")]
    CombinedSurrogate,
    /// `(beta/2)||h||^2` kept exact, only `F` linearized. Needs a joint
    /// proximal oracle but no `l_i`.
    #[serde(alias = "C")]
    ExactConstraint,
}

/// Choice of the proximal weight `kappa_i^k` relative to the block Lipschitz constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KappaRule {
    /// `Exact` when the block structure admits it, otherwise `Inflated` with
    /// [`SolverConfig::default_kappa_factor`].
    Auto,
    /// `kappa = lip`; only valid for affine-constraint, convex blocks.
    Exact,
    /// `kappa = factor * lip` with `factor > 1`.
    Inflated(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockParams {
    pub rule: UpdateRule,
    pub kappa: KappaRule,
    /// Split constant of the nearly-sufficient-decrease bound, in (0, 1).
    pub nu: f64,
}

impl Default for BlockParams {
    fn default() -> Self {
        Self {
            rule: UpdateRule::ConstraintSurrogate,
            kappa: KappaRule::Auto,
            nu: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extrapolation {
    None,
    /// `alpha = min{(t_{k-1} - 1)/t_k, cap}` where the cap keeps `gamma^k <= B1 eta^{k-1}`.
    NesterovCapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub max_iters: Option<usize>,
    pub max_seconds: Option<f64>,
}

impl Budget {
    pub fn iterations(n: usize) -> Self {
        Self {
            max_iters: Some(n),
            max_seconds: None,
        }
    }

    pub fn seconds(s: f64) -> Self {
        Self {
            max_iters: None,
            max_seconds: Some(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckLevel {
    Off,
    /// Subproblem optimality, `y`-step optimality and the multiplier identity.
    Cheap,
    /// Also the per-block descent inequality and the `y` sufficient decrease,
    /// which need extra Lagrangian evaluations.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub beta: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub b1: f64,
    pub b2: f64,
    pub blocks: Vec<BlockParams>,
    /// Factor used by [`KappaRule::Auto`] for blocks that need `kappa > lip`.
    pub default_kappa_factor: f64,
    pub extrapolation: Extrapolation,
    pub budget: Budget,
    /// Stop once the stationarity measures drop below this value.
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub check_level: CheckLevel,
}

impl SolverConfig {
    /// Defaults for a problem with `s` blocks.
    pub fn new(s: usize) -> Self {
        Self {
            beta: 1.0,
            tau1: 1.0,
            tau2: 1.0,
            b1: 0.9999,
            b2: 0.5,
            blocks: vec![BlockParams::default(); s],
            default_kappa_factor: 1.01,
            extrapolation: Extrapolation::NesterovCapped,
            budget: Budget::iterations(1000),
            tolerance: None,
            seed: 0,
            check_level: CheckLevel::Off,
        }
    }

    pub fn with_taus(mut self, tau1: f64, tau2: f64) -> Self {
        self.tau1 = tau1;
        self.tau2 = tau2;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_rule(mut self, rule: UpdateRule) -> Self {
        for b in &mut self.blocks {
            b.rule = rule;
        }
        self
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_extrapolation(mut self, e: Extrapolation) -> Self {
        self.extrapolation = e;
        self
    }

    pub fn with_check_level(mut self, c: CheckLevel) -> Self {
        self.check_level = c;
        self
    }
}

/// Constants derived from a validated configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Sufficient-decrease modulus of the `y` step: `L_G + beta lambda_min(B^T B)`.
    pub delta: f64,
    pub sigma_b: f64,
    pub lambda_min_btb: f64,
    pub lg: f64,
}

/// Check every scalar parameter condition and compute `C1`, `C2`, `C3`, `delta`.
pub fn validate_config<P: Problem + ?Sized>(cfg: &SolverConfig, p: &P) -> Result<DerivedConstants, ValidationError> {
    let (beta, tau1, tau2) = (cfg.beta, cfg.tau1, cfg.tau2);
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(ValidationError::NonPositiveBeta(beta));
    }
    if !(tau1 > 0.0 && tau1 <= 1.0) {
        return Err(ValidationError::Tau1OutOfRange(tau1));
    }
    let ratio = tau2 / tau1;
    if !(ratio > 0.0 && ratio < 2.0) {
        return Err(ValidationError::TauRatioOutOfRange(ratio));
    }
    let gap = (tau1 - tau2).abs();
    if !(gap < 1.0) {
        return Err(ValidationError::TauGapTooLarge(gap));
    }
    if !(cfg.b1 > 0.0 && cfg.b1 < 1.0) {
        return Err(ValidationError::B1OutOfRange(cfg.b1));
    }
    if !(cfg.b2 > 0.0 && cfg.b2 < 1.0) {
        return Err(ValidationError::B2OutOfRange(cfg.b2));
    }
    let s = p.block_shapes().len();
    if cfg.blocks.len() != s {
        return Err(ValidationError::BlockCountMismatch {
            configured: cfg.blocks.len(),
            expected: s,
        });
    }
    for (i, b) in cfg.blocks.iter().enumerate() {
        if !(b.nu > 0.0 && b.nu < 1.0) {
            return Err(ValidationError::NuOutOfRange { block: i, value: b.nu });
        }
        match b.kappa {
            KappaRule::Inflated(f) if !(f > 1.0) => {
                return Err(ValidationError::KappaFactorTooSmall { block: i, value: f })
            }
            KappaRule::Exact if !p.block_structure(i).admits_exact_kappa() => {
                return Err(ValidationError::ExactKappaNotAdmissible { block: i })
            }
            KappaRule::Auto if !(cfg.default_kappa_factor > 1.0) => {
                return Err(ValidationError::KappaFactorTooSmall {
                    block: i,
                    value: cfg.default_kappa_factor,
                })
            }
            _ => {}
        }
    }
    if cfg.budget.max_iters.is_none() && cfg.budget.max_seconds.is_none() {
        return Err(ValidationError::EmptyBudget);
    }
    if let Some(t) = cfg.tolerance {
        if !(t >= 0.0) {
            return Err(ValidationError::NegativeTolerance(t));
        }
    }

    let coupling = p.coupling();
    let sigma_b = coupling.lambda_min_bbt();
    if !(sigma_b > 0.0) {
        return Err(ValidationError::NonPositiveSigmaB(sigma_b));
    }
    let lg = p.g_lipschitz();
    if !(lg >= 0.0) {
        return Err(ValidationError::NegativeLipschitzG(lg));
    }
    let lambda_min_btb = coupling.lambda_min_btb().max(0.0);
    if lg == 0.0 && lambda_min_btb <= 0.0 {
        return Err(ValidationError::SingularYSystem);
    }

    let c = constants(beta, tau1, tau2, sigma_b, lambda_min_btb, lg);
    if !(c.c3 > 0.0) {
        return Err(ValidationError::NonPositiveC3(c.c3));
    }
    let lhs = 8.0 * c.c2 * lg * lg;
    let rhs = cfg.b2 * c.c3;
    if lhs > rhs {
        return Err(ValidationError::DualCouplingCondition { lhs, rhs });
    }
    Ok(c)
}

fn constants(beta: f64, tau1: f64, tau2: f64, sigma_b: f64, lambda_min_btb: f64, lg: f64) -> DerivedConstants {
    let gap = (tau1 - tau2).abs();
    let ratio = tau2 / tau1;
    let c1 = (tau1 + 1.0) * gap / (2.0 * sigma_b * tau2 * beta * (1.0 - gap));
    let c2 = (tau1 + 1.0) * ratio / (2.0 * sigma_b * beta * (1.0 - gap) * (1.0 - (1.0 - ratio).abs()));
    let delta = lg + beta * lambda_min_btb;
    let c3 = delta / 2.0 - 2.0 * c2 * lg * lg;
    DerivedConstants {
        c1,
        c2,
        c3,
        delta,
        sigma_b,
        lambda_min_btb,
        lg,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::toy::QuadToy;
    use ndarray::array;

    fn toy(g: f64) -> QuadToy {
        QuadToy::new(1.0, &[0.0], array![[1.0]], g, &[0.0])
    }

    #[test]
    fn equal_taus_are_valid_with_zero_c1() {
        let c = validate_config(&SolverConfig::new(1), &toy(0.0)).unwrap();
        assert_eq!(c.c1, 0.0);
        assert_eq!(c.delta, 1.0);
        let c = validate_config(&SolverConfig::new(1).with_taus(0.5, 0.5), &toy(0.0)).unwrap();
        assert_eq!(c.c1, 0.0);
    }

    #[test]
    fn named_tau_violations() {
        let p = toy(0.0);
        assert!(matches!(
            validate_config(&SolverConfig::new(1).with_taus(1.0, 2.1), &p),
            Err(ValidationError::TauRatioOutOfRange(_))
        ));
        assert!(matches!(
            validate_config(&SolverConfig::new(1).with_taus(1.5, 1.0), &p),
            Err(ValidationError::Tau1OutOfRange(_))
        ));
        assert!(matches!(
            validate_config(&SolverConfig::new(1).with_taus(0.5, 0.0), &p),
            Err(ValidationError::TauRatioOutOfRange(_))
        ));
    }

    #[test]
    fn other_named_violations() {
        let p = toy(0.0);
        let mut cfg = SolverConfig::new(1);
        cfg.b1 = 1.0;
        assert!(matches!(
            validate_config(&cfg, &p),
            Err(ValidationError::B1OutOfRange(_))
        ));
        let mut cfg = SolverConfig::new(1);
        cfg.b2 = 0.0;
        assert!(matches!(
            validate_config(&cfg, &p),
            Err(ValidationError::B2OutOfRange(_))
        ));
        let mut cfg = SolverConfig::new(1);
        cfg.blocks[0].nu = 1.0;
        assert!(matches!(
            validate_config(&cfg, &p),
            Err(ValidationError::NuOutOfRange { .. })
        ));
        let mut cfg = SolverConfig::new(1);
        cfg.blocks[0].kappa = KappaRule::Inflated(1.0);
        assert!(matches!(
            validate_config(&cfg, &p),
            Err(ValidationError::KappaFactorTooSmall { .. })
        ));
        assert!(matches!(
            validate_config(&SolverConfig::new(2), &p),
            Err(ValidationError::BlockCountMismatch { .. })
        ));
        assert!(matches!(
            validate_config(&SolverConfig::new(1).with_beta(0.0), &p),
            Err(ValidationError::NonPositiveBeta(_))
        ));
        let mut cfg = SolverConfig::new(1);
        cfg.budget = Budget {
            max_iters: None,
            max_seconds: None,
        };
        assert!(matches!(validate_config(&cfg, &p), Err(ValidationError::EmptyBudget)));
    }

    #[test]
    fn constants_match_hand_values() {
        // beta = 1, sigma_B = 1, lambda_min(B^T B) = 1, L_G = 1/4, tau = (0.1, 0.1)
        let c = constants(1.0, 0.1, 0.1, 1.0, 1.0, 0.25);
        assert!((c.c2 - 0.55).abs() < 1e-15);
        assert!((c.delta - 1.25).abs() < 1e-15);
        assert!((c.c3 - 0.55625).abs() < 1e-15);
        // tau = (1, 0.5): gap 0.5, ratio 0.5
        let c = constants(2.0, 1.0, 0.5, 1.0, 1.0, 0.0);
        assert!((c.c1 - 2.0 * 0.5 / (2.0 * 0.5 * 2.0 * 0.5)).abs() < 1e-15);
        assert!((c.c2 - 2.0 * 0.5 / (2.0 * 2.0 * 0.5 * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn dual_coupling_condition_rejects_large_lg() {
        // L_G = 1, beta = 1: C2 = 1, C3 = 1 - 2 = -1
        assert!(matches!(
            validate_config(&SolverConfig::new(1), &toy(1.0)),
            Err(ValidationError::NonPositiveC3(_))
        ));
        // beta = 10: C2 = 0.1, C3 = 5.5 - 0.2 = 5.3, 8 C2 = 0.8 <= 0.5 * 5.3
        assert!(validate_config(&SolverConfig::new(1).with_beta(10.0), &toy(1.0)).is_ok());
        let mut cfg = SolverConfig::new(1).with_beta(10.0);
        cfg.b2 = 0.1;
        assert!(matches!(
            validate_config(&cfg, &toy(1.0)),
            Err(ValidationError::DualCouplingCondition { .. })
        ));
    }
}
