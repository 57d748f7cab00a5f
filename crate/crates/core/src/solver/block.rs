//! One inertial block step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::problem::{JointProx, LipschitzKind, Problem};

use super::config::{Extrapolation, KappaRule, SolverConfig, UpdateRule};
use super::engine::IterateState;
use super::extrapolation::{extrapolation_weight, nsdp_cap, ratio_cap};

/// Proximal weight and descent coefficients of one block at one iteration.
///
/// With `s = beta` for [`UpdateRule::ConstraintSurrogate`] and `s = 1`
/// otherwise, each step satisfies
///
/// ```text
/// L(x^{k,i}) + eta ||x_i^{k+1} - x_i^k||^2 <= L(x^{k,i-1}) + gamma ||x_i^k - x_i^{k-1}||^2
/// ```
///
/// where in the exact case (`kappa = lip`) `eta = s lip / 2`, `gamma = eta alpha^2`,
/// and otherwise `rho = s (kappa - lip)`, `eta = (1 - nu) rho / 2`,
/// `gamma = (s (lip + kappa) alpha)^2 / (2 nu rho)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockCoefficients {
    pub lip: f64,
    pub kappa: f64,
    pub exact: bool,
    pub scale: f64,
    pub nu: f64,
}

impl BlockCoefficients {
    pub fn rho(&self) -> f64 {
        self.scale * (self.kappa - self.lip)
    }

    pub fn a(&self) -> f64 {
        self.scale * (self.lip + self.kappa)
    }

    pub fn eta(&self) -> f64 {
        if self.exact {
            0.5 * self.scale * self.lip
        } else {
            0.5 * (1.0 - self.nu) * self.rho()
        }
    }

    pub fn gamma(&self, alpha: f64) -> f64 {
        if alpha == 0.0 {
            return 0.0;
        }
        if self.exact {
            0.5 * self.scale * self.lip * alpha * alpha
        } else {
            (self.a() * alpha).powi(2) / (2.0 * self.nu * self.rho())
        }
    }

    /// Largest admissible `alpha` given the previous iteration of this block.
    pub fn cap(&self, b1: f64, prev: &BlockMemory) -> Result<f64> {
        if self.exact && prev.exact {
            ratio_cap(b1, prev.lip, self.lip)
        } else if self.exact {
            // gamma = (s lip / 2) alpha^2 <= B1 eta_prev
            Ok((2.0 * b1 * prev.eta.max(0.0) / (self.scale * self.lip)).sqrt())
        } else {
            nsdp_cap(b1, self.nu, self.rho(), self.a(), prev.eta)
        }
    }
}

/// What the next iteration needs to know about the last step of a block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockMemory {
    pub lip: f64,
    pub eta: f64,
    pub exact: bool,
}

/// Coefficients of block `i` at the partially updated point `x^{k,i-1}`.
pub fn block_coefficients<P: Problem + ?Sized>(
    p: &P,
    cfg: &SolverConfig,
    i: usize,
    x: &crate::problem::BlockVector,
) -> Result<BlockCoefficients> {
    let params = cfg.blocks[i];
    let lip = match params.rule {
        UpdateRule::ConstraintSurrogate => p.block_lipschitz(i, x, LipschitzKind::ConstraintSquare),
        UpdateRule::CombinedSurrogate => {
            smooth_lip(p, i, x) + cfg.beta * p.block_lipschitz(i, x, LipschitzKind::ConstraintSquare)
        }
        UpdateRule::ExactConstraint => smooth_lip(p, i, x),
    };
    if !(lip > 0.0) || !lip.is_finite() {
        return Err(Error::Config(format!(
            "block {i}: Lipschitz constant must be positive and finite, got {lip}"
        )));
    }
    let exact = match params.kappa {
        KappaRule::Auto => p.block_structure(i).admits_exact_kappa(),
        KappaRule::Exact => true,
        KappaRule::Inflated(_) => false,
    };
    let factor = match params.kappa {
        KappaRule::Inflated(f) => f,
        _ => cfg.default_kappa_factor,
    };
    let scale = match params.rule {
        UpdateRule::ConstraintSurrogate => cfg.beta,
        _ => 1.0,
    };
    Ok(BlockCoefficients {
        lip,
        kappa: if exact { lip } else { factor * lip },
        exact,
        scale,
        nu: params.nu,
    })
}

fn smooth_lip<P: Problem + ?Sized>(p: &P, i: usize, x: &crate::problem::BlockVector) -> f64 {
    if p.smooth_grad(i, x).is_some() {
        p.block_lipschitz(i, x, LipschitzKind::Smooth)
    } else {
        0.0
    }
}

/// `beta h(x_bar)`, plus `D` when `h` is affine in the block: then `<h(u), D>`
/// is linear in `u` and joins the linearized terms.
fn penalty_direction<P: Problem + ?Sized>(
    p: &P,
    x_bar: &crate::problem::BlockVector,
    beta: f64,
    affine: bool,
    dual_shift: &Mat,
) -> Mat {
    let mut v = p.constraint_value(x_bar) * beta;
    if affine {
        v += dual_shift;
    }
    v
}

/// Result of [`update_block`].
#[derive(Debug, Clone)]
pub struct BlockStep {
    pub x_new: Mat,
    /// Element of `partial f_i(x_new)` read off the subproblem optimality condition.
    pub chi: Mat,
    pub alpha: f64,
    pub coefficients: BlockCoefficients,
    pub eta: f64,
    pub gamma: f64,
    /// Relative violation of the subproblem optimality condition, when `f_i`
    /// exposes a gradient.
    pub optimality_residual: Option<f64>,
}

/// Update block `i` from `state`, whose blocks `< i` already hold their new values.
///
/// `dual_shift` is `omega^k + beta B y^k`.
pub fn update_block<P: Problem + ?Sized>(
    p: &P,
    cfg: &SolverConfig,
    state: &IterateState,
    i: usize,
    dual_shift: &Mat,
) -> Result<BlockStep> {
    let x = &state.x;
    let xi = x.block(i);
    let coef = block_coefficients(p, cfg, i, x)?;

    let alpha = match (cfg.extrapolation, &state.memory[i]) {
        (Extrapolation::NesterovCapped, Some(prev)) if state.k > 0 => {
            let cap = coef.cap(cfg.b1, prev)?;
            extrapolation_weight(state.k, state.t_prev, state.t, cap)
        }
        _ => 0.0,
    };
    let xbar = if alpha == 0.0 {
        xi.clone()
    } else {
        linalg::axpy(xi, alpha, &(xi - state.x_prev.block(i)))
    };
    let x_bar_full = x.with_block(i, xbar.clone());
    let beta = cfg.beta;
    let affine = p.block_structure(i).affine_constraint;

    // Every rule reduces to
    //   min f_i(u) + [<h(u), D> + (hw/2)||h(u)||^2 if exact_h] + <linear, u> + (w/2)||u - center||^2
    let (linear, weight, center, exact_h) = match cfg.blocks[i].rule {
        UpdateRule::ConstraintSurrogate => {
            let mut lin = p.constraint_jacobian_t(
                i,
                &x_bar_full,
                &penalty_direction(p, &x_bar_full, beta, affine, dual_shift),
            );
            let bk = beta * coef.kappa;
            let (lf, center) = match p.smooth_grad(i, x) {
                Some(gf) => {
                    let lf = p.block_lipschitz(i, x, LipschitzKind::Smooth);
                    lin += &gf;
                    let w = lf + bk;
                    (lf, (xi * lf + &xbar * bk) / w)
                }
                None => (0.0, xbar.clone()),
            };
            (lin, lf + bk, center, !affine)
        }
        UpdateRule::CombinedSurrogate => {
            let mut lin = p.constraint_jacobian_t(
                i,
                &x_bar_full,
                &penalty_direction(p, &x_bar_full, beta, affine, dual_shift),
            );
            if let Some(gf) = p.smooth_grad(i, &x_bar_full) {
                lin += &gf;
            }
            (lin, coef.kappa, xbar.clone(), !affine)
        }
        UpdateRule::ExactConstraint => {
            let lin = p.smooth_grad(i, &x_bar_full).unwrap_or_else(|| Mat::zeros(xi.dim()));
            (lin, coef.kappa, xbar.clone(), true)
        }
    };
    if !(weight > 0.0) {
        return Err(Error::Numeric(format!(
            "block {i}: proximal weight {weight} is not positive"
        )));
    }
    let h_weight = match cfg.blocks[i].rule {
        UpdateRule::ExactConstraint => beta,
        _ => 0.0,
    };

    let (x_new, chi) = if exact_h {
        let sub = JointProx {
            dual_shift,
            h_weight,
            linear: &linear,
            weight,
            center: &center,
        };
        let x_new = p
            .joint_prox(i, x, &sub)
            .ok_or_else(|| Error::Oracle(format!("block {i}: update rule needs a joint proximal oracle")))??;
        let x_full = x.with_block(i, x_new.clone());
        let h_new = p.constraint_value(&x_full);
        let mut v = dual_shift.clone();
        if h_weight != 0.0 {
            v.scaled_add(h_weight, &h_new);
        }
        let mut chi = p.constraint_jacobian_t(i, &x_full, &v);
        chi += &linear;
        chi.scaled_add(weight, &(&x_new - &center));
        (x_new, -chi)
    } else {
        let shifted = linalg::axpy(&center, -1.0 / weight, &linear);
        let x_new = p.regularizer_prox(i, &shifted, weight)?;
        let chi = (&shifted - &x_new) * weight;
        (x_new, chi)
    };
    if x_new.dim() != xi.dim() {
        return Err(Error::Dimension {
            context: format!("prox output of block {i}"),
            expected: xi.dim(),
            actual: x_new.dim(),
        });
    }
    if x_new.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("block {i}: non-finite iterate")));
    }

    let optimality_residual = p.regularizer_grad(i, &x_new).map(|g| {
        let scale = 1.0 + weight * (linalg::norm(&x_new) + linalg::norm(&center)) + linalg::norm(&chi);
        linalg::norm(&(g - &chi)) / scale
    });

    Ok(BlockStep {
        x_new,
        chi,
        alpha,
        coefficients: coef,
        eta: coef.eta(),
        gamma: coef.gamma(alpha),
        optimality_residual,
    })
}
