//! The outer iteration: block sweep, `y` step, multiplier step, bookkeeping.

use std::time::Instant;

use crate::diagnostics::report::{CheckReport, ViolationTracker};
use crate::error::{check_shape, Error, Result};
use crate::linalg::{self, Mat, YSystem};
use crate::problem::{check_blocks, lagrangian_from_parts, BlockVector, DualState, Problem};

use super::block::{update_block, BlockMemory};
use super::config::{validate_config, CheckLevel, DerivedConstants, SolverConfig};
use super::extrapolation::nesterov_t_next;
use super::trace::{RecordDetail, TraceRecord};

/// Iterate `(x^k, y^k, omega^k)` with everything the next iteration needs.
#[derive(Debug, Clone)]
pub struct IterateState {
    pub k: usize,
    pub x: BlockVector,
    /// `x^{k-1}` (equal to `x^0` at `k = 0`).
    pub x_prev: BlockVector,
    pub dual: DualState,
    pub dual_prev: DualState,
    /// `t_{k-1}` and `t_k` of the momentum schedule.
    pub t_prev: f64,
    pub t: f64,
    /// Coefficients of the step that produced `x_i^k`; `None` at `k = 0`.
    pub memory: Vec<Option<BlockMemory>>,
}

impl IterateState {
    pub fn new(x: BlockVector, dual: DualState) -> Self {
        let s = x.len();
        Self {
            k: 0,
            x_prev: x.clone(),
            x,
            dual_prev: dual.clone(),
            dual,
            t_prev: 1.0,
            t: 1.0,
            memory: vec![None; s],
        }
    }
}

/// Starting point. Missing `y` defaults to a feasible `y` for `x` when one
/// exists (zero otherwise); missing `omega` defaults to zero.
#[derive(Debug, Clone)]
pub struct InitialPoint {
    pub x: BlockVector,
    pub y: Option<Mat>,
    pub omega: Option<Mat>,
}

impl InitialPoint {
    pub fn primal(x: BlockVector) -> Self {
        Self {
            x,
            y: None,
            omega: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    IterationBudget,
    TimeBudget,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    pub checks: Vec<CheckReport>,
    pub state: IterateState,
    pub constants: DerivedConstants,
    pub stop_reason: StopReason,
}

impl RunOutput {
    pub fn converged(&self) -> bool {
        self.stop_reason == StopReason::Converged
    }
}

/// `y^{k+1} = (beta B^T B + L_G I)^{-1} (L_G y - grad G(y) - B^T(omega + beta h))`,
/// the minimizer of the linearized `y` subproblem. `h` is `h(x^{k+1})`.
pub fn update_y<P: Problem + ?Sized>(
    p: &P,
    system: &YSystem,
    beta: f64,
    y: &Mat,
    grad_y: &Mat,
    omega: &Mat,
    h: &Mat,
) -> Result<Mat> {
    let rhs = y_rhs(p, beta, y, grad_y, omega, h)?;
    Ok(system.solve(&rhs))
}

fn y_rhs<P: Problem + ?Sized>(p: &P, beta: f64, y: &Mat, grad_y: &Mat, omega: &Mat, h: &Mat) -> Result<Mat> {
    let mut v = omega.clone();
    v.scaled_add(beta, h);
    let mut rhs = y * p.g_lipschitz() - grad_y;
    rhs -= &p.coupling().apply_t(&v)?;
    Ok(rhs)
}

/// `omega^{k+1} = tau1 omega^k + tau2 beta r`, with `r = h(x^{k+1}) + B y^{k+1}`.
pub fn update_multiplier(tau1: f64, tau2: f64, beta: f64, omega: &Mat, residual: &Mat) -> Mat {
    let mut out = omega * tau1;
    out.scaled_add(tau2 * beta, residual);
    out
}

/// Lyapunov value `L^k` of `state` (defined for `k >= 1`):
///
/// ```text
/// L_beta(x^k, y^k, omega^k) - (1 - tau1)/(2 tau2 beta) ||omega^k||^2
///   + sum_i B1 eta_i^{k-1} ||x_i^k - x_i^{k-1}||^2
///   + C1 ||B^T (omega^k - omega^{k-1})||^2 + B2 C3 ||y^k - y^{k-1}||^2
/// ```
pub fn lyapunov_value<P: Problem + ?Sized>(
    p: &P,
    cfg: &SolverConfig,
    consts: &DerivedConstants,
    state: &IterateState,
) -> Result<f64> {
    if state.k == 0 {
        return Err(Error::State("the Lyapunov value needs k >= 1".into()));
    }
    let lag = crate::problem::eval_aug_lagrangian(p, &state.x, &state.dual.y, &state.dual.omega, cfg.beta)?;
    let mut eta = Vec::with_capacity(state.x.len());
    for m in &state.memory {
        eta.push(m.ok_or_else(|| Error::State("missing block memory".into()))?.eta);
    }
    lyapunov_from_parts(p, cfg, consts, lag, state, &eta)
}

fn lyapunov_from_parts<P: Problem + ?Sized>(
    p: &P,
    cfg: &SolverConfig,
    consts: &DerivedConstants,
    lag: f64,
    state: &IterateState,
    eta: &[f64],
) -> Result<f64> {
    let mut v = lag - (1.0 - cfg.tau1) / (2.0 * cfg.tau2 * cfg.beta) * linalg::norm_sq(&state.dual.omega);
    for (i, e) in eta.iter().enumerate() {
        v += cfg.b1 * e * linalg::dist_sq(state.x.block(i), state.x_prev.block(i));
    }
    let domega = &state.dual.omega - &state.dual_prev.omega;
    v += consts.c1 * linalg::norm_sq(&p.coupling().apply_t(&domega)?);
    v += cfg.b2 * consts.c3 * linalg::dist_sq(&state.dual.y, &state.dual_prev.y);
    Ok(v)
}

pub fn run<P: Problem + ?Sized>(p: &P, cfg: &SolverConfig, init: InitialPoint) -> Result<RunOutput> {
    run_with_observer(p, cfg, init, |_, _| {})
}

struct Checks {
    block_optimality: ViolationTracker,
    y_optimality: ViolationTracker,
    multiplier: ViolationTracker,
    block_descent: ViolationTracker,
    y_decrease: ViolationTracker,
    lyapunov: ViolationTracker,
}

impl Checks {
    fn new() -> Self {
        Self {
            block_optimality: ViolationTracker::new("block_subproblem_optimality", 1e-8),
            y_optimality: ViolationTracker::new("y_step_optimality", 1e-10),
            multiplier: ViolationTracker::new("multiplier_identity", 1e-12),
            block_descent: ViolationTracker::new("block_descent", 1e-8),
            y_decrease: ViolationTracker::new("y_sufficient_decrease", 1e-8),
            lyapunov: ViolationTracker::new("lyapunov_monotone", 1e-8),
        }
    }

    fn reports(&self, level: CheckLevel) -> Vec<CheckReport> {
        let mut out = Vec::new();
        if level >= CheckLevel::Cheap {
            out.push(self.block_optimality.report());
            out.push(self.y_optimality.report());
            out.push(self.multiplier.report());
        }
        if level >= CheckLevel::Full {
            out.push(self.block_descent.report());
            out.push(self.y_decrease.report());
            out.push(self.lyapunov.report());
        }
        out
    }
}

fn regularizer_sum<P: Problem + ?Sized>(p: &P, x: &BlockVector) -> f64 {
    let mut total = 0.0;
    for (i, b) in x.blocks().iter().enumerate() {
        let v = p.regularizer_value(i, b);
        if v == f64::INFINITY {
            return f64::INFINITY;
        }
        total += v;
    }
    total
}

/// `L_beta(x, y, omega)` given `B y` and `G(y)`.
fn lagrangian_cached<P: Problem + ?Sized>(p: &P, x: &BlockVector, by: &Mat, g: f64, omega: &Mat, beta: f64) -> f64 {
    let r = p.constraint_value(x) + by;
    let theta = p.smooth_value(x) + regularizer_sum(p, x) + g;
    lagrangian_from_parts(theta, &r, omega, beta)
}

fn relative(excess: f64, reference: f64) -> f64 {
    excess / (1.0 + reference.abs())
}

/// Run the solver, calling `observer` after every recorded iterate.
pub fn run_with_observer<P, O>(p: &P, cfg: &SolverConfig, init: InitialPoint, mut observer: O) -> Result<RunOutput>
where
    P: Problem + ?Sized,
    O: FnMut(&IterateState, &TraceRecord),
{
    let start = Instant::now();
    let consts = validate_config(cfg, p)?;
    check_blocks(p, &init.x)?;
    let coupling = p.coupling();
    let beta = cfg.beta;
    let system = coupling.y_system(beta, p.g_lipschitz())?;
    let s = init.x.len();

    let h0 = p.constraint_value(&init.x);
    check_shape("h(x)", coupling.h_shape(), h0.dim())?;
    let y0 = match init.y {
        Some(y) => y,
        None => coupling
            .feasible_y(&h0)?
            .unwrap_or_else(|| Mat::zeros(coupling.y_shape())),
    };
    check_shape("y", coupling.y_shape(), y0.dim())?;
    let omega0 = init.omega.unwrap_or_else(|| Mat::zeros(coupling.h_shape()));
    check_shape("omega", coupling.h_shape(), omega0.dim())?;

    let mut state = IterateState::new(init.x, DualState { y: y0, omega: omega0 });
    let mut checks = Checks::new();
    let level = cfg.check_level;

    let (mut g_cur, mut grad_cur) = p.g_value_and_grad(&state.dual.y);
    let mut by_cur = coupling.apply(&state.dual.y)?;
    let r0 = &h0 + &by_cur;
    let theta0 = p.smooth_value(&state.x) + regularizer_sum(p, &state.x) + g_cur;
    let mut lag_cur = lagrangian_from_parts(theta0, &r0, &state.dual.omega, beta);

    let mut stat_x0 = Vec::with_capacity(s);
    for i in 0..s {
        let xi = state.x.block(i);
        let v = match p.regularizer_grad(i, xi) {
            Some(mut chi) => {
                if let Some(gf) = p.smooth_grad(i, &state.x) {
                    chi += &gf;
                }
                chi += &p.constraint_jacobian_t(i, &state.x, &state.dual.omega);
                linalg::norm(&chi)
            }
            None => f64::NAN,
        };
        stat_x0.push(v);
    }
    let stat_y0 = linalg::norm(&(&grad_cur + &coupling.apply_t(&state.dual.omega)?));
    let rec0 = TraceRecord {
        k: 0,
        time_s: start.elapsed().as_secs_f64(),
        objective: p.reported_objective(&state.x, &state.dual.y, &h0),
        aug_lagrangian: lag_cur,
        lyapunov: f64::NAN,
        feas: linalg::norm(&r0),
        stat_x_max: stat_x0
            .iter()
            .fold(0.0, |m: f64, &v| if v.is_nan() { f64::NAN } else { m.max(v) }),
        stat_y: stat_y0,
        dx: 0.0,
        dy: 0.0,
        domega: 0.0,
        detail: RecordDetail {
            stat_x: stat_x0,
            omega_norm: Some(linalg::norm(&state.dual.omega)),
            ..RecordDetail::default()
        },
    };
    observer(&state, &rec0);
    let mut trace = vec![rec0];
    let mut lyap_prev = f64::NAN;

    let stop_reason = loop {
        if cfg.budget.max_iters.is_some_and(|n| state.k >= n) {
            break StopReason::IterationBudget;
        }
        if cfg
            .budget
            .max_seconds
            .is_some_and(|t| start.elapsed().as_secs_f64() >= t)
        {
            break StopReason::TimeBudget;
        }
        let k = state.k;
        if k >= 1 {
            state.t_prev = state.t;
            state.t = nesterov_t_next(state.t);
        }

        let mut dual_shift = state.dual.omega.clone();
        dual_shift.scaled_add(beta, &by_cur);

        let mut chi = Vec::with_capacity(s);
        let mut memory = Vec::with_capacity(s);
        let mut detail = RecordDetail {
            alpha: Vec::with_capacity(s),
            eta: Vec::with_capacity(s),
            gamma: Vec::with_capacity(s),
            ..RecordDetail::default()
        };
        let mut new_x_prev = Vec::with_capacity(s);
        for i in 0..s {
            let step = update_block(p, cfg, &state, i, &dual_shift)?;
            if level >= CheckLevel::Cheap {
                if let Some(v) = step.optimality_residual {
                    checks.block_optimality.observe(v, k, Some(i));
                }
            }
            let old = state.x.block(i).clone();
            let dx_prev_sq = linalg::dist_sq(&old, state.x_prev.block(i));
            let dx_new_sq = linalg::dist_sq(&step.x_new, &old);
            state.x.set_block(i, step.x_new);
            if level >= CheckLevel::Full {
                let lag_new = lagrangian_cached(p, &state.x, &by_cur, g_cur, &state.dual.omega, beta);
                let excess = lag_new + step.eta * dx_new_sq - lag_cur - step.gamma * dx_prev_sq;
                checks.block_descent.observe(relative(excess, lag_cur), k, Some(i));
                lag_cur = lag_new;
            }
            detail.alpha.push(step.alpha);
            detail.eta.push(step.eta);
            detail.gamma.push(step.gamma);
            memory.push(Some(BlockMemory {
                lip: step.coefficients.lip,
                eta: step.eta,
                exact: step.coefficients.exact,
            }));
            chi.push(step.chi);
            new_x_prev.push(old);
        }
        // x holds x^{k+1}; the previous blocks move to x_prev only now so that
        // update_block(i) saw x_prev_i = x_i^{k-1}.
        state.x_prev = BlockVector::new(new_x_prev);

        let h1 = p.constraint_value(&state.x);
        let rhs = y_rhs(p, beta, &state.dual.y, &grad_cur, &state.dual.omega, &h1)?;
        let y_new = system.solve(&rhs);
        if y_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite y iterate".into()));
        }
        let by_new = coupling.apply(&y_new)?;
        let r1 = &h1 + &by_new;
        if level >= CheckLevel::Cheap {
            let mut v = state.dual.omega.clone();
            v.scaled_add(beta, &r1);
            let mut res = coupling.apply_t(&v)? + &grad_cur;
            res.scaled_add(p.g_lipschitz(), &(&y_new - &state.dual.y));
            checks
                .y_optimality
                .observe(linalg::norm(&res) / (1.0 + linalg::norm(&rhs)), k, None);
        }
        let omega_new = update_multiplier(cfg.tau1, cfg.tau2, beta, &state.dual.omega, &r1);
        if level >= CheckLevel::Cheap {
            let mut d = &omega_new - &(&state.dual.omega * cfg.tau1);
            d.scaled_add(-cfg.tau2 * beta, &r1);
            checks
                .multiplier
                .observe(linalg::norm(&d) / (1.0 + linalg::norm(&omega_new)), k, None);
        }
        let (g_new, grad_new) = p.g_value_and_grad(&y_new);
        let theta1 = p.smooth_value(&state.x) + regularizer_sum(p, &state.x) + g_new;
        let dy_sq = linalg::dist_sq(&y_new, &state.dual.y);
        if level >= CheckLevel::Full {
            let after = lagrangian_from_parts(theta1, &r1, &state.dual.omega, beta);
            let excess = after + 0.5 * consts.delta * dy_sq - lag_cur;
            checks.y_decrease.observe(relative(excess, lag_cur), k, None);
            detail.lagrangian_before_y = Some(lag_cur);
            detail.lagrangian_after_y = Some(after);
        }

        // Effective multiplier for stationarity: omega^k + beta r^{k+1}.
        let mut omega_eff = state.dual.omega.clone();
        omega_eff.scaled_add(beta, &r1);

        let old_dual = std::mem::replace(
            &mut state.dual,
            DualState {
                y: y_new,
                omega: omega_new,
            },
        );
        state.dual_prev = old_dual;
        state.memory = memory;
        state.k += 1;
        g_cur = g_new;
        grad_cur = grad_new;
        by_cur = by_new;

        let lag_new = lagrangian_from_parts(theta1, &r1, &state.dual.omega, beta);
        lag_cur = lag_new;
        let lyap = lyapunov_from_parts(p, cfg, &consts, lag_new, &state, &detail.eta)?;
        if level >= CheckLevel::Full && state.k >= 2 {
            checks
                .lyapunov
                .observe(relative(lyap - lyap_prev, lyap_prev), state.k, None);
        }
        lyap_prev = lyap;

        let mut stat_x = Vec::with_capacity(s);
        for (i, c) in chi.into_iter().enumerate() {
            let mut g = c;
            if let Some(gf) = p.smooth_grad(i, &state.x) {
                g += &gf;
            }
            g += &p.constraint_jacobian_t(i, &state.x, &omega_eff);
            stat_x.push(linalg::norm(&g));
        }
        let stat_y = linalg::norm(&(&grad_cur + &coupling.apply_t(&omega_eff)?));
        let feas = linalg::norm(&r1);
        let omega_norm = linalg::norm(&state.dual.omega);
        detail.stat_x = stat_x;
        detail.omega_norm = Some(omega_norm);
        let rec = TraceRecord {
            k: state.k,
            time_s: start.elapsed().as_secs_f64(),
            objective: p.reported_objective(&state.x, &state.dual.y, &h1),
            aug_lagrangian: lag_new,
            lyapunov: lyap,
            feas,
            stat_x_max: detail.stat_x.iter().fold(0.0, |m: f64, &v| m.max(v)),
            stat_y,
            dx: state.x.dist_sq(&state.x_prev).sqrt(),
            dy: dy_sq.sqrt(),
            domega: linalg::norm(&(&state.dual.omega - &state.dual_prev.omega)),
            detail,
        };
        observer(&state, &rec);
        let converged = cfg.tolerance.is_some_and(|tol| {
            let slack = (1.0 - cfg.tau1) / (cfg.tau2 * beta) * omega_norm;
            rec.stat_x_max <= tol && rec.stat_y <= tol && rec.feas <= tol + slack
        });
        trace.push(rec);
        if converged {
            break StopReason::Converged;
        }
    };

    Ok(RunOutput {
        trace,
        checks: checks.reports(level),
        state,
        constants: consts,
        stop_reason,
    })
}
