//! Closed-form steps of the split log-MF problem and the gradient baseline.

use crate::error::{Error, Result};
use crate::linalg::{gram_norm, Mat};

use super::model::LogMfInstance;

/// `U+ = (beta ||VV^T|| U_ex - omega V^T - beta (U_ex V - W) V^T) / (beta ||VV^T|| + lambda_d)`
pub fn update_u(u_ex: &Mat, v: &Mat, w: &Mat, omega: &Mat, beta: f64, lambda_d: f64) -> Result<Mat> {
    let l = gram_norm(v);
    let denom = beta * l + lambda_d;
    if !(denom > 0.0) {
        return Err(Error::Numeric("U step: beta ||VV^T|| + lambda_d is zero".into()));
    }
    let mut resid = u_ex.dot(v) - w;
    resid *= beta;
    resid += omega;
    let mut out = u_ex * (beta * l);
    out -= &resid.dot(&v.t());
    Ok(out / denom)
}

/// `V+ = (beta ||U^T U|| V_ex - U^T omega - beta U^T (U V_ex - W)) / (beta ||U^T U|| + lambda_t)`
pub fn update_v(u: &Mat, v_ex: &Mat, w: &Mat, omega: &Mat, beta: f64, lambda_t: f64) -> Result<Mat> {
    let l = gram_norm(u);
    let denom = beta * l + lambda_t;
    if !(denom > 0.0) {
        return Err(Error::Numeric("V step: beta ||U^T U|| + lambda_t is zero".into()));
    }
    let mut resid = u.dot(v_ex) - w;
    resid *= beta;
    resid += omega;
    let mut out = v_ex * (beta * l);
    out -= &u.t().dot(&resid);
    Ok(out / denom)
}

/// `W+ = (L_G W - grad G(W) + omega + beta U V) / (beta + L_G)`
pub fn update_w(inst: &LogMfInstance, uv: &Mat, w: &Mat, omega: &Mat, beta: f64) -> Result<Mat> {
    let lg = inst.lipschitz_g();
    let denom = beta + lg;
    if !(denom > 0.0) {
        return Err(Error::Numeric("W step: beta + L_G is not positive".into()));
    }
    let mut out = w * lg - &inst.g_grad(w)?;
    out += omega;
    out.scaled_add(beta, uv);
    Ok(out / denom)
}

/// One alternating gradient step on the unconstrained objective with steps
/// `1/(L_G ||VV^T|| + lambda_d)` for `U`, then `1/(L_G ||U+^T U+|| + lambda_t)` for `V`.
pub fn gd_baseline_step(inst: &LogMfInstance, u: &Mat, v: &Mat) -> Result<(Mat, Mat)> {
    let lg = inst.lipschitz_g();
    let su = lg * gram_norm(v) + inst.lambda_d;
    if !(su > 0.0) {
        return Err(Error::Numeric("GD step: U block Lipschitz constant is zero".into()));
    }
    let g = inst.g_grad(&u.dot(v))?;
    let mut gu = g.dot(&v.t());
    gu.scaled_add(inst.lambda_d, u);
    let u_new = u - &(gu / su);

    let sv = lg * gram_norm(&u_new) + inst.lambda_t;
    if !(sv > 0.0) {
        return Err(Error::Numeric("GD step: V block Lipschitz constant is zero".into()));
    }
    let g = inst.g_grad(&u_new.dot(v))?;
    let mut gv = u_new.t().dot(&g);
    gv.scaled_add(inst.lambda_t, v);
    let v_new = v - &(gv / sv);
    Ok((u_new, v_new))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::SparseBinary;
    use crate::linalg::{dist_sq, norm};
    use crate::rng::{rng_from_seed, uniform01};
    use ndarray::array;

    fn random(shape: (usize, usize), seed: u64) -> Mat {
        let mut r = rng_from_seed(seed);
        Mat::from_shape_simple_fn(shape, || 4.0 * uniform01(&mut r) - 2.0)
    }

    #[test]
    fn scalar_u_and_v_steps() {
        let one = array![[1.0]];
        let zero = array![[0.0]];
        let u = update_u(&zero, &one, &zero, &one, 1.0, 1.0).unwrap();
        assert!((u[[0, 0]] + 0.5).abs() < 1e-15);
        let v = update_v(&one, &zero, &zero, &one, 1.0, 1.0).unwrap();
        assert!((v[[0, 0]] + 0.5).abs() < 1e-15);
        assert!(update_u(&zero, &zero, &zero, &one, 1.0, 0.0).is_err());
    }

    #[test]
    fn consistent_residual_only_shrinks() {
        let u_ex = random((3, 2), 1);
        let v = random((2, 4), 2);
        let w = u_ex.dot(&v);
        let omega = Mat::zeros((3, 4));
        let u = update_u(&u_ex, &v, &w, &omega, 2.0, 0.5).unwrap();
        let l = gram_norm(&v);
        let expected = &u_ex * (2.0 * l / (2.0 * l + 0.5));
        assert!(dist_sq(&u, &expected).sqrt() < 1e-14);

        let v_ex = random((2, 4), 3);
        let w = u_ex.dot(&v_ex);
        let v = update_v(&u_ex, &v_ex, &w, &omega, 2.0, 0.5).unwrap();
        let l = gram_norm(&u_ex);
        let expected = &v_ex * (2.0 * l / (2.0 * l + 0.5));
        assert!(dist_sq(&v, &expected).sqrt() < 1e-14);
    }

    #[test]
    fn u_step_zeroes_its_subproblem_gradient() {
        // gradient of lambda_d/2 ||U||^2 + <omega + beta(U_ex V - W), U V> + beta l/2 ||U - U_ex||^2
        let (u_ex, v, w, omega) = (
            random((3, 2), 4),
            random((2, 3), 5),
            random((3, 3), 6),
            random((3, 3), 7),
        );
        let (beta, lam) = (1.5, 0.25);
        let u = update_u(&u_ex, &v, &w, &omega, beta, lam).unwrap();
        let l = gram_norm(&v);
        let resid = (u_ex.dot(&v) - &w) * beta + &omega;
        let grad = &u * lam + &resid.dot(&v.t()) + &((&u - &u_ex) * (beta * l));
        assert!(norm(&grad) <= 1e-9 * (1.0 + norm(&u)));
    }

    #[test]
    fn w_step_hand_value() {
        let inst = LogMfInstance::new(SparseBinary::new(1, 1, vec![]).unwrap(), 1, 1.0, 0.0, 0.0).unwrap();
        let z = array![[0.0]];
        let w = update_w(&inst, &z, &z, &z, 1.0).unwrap();
        assert!((w[[0, 0]] + 0.4).abs() < 1e-15);
    }

    #[test]
    fn w_step_satisfies_its_optimality_condition() {
        let inst = LogMfInstance::new(SparseBinary::new(2, 2, vec![(0, 1)]).unwrap(), 1, 2.0, 0.0, 0.0).unwrap();
        let (uv, w, omega) = (random((2, 2), 8), random((2, 2), 9), random((2, 2), 10));
        let beta = 1.7;
        let w1 = update_w(&inst, &uv, &w, &omega, beta).unwrap();
        // -(omega + beta(UV - W+)) + grad G(W) + L_G (W+ - W) = 0
        let res = -(&omega + &((&uv - &w1) * beta)) + &inst.g_grad(&w).unwrap() + &((&w1 - &w) * inst.lipschitz_g());
        assert!(norm(&res) < 1e-12);
    }

    #[test]
    fn gd_step_hand_value_and_fixed_point() {
        let inst = LogMfInstance::new(SparseBinary::new(1, 1, vec![]).unwrap(), 1, 1.0, 0.25, 0.25).unwrap();
        let (u, _) = gd_baseline_step(&inst, &array![[1.0]], &array![[1.0]]).unwrap();
        let s1 = 1.0 / (1.0 + (-1.0f64).exp());
        assert!((u[[0, 0]] - (1.0 - 2.0 * (s1 + 0.25))).abs() < 1e-15);
        assert!((u[[0, 0]] + 0.9622).abs() < 1e-4);
    }

    #[test]
    fn gd_step_decreases_the_objective() {
        let y = SparseBinary::new(4, 5, vec![(0, 0), (1, 3), (3, 4), (2, 2)]).unwrap();
        let inst = LogMfInstance::new(y, 3, 1.0, 0.25, 0.25).unwrap();
        for seed in 0..20 {
            let u = random((4, 3), 100 + seed);
            let v = random((3, 5), 200 + seed);
            let (u1, v1) = gd_baseline_step(&inst, &u, &v).unwrap();
            assert!(inst.objective(&u1, &v1).unwrap() < inst.objective(&u, &v).unwrap());
        }
    }
}
