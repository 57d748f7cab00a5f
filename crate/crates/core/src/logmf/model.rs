use ndarray::Zip;

use crate::error::{check_shape, Error, Result};
use crate::formats::SparseBinary;
use crate::linalg::{self, Mat};

/// `log(1 + exp(w))` without overflow.
pub fn softplus(w: f64) -> f64 {
    w.max(0.0) + (-w.abs()).exp().ln_1p()
}

/// Logistic function `1 / (1 + exp(-w))` without overflow.
pub fn sigmoid(w: f64) -> f64 {
    let e = (-w.abs()).exp();
    if w >= 0.0 {
        1.0 / (1.0 + e)
    } else {
        e / (1.0 + e)
    }
}

/// Logistic matrix factorization data and weights.
///
/// ```text
/// min_{U,V}  sum_ij (1 + c y_ij - y_ij) log(1 + exp(u_i v_j)) - c y_ij u_i v_j
///            + (lambda_d/2)||U||^2 + (lambda_t/2)||V||^2
/// ```
///
/// solved in the split form `min F(U, V) + G(W)` subject to `UV - W = 0`.
#[derive(Debug, Clone)]
pub struct LogMfInstance {
    y: SparseBinary,
    /// `1 + c y - y`
    weight: Mat,
    /// `c y`
    linear: Mat,
    pub r: usize,
    pub c: f64,
    pub lambda_d: f64,
    pub lambda_t: f64,
}

impl LogMfInstance {
    pub fn new(y: SparseBinary, r: usize, c: f64, lambda_d: f64, lambda_t: f64) -> Result<Self> {
        if y.rows() == 0 || y.cols() == 0 || r == 0 {
            return Err(Error::Domain(format!(
                "log-MF needs m, n, r >= 1, got {}x{} with r = {r}",
                y.rows(),
                y.cols()
            )));
        }
        if !(c >= 0.0) {
            return Err(Error::Domain(format!("c must be nonnegative, got {c}")));
        }
        if !(lambda_d >= 0.0 && lambda_t >= 0.0) {
            return Err(Error::Domain(format!(
                "regularization weights must be nonnegative, got {lambda_d} and {lambda_t}"
            )));
        }
        let dense = y.to_dense();
        let weight = dense.mapv(|v| 1.0 + c * v - v);
        let linear = dense.mapv(|v| c * v);
        Ok(Self {
            y,
            weight,
            linear,
            r,
            c,
            lambda_d,
            lambda_t,
        })
    }

    pub fn data(&self) -> &SparseBinary {
        &self.y
    }

    pub fn m(&self) -> usize {
        self.y.rows()
    }

    pub fn n(&self) -> usize {
        self.y.cols()
    }

    fn check_w(&self, w: &Mat) -> Result<()> {
        check_shape("W", (self.m(), self.n()), w.dim())
    }

    /// `G(W)`
    pub fn g_value(&self, w: &Mat) -> Result<f64> {
        self.check_w(w)?;
        Ok(Zip::from(w)
            .and(&self.weight)
            .and(&self.linear)
            .fold(0.0, |acc, &w, &a, &b| acc + a * softplus(w) - b * w))
    }

    /// `(1 + c y - y) sigma(W) - c y`
    pub fn g_grad(&self, w: &Mat) -> Result<Mat> {
        self.check_w(w)?;
        Ok(Zip::from(w)
            .and(&self.weight)
            .and(&self.linear)
            .map_collect(|&w, &a, &b| a * sigmoid(w) - b))
    }

    /// `G(W)` and its gradient sharing one exponential per entry.
    pub fn g_value_and_grad(&self, w: &Mat) -> Result<(f64, Mat)> {
        self.check_w(w)?;
        let mut value = 0.0;
        let grad = Zip::from(w)
            .and(&self.weight)
            .and(&self.linear)
            .map_collect(|&w, &a, &b| {
                let e = (-w.abs()).exp();
                value += a * (w.max(0.0) + e.ln_1p()) - b * w;
                let s = if w >= 0.0 { 1.0 / (1.0 + e) } else { e / (1.0 + e) };
                a * s - b
            });
        Ok((value, grad))
    }

    /// `L_G = max_ij (1 + c y_ij - y_ij) / 4`.
    pub fn lipschitz_g(&self) -> f64 {
        self.weight.iter().fold(0.0_f64, |m, &a| m.max(a)) / 4.0
    }

    fn regularization(&self, u: &Mat, v: &Mat) -> f64 {
        0.5 * self.lambda_d * linalg::norm_sq(u) + 0.5 * self.lambda_t * linalg::norm_sq(v)
    }

    fn check_factors(&self, u: &Mat, v: &Mat) -> Result<()> {
        check_shape("U", (self.m(), self.r), u.dim())?;
        check_shape("V", (self.r, self.n()), v.dim())
    }

    /// Unconstrained objective at `(U, V)`.
    pub fn objective(&self, u: &Mat, v: &Mat) -> Result<f64> {
        self.check_factors(u, v)?;
        Ok(self.g_value(&u.dot(v))? + self.regularization(u, v))
    }

    /// Objective given a precomputed product `UV`.
    pub fn objective_with_product(&self, u: &Mat, v: &Mat, uv: &Mat) -> Result<f64> {
        Ok(self.g_value(uv)? + self.regularization(u, v))
    }

    /// Gradients of the unconstrained objective in `U` and in `V`.
    pub fn objective_grads(&self, u: &Mat, v: &Mat) -> Result<(Mat, Mat)> {
        self.check_factors(u, v)?;
        let g = self.g_grad(&u.dot(v))?;
        let gu = g.dot(&v.t()) + &(u * self.lambda_d);
        let gv = u.t().dot(&g) + &(v * self.lambda_t);
        Ok((gu, gv))
    }

    /// Analytic lower bound of the objective: `G >= 0` whenever `c >= 0`.
    pub fn lower_bound(&self) -> f64 {
        0.0
    }

    /// Certified lower bound on the objective over all factorizations of any rank.
    ///
    /// For `lambda_d = lambda_t = lambda`, `(lambda/2)(||U||^2 + ||V||^2) >= lambda ||UV||_*`,
    /// so the objective is at least `min_W G(W) + lambda ||W||_*`. Weak duality with
    /// `Z = -theta grad G(w)`, `theta = min(1, lambda / ||grad G(w)||_2)`, bounds that
    /// minimum below by `sum_ij a_ij H(s_ij)` with `H` the binary entropy (nats),
    /// `a = 1 + c y - y` and `s = (1 - theta) c y / a + theta sigma(w)`.
    /// Any `w` gives a valid bound; a near-optimal `w` gives a tight one.
    pub fn nuclear_dual_bound(&self, w: &Mat) -> Result<f64> {
        self.check_w(w)?;
        if self.lambda_d != self.lambda_t {
            return Err(Error::Domain("the nuclear-norm bound needs lambda_d = lambda_t".into()));
        }
        let lambda = self.lambda_d;
        let grad = self.g_grad(w)?;
        let op = linalg::gram_norm(&grad).sqrt();
        let theta = if op <= lambda { 1.0 } else { lambda / op };
        let entropy = |s: f64| {
            let t = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.ln() };
            t(s) + t(1.0 - s)
        };
        Ok(Zip::from(w)
            .and(&self.weight)
            .and(&self.linear)
            .fold(0.0, |acc, &w, &a, &b| {
                if a == 0.0 {
                    return acc;
                }
                let s = ((1.0 - theta) * b / a + theta * sigmoid(w)).clamp(0.0, 1.0);
                acc + a * entropy(s)
            }))
    }
}

/// `L_G` for data `y` and weight `c`.
pub fn lipschitz_g(y: &SparseBinary, c: f64) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::Domain(format!("c must be nonnegative, got {c}")));
    }
    let any_one = y.nnz() > 0;
    let zero_weight = if y.nnz() < y.rows() * y.cols() { 1.0 } else { 0.0 };
    let one_weight = if any_one { c } else { 0.0 };
    Ok(f64::max(zero_weight, one_weight) / 4.0)
}
