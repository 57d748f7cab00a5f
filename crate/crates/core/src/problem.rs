//! Problem description and the evaluators built on it.
//!
//! A problem is
//!
//! ```text
//! minimize   F(x) + sum_i f_i(x_i) + G(y)
//! subject to h(x) + B y = 0
//! ```
//!
//! with `x = (x_1, ..., x_s)` split into blocks, `F` continuously
//! differentiable, `f_i` proper lower semicontinuous (reached only through a
//! proximal oracle), `G` with an `L_G`-Lipschitz gradient and `B` linear.

use serde::{Deserialize, Serialize};

use crate::error::{check_shape, Error, Result};
use crate::linalg::{self, CouplingMap, Mat, Shape};

/// The primal variable split into `s` dense blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    blocks: Vec<Mat>,
}

impl BlockVector {
    pub fn new(blocks: Vec<Mat>) -> Self {
        Self { blocks }
    }

    pub fn zeros(shapes: &[Shape]) -> Self {
        Self::new(shapes.iter().map(|&s| Mat::zeros(s)).collect())
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, i: usize) -> &Mat {
        &self.blocks[i]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut Mat {
        &mut self.blocks[i]
    }

    pub fn set_block(&mut self, i: usize, value: Mat) {
        self.blocks[i] = value;
    }

    pub fn blocks(&self) -> &[Mat] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Mat> {
        self.blocks
    }

    pub fn shapes(&self) -> Vec<Shape> {
        self.blocks.iter().map(|b| b.dim()).collect()
    }

    /// `n = sum_i n_i`
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }

    /// Copy of `self` with block `i` replaced.
    pub fn with_block(&self, i: usize, value: Mat) -> Self {
        let mut out = self.clone();
        out.blocks[i] = value;
        out
    }

    pub fn norm_sq(&self) -> f64 {
        self.blocks.iter().map(linalg::norm_sq).sum()
    }

    pub fn dist_sq(&self, other: &BlockVector) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| linalg::dist_sq(a, b))
            .sum()
    }
}

/// Multiplier and auxiliary variable.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub y: Mat,
    pub omega: Mat,
}

/// Which block Lipschitz constant to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LipschitzKind {
    /// `l_i`: constant of `x_i -> grad_{x_i} (1/2)||h(x)||^2`.
    ConstraintSquare,
    /// `L_i`: constant of `x_i -> grad_{x_i} F(x)`.
    Smooth,
}

/// Structural facts about one block, used to pick the proximal weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStructure {
    /// `x_i -> h(x)` is affine for fixed other blocks.
    pub affine_constraint: bool,
    /// `f_i` plus the block surrogate of `F` is convex in `x_i`.
    pub convex: bool,
}

impl BlockStructure {
    pub fn admits_exact_kappa(&self) -> bool {
        self.affine_constraint && self.convex
    }
}

/// Subproblem handed to [`Problem::joint_prox`]:
///
/// ```text
/// argmin_u  f_i(u) + <h(u, x_rest), dual_shift> + (h_weight/2) ||h(u, x_rest)||^2
///           + <linear, u> + (weight/2) ||u - center||^2
/// ```
#[derive(Debug, Clone)]
pub struct JointProx<'a> {
    pub dual_shift: &'a Mat,
    pub h_weight: f64,
    pub linear: &'a Mat,
    pub weight: f64,
    pub center: &'a Mat,
}

/// User-supplied oracles describing a problem instance.
///
/// Implementations must be deterministic functions of their inputs. Oracles
/// are assumed safe to call from several threads at once unless
/// [`Problem::concurrent_oracles`] returns `false`.
pub trait Problem {
    fn block_shapes(&self) -> Vec<Shape>;

    fn coupling(&self) -> &CouplingMap;

    /// `F(x)`
    fn smooth_value(&self, x: &BlockVector) -> f64;

    /// `grad_{x_i} F(x)`; `None` declares that `F` does not depend on block `i`.
    fn smooth_grad(&self, i: usize, x: &BlockVector) -> Option<Mat>;

    /// `f_i(x_i)`, possibly `+inf`.
    fn regularizer_value(&self, i: usize, xi: &Mat) -> f64;

    /// `argmin_u f_i(u) + (weight/2) ||u - center||^2`
    fn regularizer_prox(&self, i: usize, center: &Mat, weight: f64) -> Result<Mat>;

    /// `grad f_i(x_i)` for smooth regularizers. Only used to verify subproblem optimality.
    fn regularizer_grad(&self, _i: usize, _xi: &Mat) -> Option<Mat> {
        None
    }

    /// `h(x)`
    fn constraint_value(&self, x: &BlockVector) -> Mat;

    /// `grad_{x_i} h(x)^T v`
    fn constraint_jacobian_t(&self, i: usize, x: &BlockVector, v: &Mat) -> Mat;

    /// `G(y)`
    fn g_value(&self, y: &Mat) -> f64;

    /// `grad G(y)`
    fn g_grad(&self, y: &Mat) -> Mat;

    fn g_value_and_grad(&self, y: &Mat) -> (f64, Mat) {
        (self.g_value(y), self.g_grad(y))
    }

    /// `L_G`
    fn g_lipschitz(&self) -> f64;

    /// Block Lipschitz constant at `x` (only the other blocks of `x` matter).
    fn block_lipschitz(&self, i: usize, x: &BlockVector, kind: LipschitzKind) -> f64;

    fn block_structure(&self, i: usize) -> BlockStructure;

    /// Solver for [`JointProx`]; required by update rules that keep `h`
    /// exact in the subproblem. `None` means unsupported.
    fn joint_prox(&self, _i: usize, _x: &BlockVector, _sub: &JointProx<'_>) -> Option<Result<Mat>> {
        None
    }

    /// Declared lower bound `nu` of the objective, when known.
    fn lower_bound(&self) -> Option<f64> {
        None
    }

    /// Value written to the `objective` column of traces. `h` is `h(x)`.
    fn reported_objective(&self, x: &BlockVector, y: &Mat, _h: &Mat) -> f64 {
        objective_unchecked(self, x, y)
    }

    fn concurrent_oracles(&self) -> bool {
        true
    }
}

/// Per-block and global stationarity measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub stat_x: Vec<f64>,
    pub stat_y: f64,
    pub feas: f64,
}

impl Residuals {
    pub fn stat_x_max(&self) -> f64 {
        self.stat_x.iter().fold(0.0, |m, &v| m.max(v))
    }
}

pub fn check_blocks<P: Problem + ?Sized>(p: &P, x: &BlockVector) -> Result<()> {
    let shapes = p.block_shapes();
    if shapes.len() != x.len() {
        return Err(Error::Dimension {
            context: "block count".into(),
            expected: (shapes.len(), 1),
            actual: (x.len(), 1),
        });
    }
    for (i, (s, b)) in shapes.iter().zip(x.blocks()).enumerate() {
        check_shape(&format!("block {i}"), *s, b.dim())?;
    }
    Ok(())
}

fn check_inputs<P: Problem + ?Sized>(p: &P, x: &BlockVector, y: &Mat) -> Result<()> {
    check_blocks(p, x)?;
    check_shape("y", p.coupling().y_shape(), y.dim())
}

pub(crate) fn objective_unchecked<P: Problem + ?Sized>(p: &P, x: &BlockVector, y: &Mat) -> f64 {
    let mut total = 0.0;
    for (i, b) in x.blocks().iter().enumerate() {
        let v = p.regularizer_value(i, b);
        if v == f64::INFINITY {
            return f64::INFINITY;
        }
        total += v;
    }
    total + p.smooth_value(x) + p.g_value(y)
}

/// `Theta(x, y) = F(x) + sum_i f_i(x_i) + G(y)`; `+inf` when any `f_i` is.
pub fn eval_objective<P: Problem + ?Sized>(p: &P, x: &BlockVector, y: &Mat) -> Result<f64> {
    check_inputs(p, x, y)?;
    Ok(objective_unchecked(p, x, y))
}

/// `h(x) + B y`
pub fn constraint_residual<P: Problem + ?Sized>(p: &P, x: &BlockVector, y: &Mat) -> Result<Mat> {
    check_inputs(p, x, y)?;
    let h = p.constraint_value(x);
    check_shape("h(x)", p.coupling().h_shape(), h.dim())?;
    Ok(h + &p.coupling().apply(y)?)
}

/// Augmented Lagrangian from its pieces: `theta + <r, omega> + (beta/2)||r||^2`.
pub fn lagrangian_from_parts(theta: f64, residual: &Mat, omega: &Mat, beta: f64) -> f64 {
    if theta == f64::INFINITY {
        return f64::INFINITY;
    }
    theta + linalg::dot(residual, omega) + 0.5 * beta * linalg::norm_sq(residual)
}

/// `L_beta(x, y, omega) = Theta(x,y) + <h(x)+By, omega> + (beta/2)||h(x)+By||^2`
pub fn eval_aug_lagrangian<P: Problem + ?Sized>(
    p: &P,
    x: &BlockVector,
    y: &Mat,
    omega: &Mat,
    beta: f64,
) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    let r = constraint_residual(p, x, y)?;
    check_shape("omega", p.coupling().h_shape(), omega.dim())?;
    Ok(lagrangian_from_parts(objective_unchecked(p, x, y), &r, omega, beta))
}

/// Stationarity residuals at `(x, y)` with multiplier `omega`.
///
/// `chi[i]` must be an element of `partial_{x_i} (f_i + F)(x)`; the solver
/// recovers one from the optimality identity of the last proximal step.
pub fn stationarity_residuals<P: Problem + ?Sized>(
    p: &P,
    x: &BlockVector,
    y: &Mat,
    omega: &Mat,
    chi: &[Mat],
) -> Result<Residuals> {
    let r = constraint_residual(p, x, y)?;
    check_shape("omega", p.coupling().h_shape(), omega.dim())?;
    if chi.len() != x.len() {
        return Err(Error::Dimension {
            context: "chi block count".into(),
            expected: (x.len(), 1),
            actual: (chi.len(), 1),
        });
    }
    let mut stat_x = Vec::with_capacity(x.len());
    for (i, c) in chi.iter().enumerate() {
        check_shape(&format!("chi {i}"), x.block(i).dim(), c.dim())?;
        let g = p.constraint_jacobian_t(i, x, omega) + c;
        stat_x.push(linalg::norm(&g));
    }
    let gy = p.g_grad(y) + &p.coupling().apply_t(omega)?;
    Ok(Residuals {
        stat_x,
        stat_y: linalg::norm(&gy),
        feas: linalg::norm(&r),
    })
}


#[cfg(test)]
mod tests {
    use super::toy::QuadToy;
    use super::*;
    use ndarray::array;

    fn toy() -> QuadToy {
        QuadToy::new(2.0, &[0.0, 0.0], array![[1.0, 0.0], [0.0, 2.0]], 2.0, &[0.0, 0.0])
    }

    #[test]
    fn objective_of_zero_quadratic_is_zero() {
        let p = toy();
        let x = BlockVector::zeros(&p.block_shapes());
        let y = Mat::zeros((2, 1));
        assert_eq!(eval_objective(&p, &x, &y).unwrap(), 0.0);
    }

    #[test]
    fn shape_mismatch_is_a_dimension_error() {
        let p = toy();
        let x = BlockVector::new(vec![Mat::zeros((3, 1))]);
        let y = Mat::zeros((2, 1));
        assert!(matches!(eval_objective(&p, &x, &y), Err(Error::Dimension { .. })));
        let x = BlockVector::zeros(&p.block_shapes());
        let bad_y = Mat::zeros((1, 1));
        assert!(matches!(
            constraint_residual(&p, &x, &bad_y),
            Err(Error::Dimension { .. })
        ));
    }

    struct Indicator(QuadToy);

    impl Problem for Indicator {
        fn block_shapes(&self) -> Vec<Shape> {
            self.0.block_shapes()
        }
        fn coupling(&self) -> &CouplingMap {
            self.0.coupling()
        }
        fn smooth_value(&self, x: &BlockVector) -> f64 {
            self.0.smooth_value(x)
        }
        fn smooth_grad(&self, i: usize, x: &BlockVector) -> Option<Mat> {
            self.0.smooth_grad(i, x)
        }
        fn regularizer_value(&self, _i: usize, xi: &Mat) -> f64 {
            // indicator of the nonnegative orthant
            if xi.iter().all(|&v| v >= 0.0) {
                0.0
            } else {
                f64::INFINITY
            }
        }
        fn regularizer_prox(&self, _i: usize, center: &Mat, _w: f64) -> Result<Mat> {
            Ok(center.mapv(|v| v.max(0.0)))
        }
        fn constraint_value(&self, x: &BlockVector) -> Mat {
            self.0.constraint_value(x)
        }
        fn constraint_jacobian_t(&self, i: usize, x: &BlockVector, v: &Mat) -> Mat {
            self.0.constraint_jacobian_t(i, x, v)
        }
        fn g_value(&self, y: &Mat) -> f64 {
            self.0.g_value(y)
        }
        fn g_grad(&self, y: &Mat) -> Mat {
            self.0.g_grad(y)
        }
        fn g_lipschitz(&self) -> f64 {
            self.0.g_lipschitz()
        }
        fn block_lipschitz(&self, i: usize, x: &BlockVector, kind: LipschitzKind) -> f64 {
            self.0.block_lipschitz(i, x, kind)
        }
        fn block_structure(&self, i: usize) -> BlockStructure {
            self.0.block_structure(i)
        }
    }

    #[test]
    fn infinite_regularizer_propagates() {
        let p = Indicator(toy());
        let x = BlockVector::new(vec![linalg::col(&[-1.0, 0.0])]);
        let y = Mat::zeros((2, 1));
        assert_eq!(eval_objective(&p, &x, &y).unwrap(), f64::INFINITY);
        let omega = linalg::col(&[1.0, 1.0]);
        assert_eq!(eval_aug_lagrangian(&p, &x, &y, &omega, 1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn lagrangian_hand_values() {
        // residual norm^2 = 4 with <r, omega> = 2
        let r = linalg::col(&[2.0]);
        assert_eq!(lagrangian_from_parts(0.0, &r, &linalg::col(&[1.0]), 1.0), 4.0);
        // omega = 0, beta = 2, ||r|| = 3, theta = 1
        let r = linalg::col(&[3.0, 0.0]);
        assert_eq!(lagrangian_from_parts(1.0, &r, &linalg::col(&[0.0, 0.0]), 2.0), 10.0);
    }

    #[test]
    fn aug_lagrangian_rejects_nonpositive_beta() {
        let p = toy();
        let x = BlockVector::zeros(&p.block_shapes());
        let y = Mat::zeros((2, 1));
        assert!(eval_aug_lagrangian(&p, &x, &y, &y, 0.0).is_err());
    }

    #[test]
    fn analytic_stationary_point_of_scalar_quadratic() {
        // min (1/2)(x-1)^2 + (1/2) y^2  s.t. x - y = 0  ->  x = y = 1/2, omega = 1/2
        let p = QuadToy::new(1.0, &[1.0], array![[1.0]], 1.0, &[0.0]);
        let x = BlockVector::new(vec![linalg::col(&[0.5])]);
        let y = linalg::col(&[0.5]);
        let omega = linalg::col(&[0.5]);
        let chi = vec![p.smooth_grad(0, &x).unwrap()];
        let r = stationarity_residuals(&p, &x, &y, &omega, &chi).unwrap();
        assert!(r.stat_x[0] < 1e-10 && r.stat_y < 1e-10 && r.feas < 1e-10);
    }

    #[test]
    fn stationarity_rejects_wrong_chi_count() {
        let p = toy();
        let x = BlockVector::zeros(&p.block_shapes());
        let y = Mat::zeros((2, 1));
        assert!(stationarity_residuals(&p, &x, &y, &y, &[]).is_err());
    }
}
