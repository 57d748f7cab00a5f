use crate::error::Result;
use crate::linalg::{self, gram_norm, CouplingMap, Mat, Shape};
use crate::problem::{BlockStructure, BlockVector, JointProx, LipschitzKind, Problem};

use super::model::LogMfInstance;

/// Split log-MF as a two-block problem: blocks `U` (m x r) and `V` (r x n),
/// `y = W`, `h(U, V) = UV`, `B = -I`, `F = (lambda_d/2)||U||^2 + (lambda_t/2)||V||^2`, `f_i = 0`.
#[derive(Debug, Clone)]
pub struct LogMfProblem {
    inst: LogMfInstance,
    coupling: CouplingMap,
}

impl LogMfProblem {
    pub fn new(inst: LogMfInstance) -> Self {
        let coupling = CouplingMap::negative_identity((inst.m(), inst.n()));
        Self { inst, coupling }
    }

    pub fn instance(&self) -> &LogMfInstance {
        &self.inst
    }

    fn lambda(&self, i: usize) -> f64 {
        if i == 0 {
            self.inst.lambda_d
        } else {
            self.inst.lambda_t
        }
    }
}

impl Problem for LogMfProblem {
    fn block_shapes(&self) -> Vec<Shape> {
        vec![(self.inst.m(), self.inst.r), (self.inst.r, self.inst.n())]
    }

    fn coupling(&self) -> &CouplingMap {
        &self.coupling
    }

    fn smooth_value(&self, x: &BlockVector) -> f64 {
        0.5 * self.inst.lambda_d * linalg::norm_sq(x.block(0)) + 0.5 * self.inst.lambda_t * linalg::norm_sq(x.block(1))
    }

    fn smooth_grad(&self, i: usize, x: &BlockVector) -> Option<Mat> {
        Some(x.block(i) * self.lambda(i))
    }

    fn regularizer_value(&self, _i: usize, _xi: &Mat) -> f64 {
        0.0
    }

    fn regularizer_prox(&self, _i: usize, center: &Mat, _weight: f64) -> Result<Mat> {
        Ok(center.clone())
    }

    fn regularizer_grad(&self, _i: usize, xi: &Mat) -> Option<Mat> {
        Some(Mat::zeros(xi.dim()))
    }

    fn constraint_value(&self, x: &BlockVector) -> Mat {
        x.block(0).dot(x.block(1))
    }

    fn constraint_jacobian_t(&self, i: usize, x: &BlockVector, v: &Mat) -> Mat {
        if i == 0 {
            v.dot(&x.block(1).t())
        } else {
            x.block(0).t().dot(v)
        }
    }

    fn g_value(&self, y: &Mat) -> f64 {
        self.inst.g_value(y).expect("W shape checked by the solver")
    }

    fn g_grad(&self, y: &Mat) -> Mat {
        self.inst.g_grad(y).expect("W shape checked by the solver")
    }

    fn g_value_and_grad(&self, y: &Mat) -> (f64, Mat) {
        self.inst.g_value_and_grad(y).expect("W shape checked by the solver")
    }

    fn g_lipschitz(&self) -> f64 {
        self.inst.lipschitz_g()
    }

    fn block_lipschitz(&self, i: usize, x: &BlockVector, kind: LipschitzKind) -> f64 {
        match kind {
            LipschitzKind::Smooth => self.lambda(i),
            // ||VV^T|| for U, ||U^T U|| for V
            LipschitzKind::ConstraintSquare => gram_norm(x.block(1 - i)),
        }
    }

    fn block_structure(&self, _i: usize) -> BlockStructure {
        BlockStructure {
            affine_constraint: true,
            convex: true,
        }
    }

    fn joint_prox(&self, i: usize, x: &BlockVector, sub: &JointProx<'_>) -> Option<Result<Mat>> {
        // U (hw V V^T + w I) = w c - linear - D V^T, or (hw U^T U + w I) V = w c - linear - U^T D
        let other = x.block(1 - i);
        let mut rhs = sub.center * sub.weight - sub.linear;
        let (mut gram, rhs) = if i == 0 {
            rhs -= &sub.dual_shift.dot(&other.t());
            (other.dot(&other.t()) * sub.h_weight, rhs.t().to_owned())
        } else {
            rhs -= &other.t().dot(sub.dual_shift);
            (other.t().dot(other) * sub.h_weight, rhs)
        };
        for k in 0..gram.nrows() {
            gram[[k, k]] += sub.weight;
        }
        Some(linalg::spd_solve(&gram, &rhs).map(|s| if i == 0 { s.t().to_owned() } else { s }))
    }

    fn lower_bound(&self) -> Option<f64> {
        Some(self.inst.lower_bound())
    }

    fn reported_objective(&self, x: &BlockVector, _y: &Mat, h: &Mat) -> f64 {
        self.inst
            .objective_with_product(x.block(0), x.block(1), h)
            .expect("UV shape checked by the solver")
    }
}
