//! Dense array helpers and the linear coupling operator `B`.
//!
//! Every array in the crate is an [`ndarray::Array2<f64>`] in the default
//! row-major layout. Vectors are stored as `n x 1` columns so a single type
//! covers both the vector blocks of generic problems and the matrix blocks of
//! factorization problems. Inner products and norms are Frobenius.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, Zip};

use crate::error::{check_shape, Error, Result};

pub type Mat = Array2<f64>;

/// `(rows, cols)` of an array.
pub type Shape = (usize, usize);

pub fn shape_of(a: &Mat) -> Shape {
    a.dim()
}

/// Column vector from a slice.
pub fn col(values: &[f64]) -> Mat {
    Array2::from_shape_vec((values.len(), 1), values.to_vec()).expect("column shape")
}

pub fn dot(a: &Mat, b: &Mat) -> f64 {
    Zip::from(a).and(b).fold(0.0, |acc, &x, &y| acc + x * y)
}

pub fn norm_sq(a: &Mat) -> f64 {
    a.iter().map(|v| v * v).sum()
}

pub fn norm(a: &Mat) -> f64 {
    norm_sq(a).sqrt()
}

pub fn dist_sq(a: &Mat, b: &Mat) -> f64 {
    Zip::from(a).and(b).fold(0.0, |acc, &x, &y| acc + (x - y) * (x - y))
}

/// `a + s * b`
pub fn axpy(a: &Mat, s: f64, b: &Mat) -> Mat {
    let mut out = a.clone();
    out.scaled_add(s, b);
    out
}

fn to_nalgebra(a: &Mat) -> DMatrix<f64> {
    let (r, c) = a.dim();
    DMatrix::from_fn(r, c, |i, j| a[[i, j]])
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(a: &Mat) -> Vec<f64> {
    let mut ev: Vec<f64> = to_nalgebra(a).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Spectral norm of a symmetric positive semidefinite matrix (its largest eigenvalue).
pub fn psd_spectral_norm(a: &Mat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    to_nalgebra(a)
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |m, &v| m.max(v.abs()))
}

/// `||M M^T||` for a rectangular `M`, computed on the smaller Gram matrix.
pub fn gram_norm(m: &Mat) -> f64 {
    let (r, c) = m.dim();
    if r <= c {
        psd_spectral_norm(&m.dot(&m.t()))
    } else {
        psd_spectral_norm(&m.t().dot(m))
    }
}

/// Solve `A x = b` for symmetric positive definite `A` (columns of `b` solved together).
pub fn spd_solve(a: &Mat, b: &Mat) -> Result<Mat> {
    let chol = to_nalgebra(a)
        .cholesky()
        .ok_or_else(|| Error::Numeric("matrix is not positive definite".into()))?;
    let x = chol.solve(&to_nalgebra(b));
    Ok(Array2::from_shape_fn(b.dim(), |(i, j)| x[(i, j)]))
}

/// The linear map `B : R^m -> R^q` of the coupling constraint `h(x) + B y = 0`.
///
/// `y` and `h(x)` are arrays whose shapes are carried explicitly; the dense
/// variant acts on their row-major flattenings.
#[derive(Debug, Clone)]
pub enum CouplingMap {
    /// `B y = scale * y`, with `y` and `h(x)` sharing one shape.
    ScaledIdentity { scale: f64, shape: Shape },
    /// `vec(B y) = matrix * vec(y)`, `matrix` is `q x m`.
    Dense {
        matrix: Mat,
        y_shape: Shape,
        h_shape: Shape,
    },
}

impl CouplingMap {
    pub fn negative_identity(shape: Shape) -> Self {
        CouplingMap::ScaledIdentity { scale: -1.0, shape }
    }

    pub fn dense(matrix: Mat, y_shape: Shape, h_shape: Shape) -> Result<Self> {
        check_shape(
            "coupling matrix",
            (h_shape.0 * h_shape.1, y_shape.0 * y_shape.1),
            matrix.dim(),
        )?;
        Ok(CouplingMap::Dense {
            matrix,
            y_shape,
            h_shape,
        })
    }

    pub fn y_shape(&self) -> Shape {
        match self {
            CouplingMap::ScaledIdentity { shape, .. } => *shape,
            CouplingMap::Dense { y_shape, .. } => *y_shape,
        }
    }

    pub fn h_shape(&self) -> Shape {
        match self {
            CouplingMap::ScaledIdentity { shape, .. } => *shape,
            CouplingMap::Dense { h_shape, .. } => *h_shape,
        }
    }

    /// `B y`
    pub fn apply(&self, y: &Mat) -> Result<Mat> {
        check_shape("B y", self.y_shape(), y.dim())?;
        Ok(match self {
            CouplingMap::ScaledIdentity { scale, .. } => y * *scale,
            CouplingMap::Dense { matrix, h_shape, .. } => {
                let flat = flatten(y);
                reshape(matrix.dot(&flat), *h_shape)
            }
        })
    }

    /// `B^T v`
    pub fn apply_t(&self, v: &Mat) -> Result<Mat> {
        check_shape("B^T v", self.h_shape(), v.dim())?;
        Ok(match self {
            CouplingMap::ScaledIdentity { scale, .. } => v * *scale,
            CouplingMap::Dense { matrix, y_shape, .. } => {
                let flat = flatten(v);
                reshape(matrix.t().dot(&flat), *y_shape)
            }
        })
    }

    /// `sigma_B = lambda_min(B B^T)`
    pub fn lambda_min_bbt(&self) -> f64 {
        match self {
            CouplingMap::ScaledIdentity { scale, .. } => scale * scale,
            CouplingMap::Dense { matrix, .. } => sym_eigenvalues(&matrix.dot(&matrix.t()))
                .first()
                .copied()
                .unwrap_or(0.0),
        }
    }

    /// `lambda_min(B^T B)`
    pub fn lambda_min_btb(&self) -> f64 {
        match self {
            CouplingMap::ScaledIdentity { scale, .. } => scale * scale,
            CouplingMap::Dense { matrix, .. } => {
                sym_eigenvalues(&matrix.t().dot(matrix)).first().copied().unwrap_or(0.0)
            }
        }
    }

    /// Factorization of `beta B^T B + lg I` used by the `y` step.
    pub fn y_system(&self, beta: f64, lg: f64) -> Result<YSystem> {
        match self {
            CouplingMap::ScaledIdentity { scale, .. } => {
                let d = beta * scale * scale + lg;
                if d <= 0.0 {
                    return Err(Error::Numeric("beta B^T B + L_G I is singular".into()));
                }
                Ok(YSystem::Scalar(1.0 / d))
            }
            CouplingMap::Dense { matrix, y_shape, .. } => {
                let mut a = matrix.t().dot(matrix) * beta;
                for i in 0..a.nrows() {
                    a[[i, i]] += lg;
                }
                let chol = to_nalgebra(&a)
                    .cholesky()
                    .ok_or_else(|| Error::Numeric("beta B^T B + L_G I is singular".into()))?;
                Ok(YSystem::Cholesky {
                    factor: Box::new(chol),
                    shape: *y_shape,
                })
            }
        }
    }

    /// A `y` with `h + B y = 0` when `h` lies in the range of `B`.
    pub fn feasible_y(&self, h: &Mat) -> Result<Option<Mat>> {
        check_shape("feasible y", self.h_shape(), h.dim())?;
        match self {
            CouplingMap::ScaledIdentity { scale, .. } => {
                if *scale == 0.0 {
                    return Ok(None);
                }
                Ok(Some(h * (-1.0 / scale)))
            }
            CouplingMap::Dense { matrix, y_shape, .. } => {
                let b = to_nalgebra(matrix);
                let rhs = DVector::from_iterator(h.len(), h.iter().map(|v| -v));
                let pinv = b
                    .clone()
                    .pseudo_inverse(1e-12)
                    .map_err(|e| Error::Numeric(e.to_string()))?;
                let y = &pinv * &rhs;
                let resid = (&b * &y - &rhs).norm();
                if resid > 1e-10 * (1.0 + rhs.norm()) {
                    return Ok(None);
                }
                Ok(Some(Array2::from_shape_fn(*y_shape, |(i, j)| y[i * y_shape.1 + j])))
            }
        }
    }
}

/// Precomputed inverse of `beta B^T B + L_G I`.
#[derive(Debug, Clone)]
pub enum YSystem {
    Scalar(f64),
    Cholesky {
        factor: Box<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
        shape: Shape,
    },
}

impl YSystem {
    pub fn solve(&self, rhs: &Mat) -> Mat {
        match self {
            YSystem::Scalar(inv) => rhs * *inv,
            YSystem::Cholesky { factor, shape } => {
                let v = DVector::from_iterator(rhs.len(), rhs.iter().copied());
                let x = factor.solve(&v);
                Array2::from_shape_fn(*shape, |(i, j)| x[i * shape.1 + j])
            }
        }
    }
}

fn flatten(a: &Mat) -> Mat {
    let v: Vec<f64> = a.iter().copied().collect();
    Array2::from_shape_vec((v.len(), 1), v).expect("flat column")
}

fn reshape(a: Mat, shape: Shape) -> Mat {
    let v: Vec<f64> = a.iter().copied().collect();
    Array2::from_shape_vec(shape, v).expect("reshape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn gram_norm_matches_largest_singular_value_squared() {
        let m = array![[3.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert!((gram_norm(&m) - 9.0).abs() < 1e-12);
        assert!((gram_norm(&m.t().to_owned()) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn dense_coupling_round_trips_through_flattening() {
        let b = array![[1.0, 2.0], [0.0, 1.0], [1.0, 0.0]];
        let map = CouplingMap::dense(b, (2, 1), (3, 1)).unwrap();
        let y = col(&[1.0, -1.0]);
        let by = map.apply(&y).unwrap();
        assert_eq!(by, col(&[-1.0, -1.0, 1.0]));
        let v = col(&[1.0, 1.0, 1.0]);
        assert_eq!(map.apply_t(&v).unwrap(), col(&[2.0, 3.0]));
        assert!(map.lambda_min_bbt().abs() < 1e-12);
        assert!(map.lambda_min_btb() > 0.0);
    }

    #[test]
    fn y_system_inverts_the_normal_matrix() {
        let b = array![[2.0, 1.0], [0.0, 1.0]];
        let map = CouplingMap::dense(b.clone(), (2, 1), (2, 1)).unwrap();
        let sys = map.y_system(0.5, 0.25).unwrap();
        let rhs = col(&[1.0, 2.0]);
        let x = sys.solve(&rhs);
        let mut a = b.t().dot(&b) * 0.5;
        a[[0, 0]] += 0.25;
        a[[1, 1]] += 0.25;
        let back = a.dot(&x);
        assert!(dist_sq(&back, &rhs) < 1e-24);
    }

    #[test]
    fn feasible_y_for_surjective_dense_map() {
        let b = array![[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]];
        let map = CouplingMap::dense(b, (3, 1), (2, 1)).unwrap();
        let h = col(&[1.0, 2.0]);
        let y = map.feasible_y(&h).unwrap().unwrap();
        let r = &h + &map.apply(&y).unwrap();
        assert!(norm(&r) < 1e-10);
    }
}
