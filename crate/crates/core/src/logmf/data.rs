use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::formats::SparseBinary;
use crate::linalg::Mat;
use crate::rng::{rng_from_seed, uniform01};

/// Random 0/1 matrix, each entry 1 with probability `density`, filled row-major.
pub fn generate_instance(m: usize, n: usize, density: f64, seed: u64) -> Result<SparseBinary> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::Domain(format!("density must lie in [0, 1], got {density}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut entries = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if uniform01(&mut rng) < density {
                entries.push((i, j));
            }
        }
    }
    SparseBinary::new(m, n, entries)
}

/// Initial factors with i.i.d. `N(0, 1/r)` entries, `U` filled before `V`.
pub fn init_factors(m: usize, n: usize, r: usize, seed: u64) -> (Mat, Mat) {
    let mut rng = rng_from_seed(seed);
    let scale = 1.0 / (r.max(1) as f64).sqrt();
    let mut draw = |shape: (usize, usize)| {
        Mat::from_shape_simple_fn(shape, || {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * scale
        })
    };
    let u = draw((m, r));
    let v = draw((r, n));
    (u, v)
}
