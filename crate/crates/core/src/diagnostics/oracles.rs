//! Derivative-free reference computations.

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Central differences `(f(x + h e_j) - f(x - h e_j)) / (2h)` for every entry of `x`.
pub fn finite_diff_grad<F: Fn(&Mat) -> f64>(f: F, x: &Mat, h: f64) -> Result<Mat> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {h}")));
    }
    let mut probe = x.clone();
    let mut out = Mat::zeros(x.dim());
    for (idx, g) in out.indexed_iter_mut() {
        let orig = probe[idx];
        probe[idx] = orig + h;
        let fp = f(&probe);
        probe[idx] = orig - h;
        let fm = f(&probe);
        probe[idx] = orig;
        *g = (fp - fm) / (2.0 * h);
    }
    Ok(out)
}

pub const MAX_GRID_POINTS: usize = 10_000_000;

/// Minimize `f` over the box by exhaustive grid search followed by three
/// rounds of compass search whose step halves from the grid spacing down to
/// `spacing * 2^-30`.
pub fn brute_force_argmin<F: Fn(&[f64]) -> f64>(
    f: F,
    bounds: &[(f64, f64)],
    points_per_dim: usize,
) -> Result<Vec<f64>> {
    if bounds.is_empty() {
        return Err(Error::Domain("box has no dimensions".into()));
    }
    if let Some(&(lo, hi)) = bounds.iter().find(|&&(lo, hi)| !(lo <= hi)) {
        return Err(Error::Domain(format!("empty box side [{lo}, {hi}]")));
    }
    if points_per_dim < 2 {
        return Err(Error::Domain("need at least 2 grid points per dimension".into()));
    }
    let total = bounds
        .iter()
        .try_fold(1usize, |acc, _| acc.checked_mul(points_per_dim))
        .filter(|&t| t <= MAX_GRID_POINTS)
        .ok_or_else(|| Error::Domain(format!("grid exceeds {MAX_GRID_POINTS} points")))?;

    let d = bounds.len();
    let spacing: Vec<f64> = bounds
        .iter()
        .map(|&(lo, hi)| (hi - lo) / (points_per_dim - 1) as f64)
        .collect();
    let coord = |dim: usize, k: usize| {
        let (lo, hi) = bounds[dim];
        if k == points_per_dim - 1 {
            hi
        } else {
            lo + k as f64 * spacing[dim]
        }
    };

    let mut best = vec![0.0; d];
    let mut best_val = f64::INFINITY;
    let mut point = vec![0.0; d];
    for flat in 0..total {
        let mut rem = flat;
        for (dim, p) in point.iter_mut().enumerate().rev() {
            *p = coord(dim, rem % points_per_dim);
            rem /= points_per_dim;
        }
        let v = f(&point);
        if v < best_val {
            best_val = v;
            best.copy_from_slice(&point);
        }
    }

    for _ in 0..3 {
        let mut scale = 1.0;
        while scale > f64::powi(2.0, -30) {
            let mut improved = false;
            for dim in 0..d {
                let step = spacing[dim] * scale;
                if step == 0.0 {
                    continue;
                }
                for dir in [1.0, -1.0] {
                    loop {
                        let mut cand = best.clone();
                        cand[dim] = (cand[dim] + dir * step).clamp(bounds[dim].0, bounds[dim].1);
                        let v = f(&cand);
                        if v < best_val {
                            best_val = v;
                            best = cand;
                            improved = true;
                        } else {
                            break;
                        }
                    }
                }
            }
            if !improved {
                scale *= 0.5;
            }
        }
    }
    Ok(best)
}
