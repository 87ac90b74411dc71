//! Successive projection for simplex vertex hunting.

use crate::error::{Error, Result};
use crate::numerics::matrix::{dot, DenseMatrix};
use crate::scalar::Scalar;

/// Row indices of `k` simplex corners among the rows of `points` (`n × (k−1)`).
///
/// Each row is lifted to `(1, rᵢ)` so that the `k` corners are linearly
/// independent; then `k` times the row of largest residual norm is taken and
/// every row is projected onto the orthogonal complement of it. The first
/// pick is therefore the row of largest norm. Ties go to the lowest index.
pub fn spa_vertices<T: Scalar>(points: &DenseMatrix<T>, k: usize) -> Result<Vec<usize>> {
    let n = points.rows();
    if k == 0 || n < k {
        return Err(Error::InvalidArgument(format!(
            "vertex hunting needs 1 <= k <= n (k = {k}, n = {n})"
        )));
    }
    if points.as_slice().iter().all(|x| *x == T::zero()) {
        return Err(Error::DegenerateInput("all-zero point cloud".into()));
    }
    let mut resid: Vec<Vec<T>> = (0..n)
        .map(|i| {
            std::iter::once(T::one())
                .chain(points.row(i).iter().copied())
                .collect()
        })
        .collect();
    let initial = resid.iter().map(|r| dot(r, r)).fold(T::zero(), T::max);
    let floor = T::of(1e3) * T::epsilon() * initial;
    let mut picks = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best = 0;
        let mut best_norm = T::neg_infinity();
        for (i, r) in resid.iter().enumerate() {
            let v = dot(r, r);
            if v > best_norm {
                best = i;
                best_norm = v;
            }
        }
        if best_norm <= floor {
            return Err(Error::DegenerateInput(format!(
                "point cloud spans fewer than {k} affinely independent corners"
            )));
        }
        picks.push(best);
        let scale = best_norm.sqrt();
        let u: Vec<T> = resid[best].iter().map(|&x| x / scale).collect();
        for r in resid.iter_mut() {
            let proj = dot(r, &u);
            for (x, &ui) in r.iter_mut().zip(&u) {
                *x -= proj * ui;
            }
        }
    }
    Ok(picks)
}
