//! Lloyd's k-means with k-means++ seeding and restarts.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::matrix::DenseMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Clustering<T> {
    /// Zero-based cluster ids, numbered by first appearance.
    pub labels: Vec<usize>,
    /// Within-cluster sum of squares.
    pub wcss: T,
    pub iterations: usize,
}

/// Clusters the rows of `points` into `k` groups; best of `config.restarts` runs by WCSS.
///
/// Ties in nearest-centre assignment go to the lowest centre index, and an
/// earlier restart is kept over a later one with equal WCSS.
pub fn kmeans<T: Scalar, R: Rng + ?Sized>(
    points: &DenseMatrix<T>,
    k: usize,
    config: KMeansConfig,
    rng: &mut R,
) -> Result<Clustering<T>> {
    let n = points.rows();
    if k == 0 {
        return Err(Error::InvalidArgument("k-means needs k >= 1".into()));
    }
    let distinct = count_distinct(points);
    if distinct < k {
        return Err(Error::TooFewDistinctPoints { k, distinct });
    }
    if k == 1 {
        let centers = centroids(points, &vec![0; n], 1);
        let wcss = wcss(points, &centers, &vec![0; n]);
        return Ok(Clustering {
            labels: vec![0; n],
            wcss,
            iterations: 0,
        });
    }
    let mut best: Option<Clustering<T>> = None;
    for _ in 0..config.restarts.max(1) {
        let run = lloyd(points, k, config.max_iter, rng);
        if best.as_ref().is_none_or(|b| run.wcss < b.wcss) {
            best = Some(run);
        }
    }
    let mut best = best.expect("at least one restart");
    best.labels = relabel_by_first_appearance(&best.labels);
    Ok(best)
}

fn lloyd<T: Scalar, R: Rng + ?Sized>(
    points: &DenseMatrix<T>,
    k: usize,
    max_iter: usize,
    rng: &mut R,
) -> Clustering<T> {
    let n = points.rows();
    let mut centers = plus_plus_seed(points, k, rng);
    let mut labels = vec![usize::MAX; n];
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        let mut changed = false;
        for i in 0..n {
            let (c, _) = nearest(points.row(i), &centers);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        if !changed && it > 0 {
            break;
        }
        centers = centroids(points, &labels, k);
        repair_empty(points, &mut centers, &mut labels, k);
    }
    let wcss = wcss(points, &centers, &labels);
    Clustering {
        labels,
        wcss,
        iterations,
    }
}

fn plus_plus_seed<T: Scalar, R: Rng + ?Sized>(
    points: &DenseMatrix<T>,
    k: usize,
    rng: &mut R,
) -> DenseMatrix<T> {
    let n = points.rows();
    let dim = points.cols();
    let mut centers = DenseMatrix::zeros(k, dim);
    let first = rng.gen_range(0..n);
    centers.row_mut(0).copy_from_slice(points.row(first));
    let mut d2: Vec<f64> = (0..n)
        .map(|i| sq_dist(points.row(i), centers.row(0)).as_f64())
        .collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    chosen = i;
                    break;
                }
            }
            while d2[chosen] == 0.0 && chosen > 0 {
                chosen -= 1;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centers.row_mut(c).copy_from_slice(points.row(pick));
        for (i, di) in d2.iter_mut().enumerate() {
            *di = di.min(sq_dist(points.row(i), centers.row(c)).as_f64());
        }
    }
    centers
}

fn nearest<T: Scalar>(p: &[T], centers: &DenseMatrix<T>) -> (usize, T) {
    let mut best = 0;
    let mut best_d = T::infinity();
    for c in 0..centers.rows() {
        let d = sq_dist(p, centers.row(c));
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    (best, best_d)
}

fn centroids<T: Scalar>(points: &DenseMatrix<T>, labels: &[usize], k: usize) -> DenseMatrix<T> {
    let mut centers = DenseMatrix::zeros(k, points.cols());
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (c, &x) in centers.row_mut(l).iter_mut().zip(points.row(i)) {
            *c += x;
        }
    }
    for (l, &cnt) in counts.iter().enumerate() {
        if cnt > 0 {
            let inv = T::one() / T::of_usize(cnt);
            for c in centers.row_mut(l) {
                *c *= inv;
            }
        }
    }
    centers
}

/// Moves each empty centre onto the point currently farthest from its own centre.
fn repair_empty<T: Scalar>(
    points: &DenseMatrix<T>,
    centers: &mut DenseMatrix<T>,
    labels: &mut [usize],
    k: usize,
) {
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut far = None;
        let mut far_d = T::neg_infinity();
        for i in 0..points.rows() {
            if counts[labels[i]] < 2 {
                continue;
            }
            let d = sq_dist(points.row(i), centers.row(labels[i]));
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        let Some(i) = far else { return };
        labels[i] = empty;
        *centers = centroids(points, labels, k);
    }
}

fn wcss<T: Scalar>(points: &DenseMatrix<T>, centers: &DenseMatrix<T>, labels: &[usize]) -> T {
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| sq_dist(points.row(i), centers.row(l)))
        .sum()
}

#[inline]
fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

fn count_distinct<T: Scalar>(points: &DenseMatrix<T>) -> usize {
    let mut rows: Vec<&[T]> = (0..points.rows()).map(|i| points.row(i)).collect();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rows.dedup();
    rows.len()
}

pub fn relabel_by_first_appearance(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}
