//! Dense symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form followed by the implicit QL
//! iteration (the EISPACK `tred2`/`tql2` pair). When only a few leading pairs
//! are requested the reflectors are not accumulated: eigenvalues come from the
//! value-only QL sweep, the selected eigenvectors from inverse iteration on the
//! tridiagonal matrix, and the reflectors are applied afterwards.

use crate::error::{Error, Result};
use crate::numerics::matrix::{dot, DenseMatrix};
use crate::numerics::rng::splitmix64;
use crate::scalar::Scalar;

const QL_MAX_SWEEPS: usize = 60;
const INVERSE_ITERATION_PASSES: usize = 4;

/// Leading eigenpairs ordered by descending `|λ|`.
#[derive(Debug, Clone)]
pub struct EigenPairs<T> {
    pub values: Vec<T>,
    /// `n × k`, one eigenvector per column.
    pub vectors: DenseMatrix<T>,
}

impl<T: Scalar> EigenPairs<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, s: usize) -> Vec<T> {
        self.vectors.column(s)
    }

    /// `max_s ‖M v_s − λ_s v_s‖∞`.
    pub fn max_residual(&self, m: &DenseMatrix<T>) -> T {
        let mut worst = T::zero();
        for s in 0..self.len() {
            let v = self.vector(s);
            let mv = m.mat_vec(&v);
            for (a, b) in mv.iter().zip(&v) {
                worst = worst.max((*a - self.values[s] * *b).abs());
            }
        }
        worst
    }
}

/// Top-`k` eigenpairs of a symmetric matrix by magnitude.
///
/// Each eigenvector is sign-normalized so that its largest-magnitude entry
/// is positive (earliest index wins ties). Only the lower triangle is read.
pub fn sym_eigs<T: Scalar>(m: &DenseMatrix<T>, k: usize) -> Result<EigenPairs<T>> {
    let n = m.ensure_square()?;
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs of a {n}x{n} matrix"
        )));
    }
    let tri = Tridiagonal::reduce(m);
    if n <= 32 || 3 * k >= n {
        let mut basis = tri.accumulate();
        let mut d = tri.diag.clone();
        let mut e = tri.off.clone();
        ql_implicit(&mut d, &mut e, Some(&mut basis))?;
        let order = leading_order(&d, k);
        let mut vectors = DenseMatrix::zeros(n, k);
        for (s, &idx) in order.iter().enumerate() {
            let mut v = basis.row(idx).to_vec();
            fix_sign(&mut v);
            for (i, x) in v.into_iter().enumerate() {
                vectors[(i, s)] = x;
            }
        }
        return Ok(EigenPairs {
            values: order.iter().map(|&i| d[i]).collect(),
            vectors,
        });
    }

    let mut d = tri.diag.clone();
    let mut e = tri.off.clone();
    ql_implicit(&mut d, &mut e, None)?;
    let order = leading_order(&d, k);
    let values: Vec<T> = order.iter().map(|&i| d[i]).collect();
    let tri_vectors = tridiagonal_vectors(&tri.diag, &tri.off, &values);
    let mut vectors = DenseMatrix::zeros(n, k);
    for (s, mut v) in tri_vectors.into_iter().enumerate() {
        tri.apply_q(&mut v);
        fix_sign(&mut v);
        for (i, x) in v.into_iter().enumerate() {
            vectors[(i, s)] = x;
        }
    }
    Ok(EigenPairs { values, vectors })
}

/// All eigenvalues, descending by magnitude.
pub fn sym_eigenvalues<T: Scalar>(m: &DenseMatrix<T>) -> Result<Vec<T>> {
    let n = m.ensure_square()?;
    let tri = Tridiagonal::reduce(m);
    let mut d = tri.diag;
    let mut e = tri.off;
    ql_implicit(&mut d, &mut e, None)?;
    Ok(leading_order(&d, n).into_iter().map(|i| d[i]).collect())
}

fn leading_order<T: Scalar>(d: &[T], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.sort_by(|&a, &b| {
        d[b].abs()
            .partial_cmp(&d[a].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(d[b].partial_cmp(&d[a]).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    idx
}

fn fix_sign<T: Scalar>(v: &mut [T]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < T::zero()) {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// `A = Q T Qᵀ` with `Q = H₀ H₁ ⋯ H_{n−3}`, `Hₖ = I − βₖ vₖ vₖᵀ`.
struct Tridiagonal<T> {
    n: usize,
    diag: Vec<T>,
    /// `off[i] = T[i, i+1]`; the last entry is zero.
    off: Vec<T>,
    reflectors: Vec<(Vec<T>, T)>,
}

impl<T: Scalar> Tridiagonal<T> {
    fn reduce(m: &DenseMatrix<T>) -> Self {
        let n = m.rows();
        // Symmetrize from the lower triangle.
        let mut a = DenseMatrix::from_fn(n, n, |i, j| if i >= j { m[(i, j)] } else { m[(j, i)] });
        let mut off = vec![T::zero(); n];
        let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
        for k in 0..n.saturating_sub(2) {
            let len = n - k - 1;
            let x: Vec<T> = (0..len).map(|i| a[(k + 1 + i, k)]).collect();
            let norm = dot(&x, &x).sqrt();
            let tail = dot(&x[1..], &x[1..]);
            if norm == T::zero() || tail == T::zero() {
                off[k] = x[0];
                reflectors.push((Vec::new(), T::zero()));
                continue;
            }
            let alpha = if x[0] > T::zero() { -norm } else { norm };
            let mut v = x;
            v[0] -= alpha;
            let beta = T::of(2.0) / dot(&v, &v);
            off[k] = alpha;

            // p = β A₂₂ v ; w = p − (β/2)(pᵀv) v ; A₂₂ −= v wᵀ + w vᵀ
            let base = k + 1;
            let mut p = vec![T::zero(); len];
            for (i, pi) in p.iter_mut().enumerate() {
                let row = &a.row(base + i)[base..];
                *pi = beta * dot(row, &v);
            }
            let half = T::of(0.5) * beta * dot(&p, &v);
            let w: Vec<T> = p.iter().zip(&v).map(|(&pi, &vi)| pi - half * vi).collect();
            for i in 0..len {
                let (vi, wi) = (v[i], w[i]);
                let row = &mut a.row_mut(base + i)[base..];
                for j in 0..len {
                    row[j] -= vi * w[j] + wi * v[j];
                }
            }
            reflectors.push((v, beta));
        }
        if n >= 2 {
            off[n - 2] = a[(n - 1, n - 2)];
        }
        let diag = (0..n).map(|i| a[(i, i)]).collect();
        Self {
            n,
            diag,
            off,
            reflectors,
        }
    }

    /// `y ← Q y`.
    fn apply_q(&self, y: &mut [T]) {
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            if v.is_empty() {
                continue;
            }
            let seg = &mut y[k + 1..];
            let s = *beta * dot(v, seg);
            for (yi, &vi) in seg.iter_mut().zip(v) {
                *yi -= s * vi;
            }
        }
    }

    /// Rows of the returned matrix are the columns of `Q`.
    fn accumulate(&self) -> DenseMatrix<T> {
        let n = self.n;
        let mut q = DenseMatrix::identity(n);
        // Q = H₀(H₁(⋯ I)); each reflector acts on rows k+1.. of the partial product.
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            if v.is_empty() {
                continue;
            }
            let base = k + 1;
            let mut s = vec![T::zero(); n];
            for (i, &vi) in v.iter().enumerate() {
                for (sj, &qj) in s.iter_mut().zip(q.row(base + i)) {
                    *sj += vi * qj;
                }
            }
            for (i, &vi) in v.iter().enumerate() {
                let f = *beta * vi;
                for (qj, &sj) in q.row_mut(base + i).iter_mut().zip(&s) {
                    *qj -= f * sj;
                }
            }
        }
        q.transpose()
    }
}

/// Implicit QL on a symmetric tridiagonal matrix.
///
/// On exit `d` holds the eigenvalues. When `basis` is given its rows are
/// rotated along, so rows that started as the columns of `Q` end as eigenvectors.
fn ql_implicit<T: Scalar>(
    d: &mut [T],
    e: &mut [T],
    mut basis: Option<&mut DenseMatrix<T>>,
) -> Result<()> {
    let n = d.len();
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > QL_MAX_SWEEPS {
                    return Err(Error::EigenNoConvergence { iterations: sweeps });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (T::of(2.0) * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = basis.as_deref_mut() {
                        rotate_rows(z, i, s, c);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

#[inline]
fn rotate_rows<T: Scalar>(z: &mut DenseMatrix<T>, i: usize, s: T, c: T) {
    let n = z.cols();
    for k in 0..n {
        let h = z[(i + 1, k)];
        let zi = z[(i, k)];
        z[(i + 1, k)] = s * zi + c * h;
        z[(i, k)] = c * zi - s * h;
    }
}

/// Eigenvectors of the tridiagonal `(diag, off)` for the given eigenvalues,
/// by inverse iteration with Gram-Schmidt inside clusters.
fn tridiagonal_vectors<T: Scalar>(diag: &[T], off: &[T], values: &[T]) -> Vec<Vec<T>> {
    let n = diag.len();
    let norm = (0..n)
        .map(|i| diag[i].abs() + off[i].abs() + if i > 0 { off[i - 1].abs() } else { T::zero() })
        .fold(T::zero(), T::max)
        .max(T::min_positive_value());
    let cluster_tol = T::of(1e-3) * norm;
    let mut out: Vec<Vec<T>> = Vec::with_capacity(values.len());
    for (s, &lambda) in values.iter().enumerate() {
        let lu = TridiagonalLu::factor(diag, off, lambda, norm);
        let mut x: Vec<T> = (0..n)
            .map(|i| {
                let h = splitmix64((s as u64) << 32 ^ i as u64);
                T::of((h >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
            })
            .collect();
        let neighbours: Vec<usize> = (0..s)
            .filter(|&t| (values[t] - lambda).abs() <= cluster_tol)
            .collect();
        for _ in 0..INVERSE_ITERATION_PASSES {
            normalize(&mut x);
            let mut y = lu.solve(&x);
            if y.iter().any(|v| !v.is_finite()) {
                // Rescale the right-hand side and retry once; exact singularity is perturbed away in the factor.
                let tiny: Vec<T> = x.iter().map(|&v| v * T::epsilon()).collect();
                y = lu.solve(&tiny);
            }
            for &t in &neighbours {
                let proj = dot(&y, &out[t]);
                for (yi, &oi) in y.iter_mut().zip(&out[t]) {
                    *yi -= proj * oi;
                }
            }
            x = y;
        }
        normalize(&mut x);
        out.push(x);
    }
    out
}

fn normalize<T: Scalar>(x: &mut [T]) {
    let scale = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if scale == T::zero() || !scale.is_finite() {
        return;
    }
    for v in x.iter_mut() {
        *v /= scale;
    }
    let nrm = dot(x, x).sqrt();
    for v in x.iter_mut() {
        *v /= nrm;
    }
}

/// LU factorization with partial pivoting of `T − σI` (tridiagonal).
struct TridiagonalLu<T> {
    upper: Vec<[T; 3]>,
    mult: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Scalar> TridiagonalLu<T> {
    fn factor(diag: &[T], off: &[T], sigma: T, norm: T) -> Self {
        let n = diag.len();
        let tiny = T::epsilon() * norm;
        let mut upper = Vec::with_capacity(n);
        let mut mult = Vec::with_capacity(n.saturating_sub(1));
        let mut swapped = Vec::with_capacity(n.saturating_sub(1));
        let mut cur = [
            diag[0] - sigma,
            if n > 1 { off[0] } else { T::zero() },
            T::zero(),
        ];
        for i in 0..n.saturating_sub(1) {
            let next = [
                off[i],
                diag[i + 1] - sigma,
                if i + 2 < n { off[i + 1] } else { T::zero() },
            ];
            let (pivot_row, other) = if cur[0].abs() >= next[0].abs() {
                swapped.push(false);
                (cur, next)
            } else {
                swapped.push(true);
                (next, cur)
            };
            let mut pivot_row = pivot_row;
            if pivot_row[0].abs() < tiny {
                pivot_row[0] = if pivot_row[0] < T::zero() {
                    -tiny
                } else {
                    tiny
                };
            }
            let l = other[0] / pivot_row[0];
            mult.push(l);
            upper.push(pivot_row);
            cur = [
                other[1] - l * pivot_row[1],
                other[2] - l * pivot_row[2],
                T::zero(),
            ];
        }
        if cur[0].abs() < tiny {
            cur[0] = if cur[0] < T::zero() { -tiny } else { tiny };
        }
        upper.push(cur);
        Self {
            upper,
            mult,
            swapped,
        }
    }

    fn solve(&self, rhs: &[T]) -> Vec<T> {
        let n = rhs.len();
        let mut b = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] = b[i + 1] - self.mult[i] * b[i];
        }
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let u = self.upper[i];
            let mut acc = b[i];
            if i + 1 < n {
                acc -= u[1] * x[i + 1];
            }
            if i + 2 < n {
                acc -= u[2] * x[i + 2];
            }
            x[i] = acc / u[0];
        }
        x
    }
}
