//! Mixed-membership fit: SCORE ratios, successive-projection vertex hunting,
//! barycentric memberships, then alternating least squares on `θ` and `B`.

use rand::Rng;

use super::spectral::score_ratios;
use super::{CandidateModel, FitDiagnostics, FitOptions, FittedModel, FittedParams};
use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;
use crate::models::MembershipMatrix;
use crate::numerics::linsolve::solve;
use crate::numerics::{kmeans, spa_vertices, sym_eigs, DenseMatrix};
use crate::scalar::Scalar;

const THETA_FLOOR: f64 = 1e-10;

pub fn fit_dcmm<T: Scalar, R: Rng + ?Sized>(
    a: &AdjacencyMatrix,
    k: usize,
    rng: &mut R,
) -> Result<FittedModel<T>> {
    fit_dcmm_with(a, k, &FitOptions::default(), rng)
}

pub(super) fn fit_dcmm_with<T: Scalar, R: Rng + ?Sized>(
    a: &AdjacencyMatrix,
    k: usize,
    opts: &FitOptions,
    rng: &mut R,
) -> Result<FittedModel<T>> {
    fit_dcmm_matrix(&a.to_dense(), k, opts, rng)
}

/// Runs the pipeline on any symmetric matrix; the diagonal is never used as data.
pub(crate) fn fit_dcmm_matrix<T: Scalar, R: Rng + ?Sized>(
    m: &DenseMatrix<T>,
    k: usize,
    opts: &FitOptions,
    rng: &mut R,
) -> Result<FittedModel<T>> {
    let n = m.ensure_square()?;
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("K = {k} outside 1..={n}")));
    }
    if k == 1 {
        return rank_one(m, opts);
    }
    let mut warnings = Vec::new();
    let pairs = sym_eigs(m, k)?;
    let lambda = &pairs.values;
    if lambda[0] <= T::zero() {
        return Err(Error::DegenerateInput(
            "leading eigenvalue is not positive".into(),
        ));
    }
    let (ratios, zeros) = score_ratios(&pairs);
    if zeros > 0 {
        warnings.push(format!(
            "{zeros} nodes have a zero leading-eigenvector entry"
        ));
    }

    let vertices = hunt_vertices(&ratios, k, opts, rng)?;
    // Column c of `simplex` is (1, v_c).
    let simplex = DenseMatrix::from_fn(k, k, |s, c| {
        if s == 0 {
            T::one()
        } else {
            vertices[(c, s - 1)]
        }
    });
    let rel_tol = T::of(1e-10);

    let mut b1 = vec![T::zero(); k];
    for (c, b) in b1.iter_mut().enumerate() {
        let mut q = lambda[0];
        for s in 1..k {
            let v = simplex[(s, c)];
            q += lambda[s] * v * v;
        }
        *b = if q > T::zero() {
            T::one() / q.sqrt()
        } else {
            warnings.push(format!(
                "vertex {c} has a nonpositive scale; using the leading eigenvalue"
            ));
            T::one() / lambda[0].sqrt()
        };
    }

    let mut pi = DenseMatrix::zeros(n, k);
    let mut theta = vec![T::zero(); n];
    let mut rhs = vec![T::one(); k];
    for i in 0..n {
        rhs[1..].copy_from_slice(ratios.row(i));
        let w = solve(&simplex, &rhs, rel_tol).map_err(|_| {
            Error::DegenerateSimplex(format!("vertex matrix for K = {k} is singular"))
        })?;
        let mut row: Vec<T> = w
            .iter()
            .zip(&b1)
            .map(|(&x, &b)| x.max(T::zero()) / b)
            .collect();
        let total: T = row.iter().copied().sum();
        if total > T::zero() {
            row.iter_mut().for_each(|x| *x /= total);
        } else {
            row.iter_mut().for_each(|x| *x = T::one() / T::of_usize(k));
        }
        let scale: T = row.iter().zip(&b1).map(|(&p, &b)| p * b).sum();
        theta[i] = (pairs.vectors[(i, 0)] / scale).max(T::of(THETA_FLOOR));
        pi.row_mut(i).copy_from_slice(&row);
    }

    // B = diag(b1) Ṽ Λ Ṽᵀ diag(b1), with Ṽ's rows (1, v_c).
    let mut b = DenseMatrix::from_fn(k, k, |c, e| {
        let mut s = T::zero();
        for t in 0..k {
            s += simplex[(t, c)] * lambda[t] * simplex[(t, e)];
        }
        b1[c] * s * b1[e]
    });
    unit_diagonal(&mut b, &mut pi, &mut theta, &mut warnings);

    for _ in 0..opts.dcmm_sweeps {
        match b_step(m, &pi, &theta) {
            Ok(next) => b = next,
            Err(_) => {
                warnings.push("block update was singular; kept the previous B".into());
                break;
            }
        }
        theta_step(m, &pi, &b, &mut theta);
        unit_diagonal(&mut b, &mut pi, &mut theta, &mut warnings);
    }
    warnings.dedup();

    let raw = reconstruct(&pi, &b, &theta);
    let residual = off_diagonal_sse(m, &raw).as_f64();
    FittedModel::assemble(
        CandidateModel::Dcmm { k },
        FittedParams::Dcmm {
            pi: MembershipMatrix::new(pi)?,
            theta,
            b,
        },
        raw,
        FitDiagnostics {
            iterations: opts.dcmm_sweeps,
            residual,
            warnings,
        },
        opts.eps_clip,
    )
}

/// Successive projection on k-means centres of the ratio rows, which damps
/// the pull of individual noisy rows. Returns the `K` vertices as rows.
fn hunt_vertices<T: Scalar, R: Rng + ?Sized>(
    ratios: &DenseMatrix<T>,
    k: usize,
    opts: &FitOptions,
    rng: &mut R,
) -> Result<DenseMatrix<T>> {
    let n = ratios.rows();
    let sketch = (opts.dcmm_sketch_per_vertex.max(1) * k).min(n);
    let centres = match kmeans(ratios, sketch, opts.kmeans, rng) {
        Ok(c) => {
            let dim = ratios.cols();
            let mut sums = DenseMatrix::<T>::zeros(sketch, dim);
            let mut counts = vec![0usize; sketch];
            for (i, &l) in c.labels.iter().enumerate() {
                counts[l] += 1;
                for (o, &x) in sums.row_mut(l).iter_mut().zip(ratios.row(i)) {
                    *o += x;
                }
            }
            DenseMatrix::from_fn(sketch, dim, |l, s| {
                sums[(l, s)] / T::of_usize(counts[l].max(1))
            })
        }
        Err(Error::TooFewDistinctPoints { .. }) => ratios.clone(),
        Err(e) => return Err(e),
    };
    let idx = spa_vertices(&centres, k)?;
    Ok(DenseMatrix::from_fn(k, centres.cols(), |c, s| {
        centres[(idx[c], s)]
    }))
}

/// `p̂ = θ̂θ̂ᵀ` with `θ̂ = √λ₁ ξ₁`.
fn rank_one<T: Scalar>(m: &DenseMatrix<T>, opts: &FitOptions) -> Result<FittedModel<T>> {
    let n = m.rows();
    let pairs = sym_eigs(m, 1)?;
    let l1 = pairs.values[0];
    if l1 <= T::zero() {
        return Err(Error::DegenerateInput(
            "leading eigenvalue is not positive".into(),
        ));
    }
    let root = l1.sqrt();
    let theta: Vec<T> = (0..n)
        .map(|i| (pairs.vectors[(i, 0)] * root).max(T::zero()))
        .collect();
    let pi = DenseMatrix::from_fn(n, 1, |_, _| T::one());
    let b = DenseMatrix::from_fn(1, 1, |_, _| T::one());
    let raw = reconstruct(&pi, &b, &theta);
    let residual = off_diagonal_sse(m, &raw).as_f64();
    FittedModel::assemble(
        CandidateModel::Dcmm { k: 1 },
        FittedParams::Dcmm {
            pi: MembershipMatrix::new(pi)?,
            theta,
            b,
        },
        raw,
        FitDiagnostics {
            iterations: 0,
            residual,
            warnings: Vec::new(),
        },
        opts.eps_clip,
    )
}

/// Rescales so that `diag(B) = 1` without changing `ΘΠBΠᵀΘ`.
fn unit_diagonal<T: Scalar>(
    b: &mut DenseMatrix<T>,
    pi: &mut DenseMatrix<T>,
    theta: &mut [T],
    warnings: &mut Vec<String>,
) {
    let k = b.rows();
    let d: Vec<T> = (0..k)
        .map(|c| {
            if b[(c, c)] > T::zero() {
                b[(c, c)].sqrt()
            } else {
                warnings.push(format!("B[{c},{c}] is not positive; left unnormalized"));
                T::one()
            }
        })
        .collect();
    for c in 0..k {
        for e in 0..k {
            b[(c, e)] /= d[c] * d[e];
        }
    }
    for (i, t) in theta.iter_mut().enumerate() {
        let row = pi.row_mut(i);
        let mut s = T::zero();
        for (x, &dc) in row.iter_mut().zip(&d) {
            *x *= dc;
            s += *x;
        }
        if s > T::zero() {
            row.iter_mut().for_each(|x| *x /= s);
            *t *= s;
        }
    }
}

/// Least-squares `B` for fixed `U = ΘΠ` over the off-diagonal entries:
/// `G B G − Σᵢ uᵢuᵢᵀ B uᵢuᵢᵀ = Σ_{i≠j} A_ij uᵢu_jᵀ`, `G = UᵀU`.
fn b_step<T: Scalar>(
    m: &DenseMatrix<T>,
    pi: &DenseMatrix<T>,
    theta: &[T],
) -> Result<DenseMatrix<T>> {
    let n = m.rows();
    let k = pi.cols();
    let u = DenseMatrix::from_fn(n, k, |i, c| theta[i] * pi[(i, c)]);
    let mut au = DenseMatrix::zeros(n, k);
    for i in 0..n {
        let row = m.row(i);
        let out = au.row_mut(i);
        for (j, &a) in row.iter().enumerate() {
            if j == i || a == T::zero() {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(u.row(j)) {
                *o += a * x;
            }
        }
    }
    let rhs_m = u.transpose().matmul(&au)?;
    let g = u.transpose().matmul(&u)?;
    let kk = k * k;
    let mut fourth = vec![T::zero(); kk * kk];
    for i in 0..n {
        let r = u.row(i);
        for p in 0..k {
            for q in 0..k {
                let pq = r[p] * r[q];
                if pq == T::zero() {
                    continue;
                }
                for s in 0..k {
                    for t in 0..k {
                        fourth[(p * k + q) * kk + s * k + t] += pq * r[s] * r[t];
                    }
                }
            }
        }
    }
    // Row (r, s) of the operator applied to vec(B) with index (p, q).
    let op = DenseMatrix::from_fn(kk, kk, |rs, pq| {
        let (r, s) = (rs / k, rs % k);
        let (p, q) = (pq / k, pq % k);
        g[(r, p)] * g[(q, s)] - fourth[(r * k + p) * kk + q * k + s]
    });
    let x = solve(&op, rhs_m.as_slice(), T::of(1e-12))?;
    Ok(DenseMatrix::from_fn(k, k, |c, e| {
        T::of(0.5) * (x[c * k + e] + x[e * k + c])
    }))
}

/// Coordinate-wise least squares for each `θᵢ` with the others held fixed.
fn theta_step<T: Scalar>(
    m: &DenseMatrix<T>,
    pi: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    theta: &mut [T],
) {
    let n = m.rows();
    let k = pi.cols();
    let floor = T::of(THETA_FLOOR);
    let weighted = pi.matmul(b).expect("shapes agree");
    for i in 0..n {
        let w = weighted.row(i);
        let row = m.row(i);
        let mut num = T::zero();
        let mut den = T::zero();
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut c = T::zero();
            for e in 0..k {
                c += w[e] * pi[(j, e)];
            }
            c *= theta[j];
            num += row[j] * c;
            den += c * c;
        }
        if den > T::zero() {
            theta[i] = (num / den).max(floor);
        }
    }
}

fn reconstruct<T: Scalar>(pi: &DenseMatrix<T>, b: &DenseMatrix<T>, theta: &[T]) -> DenseMatrix<T> {
    let n = pi.rows();
    let weighted = pi.matmul(b).expect("shapes agree");
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = theta[i] * theta[j] * crate::numerics::matrix::dot(weighted.row(i), pi.row(j));
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

fn off_diagonal_sse<T: Scalar>(m: &DenseMatrix<T>, p: &DenseMatrix<T>) -> T {
    let n = m.rows();
    let mut s = T::zero();
    for i in 0..n {
        for j in i + 1..n {
            let d = m[(i, j)] - p[(i, j)];
            s += d * d;
        }
    }
    s + s
}
