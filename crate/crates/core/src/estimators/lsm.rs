use super::{CandidateModel, FitDiagnostics, FitOptions, FittedModel, FittedParams};
use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;
use crate::numerics::{sym_eigs, DenseMatrix, EigenPairs};
use crate::scalar::Scalar;

/// Adjacency spectral embedding with `d` dimensions.
pub fn fit_lsm<T: Scalar>(
    a: &AdjacencyMatrix,
    d: usize,
    signature: Option<(usize, usize)>,
) -> Result<FittedModel<T>> {
    fit_lsm_with(a, d, signature, &FitOptions::default())
}

pub(super) fn fit_lsm_with<T: Scalar>(
    a: &AdjacencyMatrix,
    d: usize,
    signature: Option<(usize, usize)>,
    opts: &FitOptions,
) -> Result<FittedModel<T>> {
    let (x, sig, values) = embed(&a.to_dense::<T>(), d, signature)?;
    let raw = gram(&x, sig);
    FittedModel::assemble(
        CandidateModel::Lsm { d, signature },
        FittedParams::Lsm {
            x,
            signature: sig,
            eigenvalues: values,
        },
        raw,
        FitDiagnostics::default(),
        opts.eps_clip,
    )
}

/// Unclipped `Σ_s λ_s ξ_s ξ_sᵀ` over the selected `d` pairs of `m`.
pub fn ase_reconstruction<T: Scalar>(
    m: &DenseMatrix<T>,
    d: usize,
    signature: Option<(usize, usize)>,
) -> Result<DenseMatrix<T>> {
    let (x, sig, _) = embed(m, d, signature)?;
    Ok(gram(&x, sig))
}

/// `X̂ = Ξ|Λ|^{1/2}` with positive-eigenvalue columns first.
fn embed<T: Scalar>(
    m: &DenseMatrix<T>,
    d: usize,
    signature: Option<(usize, usize)>,
) -> Result<(DenseMatrix<T>, (usize, usize), Vec<T>)> {
    let n = m.ensure_square()?;
    if d == 0 || d > n {
        return Err(Error::InvalidArgument(format!("d = {d} outside 1..={n}")));
    }
    let (pairs, chosen): (EigenPairs<T>, Vec<usize>) = match signature {
        None => {
            let pairs = sym_eigs(m, d)?;
            let mut chosen: Vec<usize> = (0..d).filter(|&s| pairs.values[s] > T::zero()).collect();
            chosen.extend((0..d).filter(|&s| pairs.values[s] <= T::zero()));
            (pairs, chosen)
        }
        Some((pos, neg)) => {
            if pos + neg != d {
                return Err(Error::InvalidArgument(format!(
                    "signature ({pos}, {neg}) does not sum to d = {d}"
                )));
            }
            let pairs = sym_eigs(m, n)?;
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&x, &y| {
                pairs.values[y]
                    .partial_cmp(&pairs.values[x])
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            let mut chosen: Vec<usize> = order[..pos].to_vec();
            chosen.extend(order.iter().rev().take(neg));
            (pairs, chosen)
        }
    };
    let pos = chosen
        .iter()
        .filter(|&&s| pairs.values[s] > T::zero())
        .count();
    let sig = match signature {
        Some(s) => s,
        None => (pos, d - pos),
    };
    let x = DenseMatrix::from_fn(n, d, |i, c| {
        let s = chosen[c];
        pairs.vectors[(i, s)] * pairs.values[s].abs().sqrt()
    });
    let values = chosen.iter().map(|&s| pairs.values[s]).collect();
    Ok((x, sig, values))
}

fn gram<T: Scalar>(x: &DenseMatrix<T>, signature: (usize, usize)) -> DenseMatrix<T> {
    let n = x.rows();
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut s = T::zero();
            for (c, (&u, &v)) in x.row(i).iter().zip(x.row(j)).enumerate() {
                if c < signature.0 {
                    s += u * v;
                } else {
                    s -= u * v;
                }
            }
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    out
}
