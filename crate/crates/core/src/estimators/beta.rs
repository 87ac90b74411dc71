use super::{CandidateModel, FitDiagnostics, FitOptions, FittedModel, FittedParams};
use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;
use crate::models::logistic;
use crate::numerics::DenseMatrix;
use crate::scalar::Scalar;

/// β-model MLE by the fixed point `βᵢ ← log dᵢ − log Σ_{j≠i} 1/(e^{−βⱼ} + e^{βᵢ})`
/// from `β⁰ = 0`, stopping once the score residual is at most `tol`.
///
/// The iteration itself always runs in `f64`; only the result is cast to `T`.
pub fn fit_beta<T: Scalar>(
    a: &AdjacencyMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<FittedModel<T>> {
    let opts = FitOptions {
        beta_tol: tol,
        beta_max_iter: max_iter,
        ..FitOptions::default()
    };
    fit_beta_with(a, None, &opts)
}

/// As [`fit_beta`] from an explicit starting vector.
pub fn fit_beta_from<T: Scalar>(
    a: &AdjacencyMatrix,
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<FittedModel<T>> {
    let opts = FitOptions {
        beta_tol: tol,
        beta_max_iter: max_iter,
        ..FitOptions::default()
    };
    fit_beta_with(a, Some(start), &opts)
}

/// `βᵢ = ½ logit(dᵢ/(n−1))`, exact when all degrees agree.
pub fn logit_degree_start(a: &AdjacencyMatrix) -> Vec<f64> {
    let n = a.n() as f64;
    a.degrees()
        .0
        .iter()
        .map(|&d| {
            let q = (d as f64 / (n - 1.0)).clamp(1e-9, 1.0 - 1e-9);
            0.5 * (q / (1.0 - q)).ln()
        })
        .collect()
}

/// `max_i |Σ_{j≠i} logistic(βᵢ + βⱼ) − dᵢ|`.
pub fn beta_residual(a: &AdjacencyMatrix, beta: &[f64]) -> f64 {
    let degrees = a.degrees();
    residuals(beta, &degrees.0)
        .into_iter()
        .fold(0.0, |m, r| m.max(r.abs()))
}

fn residuals(beta: &[f64], degrees: &[usize]) -> Vec<f64> {
    let n = beta.len();
    (0..n)
        .map(|i| {
            let mut s = 0.0;
            for j in 0..n {
                if j != i {
                    s += logistic(beta[i] + beta[j]);
                }
            }
            s - degrees[i] as f64
        })
        .collect()
}

pub(super) fn fit_beta_with<T: Scalar>(
    a: &AdjacencyMatrix,
    start: Option<&[f64]>,
    opts: &FitOptions,
) -> Result<FittedModel<T>> {
    let n = a.n();
    let degrees = a.degrees().0;
    let bad: Vec<usize> = (0..n)
        .filter(|&i| degrees[i] == 0 || degrees[i] == n - 1)
        .collect();
    if !bad.is_empty() {
        return Err(Error::MleNonexistence { nodes: bad });
    }
    let mut beta = match start {
        Some(s) if s.len() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.len(),
            })
        }
        Some(s) => s.to_vec(),
        None => vec![0.0; n],
    };
    let log_d: Vec<f64> = degrees.iter().map(|&d| (d as f64).ln()).collect();
    let mut iterations = 0;
    let mut resid = residuals(&beta, &degrees);
    let mut worst = max_abs(&resid);
    while worst > opts.beta_tol {
        if iterations == opts.beta_max_iter || !worst.is_finite() {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&x, &y| resid[y].abs().total_cmp(&resid[x].abs()));
            order.truncate(5);
            return Err(Error::MleNonConvergence {
                iterations,
                residual: worst,
                worst: order,
            });
        }
        let exp_neg: Vec<f64> = beta.iter().map(|b| (-b).exp()).collect();
        let next: Vec<f64> = (0..n)
            .map(|i| {
                let e = beta[i].exp();
                let mut s = 0.0;
                for j in 0..n {
                    if j != i {
                        s += 1.0 / (exp_neg[j] + e);
                    }
                }
                log_d[i] - s.ln()
            })
            .collect();
        beta = next;
        iterations += 1;
        resid = residuals(&beta, &degrees);
        worst = max_abs(&resid);
    }
    let raw = DenseMatrix::from_fn(n, n, |i, j| T::of(logistic(beta[i] + beta[j])));
    FittedModel::assemble(
        CandidateModel::Beta,
        FittedParams::Beta {
            beta: beta.iter().map(|&b| T::of(b)).collect(),
        },
        raw,
        FitDiagnostics {
            iterations,
            residual: worst,
            warnings: Vec::new(),
        },
        opts.eps_clip,
    )
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, r| m.max(r.abs()))
}
