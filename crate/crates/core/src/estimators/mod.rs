//! Per-family estimators producing the plug-in probability matrix.

mod beta;
mod block;
mod dcmm;
mod lsm;
mod spectral;

pub use beta::{beta_residual, fit_beta, fit_beta_from, logit_degree_start};
pub use block::{fit_dcsbm, fit_dcsbm_with_labels, fit_sbm, fit_sbm_with_labels};
pub use dcmm::fit_dcmm;
pub use lsm::{ase_reconstruction, fit_lsm};
pub use spectral::{community_labels, Labeler};

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, ProbabilityMatrix};
use crate::models::MembershipMatrix;
use crate::numerics::{DenseMatrix, KMeansConfig};
use crate::scalar::Scalar;

/// Floor and ceiling margin applied to every fitted off-diagonal probability.
pub const EPS_CLIP: f64 = 1e-6;

/// Family plus structural hyperparameter of a model to be fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CandidateModel {
    Er,
    Beta,
    Sbm {
        k: usize,
    },
    Dcsbm {
        k: usize,
    },
    Dcmm {
        k: usize,
    },
    /// `signature = (a, b)` keeps the `a` largest positive and `b` most
    /// negative eigenvalues; `None` takes the top `d` by magnitude.
    Lsm {
        d: usize,
        signature: Option<(usize, usize)>,
    },
}

impl CandidateModel {
    pub fn family(&self) -> &'static str {
        match self {
            Self::Er => "er",
            Self::Beta => "beta",
            Self::Sbm { .. } => "sbm",
            Self::Dcsbm { .. } => "dcsbm",
            Self::Dcmm { .. } => "dcmm",
            Self::Lsm { .. } => "lsm",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Sbm { k } | Self::Dcsbm { k } | Self::Dcmm { k } if k == 0 => {
                Err(Error::InvalidArgument("K must be at least 1".into()))
            }
            Self::Lsm { d: 0, .. } => Err(Error::InvalidArgument("d must be at least 1".into())),
            Self::Lsm {
                d,
                signature: Some((a, b)),
            } if a + b != d => Err(Error::InvalidArgument(format!(
                "signature ({a}, {b}) does not sum to d = {d}"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for CandidateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Er => write!(f, "er"),
            Self::Beta => write!(f, "beta"),
            Self::Sbm { k } => write!(f, "sbm(k={k})"),
            Self::Dcsbm { k } => write!(f, "dcsbm(k={k})"),
            Self::Dcmm { k } => write!(f, "dcmm(k={k})"),
            Self::Lsm { d, signature: None } => write!(f, "lsm(d={d})"),
            Self::Lsm {
                d,
                signature: Some((a, b)),
            } => write!(f, "lsm(d={d},sig={a}:{b})"),
        }
    }
}

/// Knobs shared by the fitters. `Default` gives the documented defaults.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub labeler: Labeler,
    pub kmeans: KMeansConfig,
    pub beta_tol: f64,
    pub beta_max_iter: usize,
    pub dcmm_sweeps: usize,
    /// Vertex hunting runs on this many k-means centres per vertex.
    pub dcmm_sketch_per_vertex: usize,
    pub eps_clip: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            labeler: Labeler::Score,
            kmeans: KMeansConfig::default(),
            beta_tol: 1e-8,
            beta_max_iter: 500,
            dcmm_sweeps: 20,
            dcmm_sketch_per_vertex: 2,
            eps_clip: EPS_CLIP,
        }
    }
}

/// Estimated parameters; labels are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FittedParams<T> {
    Er {
        p: T,
    },
    Beta {
        beta: Vec<T>,
    },
    Sbm {
        labels: Vec<usize>,
        b: DenseMatrix<T>,
    },
    Dcsbm {
        labels: Vec<usize>,
        theta: Vec<T>,
        b: DenseMatrix<T>,
    },
    Dcmm {
        pi: MembershipMatrix<T>,
        theta: Vec<T>,
        b: DenseMatrix<T>,
    },
    /// Columns of `x` are ordered positive-signature first.
    Lsm {
        x: DenseMatrix<T>,
        signature: (usize, usize),
        eigenvalues: Vec<T>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub residual: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FittedModel<T = f64> {
    pub candidate: CandidateModel,
    pub params: FittedParams<T>,
    /// Clipped plug-in matrix used by the test.
    #[serde(skip)]
    pub phat: ProbabilityMatrix<T>,
    pub diagnostics: FitDiagnostics,
}

impl<T: Scalar> FittedModel<T> {
    pub(crate) fn assemble(
        candidate: CandidateModel,
        params: FittedParams<T>,
        raw: DenseMatrix<T>,
        diagnostics: FitDiagnostics,
        eps_clip: f64,
    ) -> Result<Self> {
        Ok(Self {
            candidate,
            params,
            phat: clip_matrix(raw, eps_clip)?,
            diagnostics,
        })
    }
}

/// Symmetrizes, clips off-diagonals into `[eps, 1 − eps]`, zeroes the diagonal.
pub(crate) fn clip_matrix<T: Scalar>(
    mut m: DenseMatrix<T>,
    eps: f64,
) -> Result<ProbabilityMatrix<T>> {
    let n = m.ensure_square()?;
    let lo = T::of(eps);
    let hi = T::one() - lo;
    for i in 0..n {
        m[(i, i)] = T::zero();
        for j in i + 1..n {
            let v = T::of(0.5) * (m[(i, j)] + m[(j, i)]);
            if v.is_nan() {
                return Err(Error::DegenerateInput(format!(
                    "fitted probability at ({i}, {j}) is NaN"
                )));
            }
            let v = v.max(lo).min(hi);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    ProbabilityMatrix::new(m)
}

/// `p̂ = Σ_{i≠j} A_ij / (n(n−1))`.
pub fn fit_er<T: Scalar>(a: &AdjacencyMatrix) -> Result<FittedModel<T>> {
    fit_er_with(a, &FitOptions::default())
}

fn fit_er_with<T: Scalar>(a: &AdjacencyMatrix, opts: &FitOptions) -> Result<FittedModel<T>> {
    let n = a.n();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n = {n} < 2")));
    }
    let p = T::of(2.0 * a.edge_count() as f64 / (n * (n - 1)) as f64);
    FittedModel::assemble(
        CandidateModel::Er,
        FittedParams::Er { p },
        DenseMatrix::from_fn(n, n, |_, _| p),
        FitDiagnostics::default(),
        opts.eps_clip,
    )
}

/// Fits `candidate` with default options.
pub fn fit<T: Scalar, R: Rng + ?Sized>(
    a: &AdjacencyMatrix,
    candidate: CandidateModel,
    rng: &mut R,
) -> Result<FittedModel<T>> {
    fit_with(a, candidate, &FitOptions::default(), rng)
}

pub fn fit_with<T: Scalar, R: Rng + ?Sized>(
    a: &AdjacencyMatrix,
    candidate: CandidateModel,
    opts: &FitOptions,
    rng: &mut R,
) -> Result<FittedModel<T>> {
    candidate.validate()?;
    if a.n() < 2 {
        return Err(Error::InvalidArgument(format!("n = {} < 2", a.n())));
    }
    match candidate {
        CandidateModel::Er => fit_er_with(a, opts),
        CandidateModel::Beta => beta::fit_beta_with(a, None, opts),
        CandidateModel::Sbm { k } => block::fit_sbm_with(a, k, opts, rng),
        CandidateModel::Dcsbm { k } => block::fit_dcsbm_with(a, k, opts, rng),
        CandidateModel::Dcmm { k } => dcmm::fit_dcmm_with(a, k, opts, rng),
        CandidateModel::Lsm { d, signature } => lsm::fit_lsm_with(a, d, signature, opts),
    }
}
