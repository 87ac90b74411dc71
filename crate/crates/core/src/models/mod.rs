//! Ground-truth random-graph models and the Bernoulli sampler.

mod presets;

pub use presets::{beta_ln_schedule, Preset};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, ProbabilityMatrix};
use crate::numerics::DenseMatrix;
use crate::scalar::Scalar;

/// `n × K` nonnegative matrix whose rows sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipMatrix<T = f64> {
    inner: DenseMatrix<T>,
}

impl<T: Scalar> MembershipMatrix<T> {
    pub fn new(m: DenseMatrix<T>) -> Result<Self> {
        let tol = T::of(1e-12).max(T::epsilon() * T::of(16.0));
        for i in 0..m.rows() {
            let row = m.row(i);
            if let Some(j) = row.iter().position(|x| !(*x >= T::zero())) {
                return Err(Error::InvalidArgument(format!(
                    "membership ({i}, {j}) is negative or NaN"
                )));
            }
            let s: T = row.iter().copied().sum();
            if (s - T::one()).abs() > tol {
                return Err(Error::InvalidArgument(format!(
                    "membership row {i} sums to {s}"
                )));
            }
        }
        Ok(Self { inner: m })
    }

    /// One-hot rows from zero-based labels.
    pub fn pure(labels: &[usize], k: usize) -> Result<Self> {
        check_labels(labels, k)?;
        Ok(Self {
            inner: DenseMatrix::from_fn(labels.len(), k, |i, c| {
                if labels[i] == c {
                    T::one()
                } else {
                    T::zero()
                }
            }),
        })
    }

    pub fn n(&self) -> usize {
        self.inner.rows()
    }

    pub fn k(&self) -> usize {
        self.inner.cols()
    }

    pub fn row(&self, i: usize) -> &[T] {
        self.inner.row(i)
    }

    pub fn as_matrix(&self) -> &DenseMatrix<T> {
        &self.inner
    }

    /// Index of the pure community of node `i`, if its row is one-hot.
    pub fn pure_label(&self, i: usize) -> Option<usize> {
        let row = self.row(i);
        let j = row.iter().position(|&x| x == T::one())?;
        row.iter()
            .enumerate()
            .all(|(c, &x)| c == j || x == T::zero())
            .then_some(j)
    }

    /// Maps every row `y` to `Q y` for a `k × l` matrix `Q` with unit column sums.
    pub fn transform(&self, q: &DenseMatrix<T>) -> Result<Self> {
        if q.cols() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                found: q.cols(),
            });
        }
        Self::new(self.inner.matmul(&q.transpose())?)
    }
}

/// Fully parameterized generative model. Labels are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GroundTruthModel<T = f64> {
    Er {
        n: usize,
        p: T,
    },
    Beta {
        beta: Vec<T>,
    },
    Sbm {
        b: DenseMatrix<T>,
        labels: Vec<usize>,
    },
    Dcsbm {
        b: DenseMatrix<T>,
        labels: Vec<usize>,
        theta: Vec<T>,
    },
    Dcmm {
        b: DenseMatrix<T>,
        pi: MembershipMatrix<T>,
        theta: Vec<T>,
    },
    /// `p_ij = Σ_{s<a} x_is x_js − Σ_{s≥a} x_is x_js` for signature `(a, b)`.
    Lsm {
        x: DenseMatrix<T>,
        signature: (usize, usize),
    },
}

impl<T: Scalar> GroundTruthModel<T> {
    pub fn n(&self) -> usize {
        match self {
            Self::Er { n, .. } => *n,
            Self::Beta { beta } => beta.len(),
            Self::Sbm { labels, .. } | Self::Dcsbm { labels, .. } => labels.len(),
            Self::Dcmm { pi, .. } => pi.n(),
            Self::Lsm { x, .. } => x.rows(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Er { .. } => "er",
            Self::Beta { .. } => "beta",
            Self::Sbm { .. } => "sbm",
            Self::Dcsbm { .. } => "dcsbm",
            Self::Dcmm { .. } => "dcmm",
            Self::Lsm { .. } => "lsm",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Er { n, p } => {
                if *n < 2 {
                    return Err(Error::InvalidArgument(format!("n = {n} < 2")));
                }
                if !(*p >= T::zero() && *p <= T::one()) {
                    return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
                }
            }
            Self::Beta { beta } => {
                if beta.iter().any(|b| !b.is_finite()) {
                    return Err(Error::InvalidArgument("non-finite beta".into()));
                }
            }
            Self::Sbm { b, labels } => {
                check_block_matrix(b)?;
                check_labels(labels, b.rows())?;
            }
            Self::Dcsbm { b, labels, theta } => {
                check_block_matrix(b)?;
                check_labels(labels, b.rows())?;
                check_theta(theta, labels.len())?;
            }
            Self::Dcmm { b, pi, theta } => {
                check_block_matrix(b)?;
                if pi.k() != b.rows() {
                    return Err(Error::DimensionMismatch {
                        expected: b.rows(),
                        found: pi.k(),
                    });
                }
                check_theta(theta, pi.n())?;
            }
            Self::Lsm { x, signature } => {
                if signature.0 + signature.1 != x.cols() {
                    return Err(Error::InvalidArgument(format!(
                        "signature {signature:?} does not match latent dimension {}",
                        x.cols()
                    )));
                }
            }
        }
        Ok(())
    }

    fn raw_probability(&self, i: usize, j: usize) -> T {
        match self {
            Self::Er { p, .. } => *p,
            Self::Beta { beta } => logistic(beta[i] + beta[j]),
            Self::Sbm { b, labels } => b[(labels[i], labels[j])],
            Self::Dcsbm { b, labels, theta } => theta[i] * theta[j] * b[(labels[i], labels[j])],
            Self::Dcmm { b, pi, theta } => {
                let (ri, rj) = (pi.row(i), pi.row(j));
                let mut s = T::zero();
                for (k, &a) in ri.iter().enumerate() {
                    if a == T::zero() {
                        continue;
                    }
                    for (l, &c) in rj.iter().enumerate() {
                        s += a * b[(k, l)] * c;
                    }
                }
                theta[i] * theta[j] * s
            }
            Self::Lsm { x, signature } => {
                let (ri, rj) = (x.row(i), x.row(j));
                let mut s = T::zero();
                for (t, (&a, &c)) in ri.iter().zip(rj).enumerate() {
                    if t < signature.0 {
                        s += a * c;
                    } else {
                        s -= a * c;
                    }
                }
                s
            }
        }
    }
}

#[inline]
pub(crate) fn logistic<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

fn check_labels(labels: &[usize], k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    if let Some(i) = labels.iter().position(|&l| l >= k) {
        return Err(Error::InvalidArgument(format!(
            "label {} of node {i} is outside 0..{k}",
            labels[i]
        )));
    }
    Ok(())
}

fn check_block_matrix<T: Scalar>(b: &DenseMatrix<T>) -> Result<()> {
    b.ensure_square()?;
    if b.rows() == 0 {
        return Err(Error::InvalidArgument("empty block matrix".into()));
    }
    if !b.is_symmetric(T::zero()) {
        return Err(Error::InvalidArgument(
            "block matrix is not symmetric".into(),
        ));
    }
    Ok(())
}

fn check_theta<T: Scalar>(theta: &[T], n: usize) -> Result<()> {
    if theta.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: theta.len(),
        });
    }
    if let Some(i) = theta
        .iter()
        .position(|t| !(*t > T::zero()) || !t.is_finite())
    {
        return Err(Error::InvalidArgument(format!(
            "theta[{i}] is not positive"
        )));
    }
    Ok(())
}

/// Edge-probability matrix of a ground-truth model, diagonal zero.
///
/// Fails with the first offending pair if any entry leaves `[0, 1]`.
pub fn build_probability_matrix<T: Scalar>(
    model: &GroundTruthModel<T>,
) -> Result<ProbabilityMatrix<T>> {
    model.validate()?;
    let n = model.n();
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = model.raw_probability(i, j);
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::ProbabilityOutOfRange {
                    i,
                    j,
                    value: v.as_f64(),
                });
            }
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    ProbabilityMatrix::new(m)
}

/// Independent Bernoulli draws on the upper triangle, mirrored.
///
/// Pairs are visited row by row (`i < j`), one uniform variate each.
pub fn sample_adjacency<T: Scalar, R: Rng + ?Sized>(
    p: &ProbabilityMatrix<T>,
    rng: &mut R,
) -> AdjacencyMatrix {
    let n = p.n();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let u: f64 = rng.gen();
            if u < p.get(i, j).as_f64() {
                edges.push((i, j));
            }
        }
    }
    AdjacencyMatrix::from_edges(n, edges).expect("indices in range")
}
