//! Adjacency and probability matrices, degree utilities, and edge-list I/O.

use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;
use crate::scalar::Scalar;

/// Symmetric 0/1 link structure with an empty diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n: usize,
    bits: Vec<u8>,
}

impl AdjacencyMatrix {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            bits: vec![0; n * n],
        }
    }

    /// Builds from zero-based pairs; loops are ignored and repeats collapse.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut a = Self::empty(n);
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({i}, {j}) outside a {n}-node graph"
                )));
            }
            if i != j {
                a.set(i, j);
            }
        }
        Ok(a)
    }

    /// Reads any dense matrix; entries are links when nonzero.
    ///
    /// Rejects asymmetric input or a nonzero diagonal.
    pub fn from_dense<T: Scalar>(m: &DenseMatrix<T>) -> Result<Self> {
        let n = m.ensure_square()?;
        let mut a = Self::empty(n);
        for i in 0..n {
            if m[(i, i)] != T::zero() {
                return Err(Error::InvalidArgument(format!("self-loop at node {i}")));
            }
            for j in i + 1..n {
                let (x, y) = (m[(i, j)] != T::zero(), m[(j, i)] != T::zero());
                if x != y {
                    return Err(Error::InvalidArgument(format!(
                        "asymmetric entry ({i}, {j})"
                    )));
                }
                if x {
                    a.set(i, j);
                }
            }
        }
        Ok(a)
    }

    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.n + j] = 1;
        self.bits[j * self.n + i] = 1;
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j] != 0
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u8] {
        &self.bits[i * self.n..(i + 1) * self.n]
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i + 1..self.n).filter_map(move |j| self.has_edge(i, j).then_some((i, j)))
        })
    }

    pub fn degrees(&self) -> DegreeVector {
        DegreeVector(
            (0..self.n)
                .map(|i| self.row(i).iter().map(|&b| b as usize).sum())
                .collect(),
        )
    }

    pub fn to_dense<T: Scalar>(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.n, self.n, |i, j| {
            if self.has_edge(i, j) {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    /// Relabels node `i` as `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let mut a = Self::empty(self.n);
        for (i, j) in self.edges() {
            a.set(perm[i], perm[j]);
        }
        a
    }

    pub fn summarize(&self) -> GraphSummary {
        let d = self.degrees();
        GraphSummary {
            n: self.n,
            edges: self.edge_count(),
            d_max: d.max(),
            d_min: d.min(),
            mean_degree: d.mean(),
        }
    }
}

/// Node degrees `dᵢ = Σ_{j≠i} Aᵢⱼ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeVector(pub Vec<usize>);

impl DegreeVector {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn max(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn min(&self) -> usize {
        self.0.iter().copied().min().unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            0.0
        } else {
            self.total() as f64 / self.0.len() as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub n: usize,
    pub edges: usize,
    pub d_max: usize,
    pub d_min: usize,
    pub mean_degree: f64,
}

/// Symmetric edge-probability matrix; the diagonal is held at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix<T = f64> {
    inner: DenseMatrix<T>,
}

impl<T: Scalar> ProbabilityMatrix<T> {
    /// Validates symmetry and the `[0, 1]` range off the diagonal.
    pub fn new(m: DenseMatrix<T>) -> Result<Self> {
        let n = m.ensure_square()?;
        let mut m = m;
        for i in 0..n {
            m[(i, i)] = T::zero();
            for j in i + 1..n {
                let v = m[(i, j)];
                if !(v >= T::zero() && v <= T::one()) {
                    return Err(Error::ProbabilityOutOfRange {
                        i,
                        j,
                        value: v.as_f64(),
                    });
                }
                let w = m[(j, i)];
                if (v - w).abs() > T::of(1e-12).max(T::epsilon() * T::of(8.0)) {
                    return Err(Error::InvalidArgument(format!(
                        "probability matrix asymmetric at ({i}, {j})"
                    )));
                }
                m[(j, i)] = v;
            }
        }
        Ok(Self { inner: m })
    }

    pub fn constant(n: usize, p: T) -> Result<Self> {
        Self::new(DenseMatrix::from_fn(n, n, |_, _| p))
    }

    /// Same matrix with off-diagonal entries pushed into `[eps, 1 − eps]`.
    pub fn clipped(&self, eps: T) -> Self {
        let n = self.n();
        let hi = T::one() - eps;
        let inner = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                T::zero()
            } else {
                self.inner[(i, j)].max(eps).min(hi)
            }
        });
        Self { inner }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.inner.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.inner[(i, j)]
    }

    pub fn as_matrix(&self) -> &DenseMatrix<T> {
        &self.inner
    }

    pub fn into_matrix(self) -> DenseMatrix<T> {
        self.inner
    }

    pub fn permute(&self, perm: &[usize]) -> Self {
        Self {
            inner: self.inner.permute_symmetric(perm),
        }
    }

    /// Smallest and largest off-diagonal entries.
    pub fn off_diagonal_range(&self) -> (T, T) {
        let n = self.n();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            for j in i + 1..n {
                let v = self.inner[(i, j)];
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Indexing {
    ZeroBased,
    #[default]
    OneBased,
}

/// Result of reading an edge list, with the cleaning counters.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub adjacency: AdjacencyMatrix,
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Reads a whitespace- or comma-separated edge list.
///
/// Blank lines and lines starting with `#` are skipped. Self-loops are dropped
/// and counted; repeated pairs (in either orientation) are merged and counted.
/// The node count is `n_override`, else a `# nodes: N` header as written by
/// [`write_edge_list`], else the largest id (plus one when zero-based).
pub fn load_edge_list<R: BufRead>(
    source: R,
    indexing: Indexing,
    n_override: Option<usize>,
) -> Result<LoadedGraph> {
    let mut pairs = Vec::new();
    let mut max_id = 0usize;
    let mut declared = None;
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("nodes:") {
                declared = v.trim().parse::<usize>().ok();
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = trimmed
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        let parse_err = |message: String| Error::Parse {
            line: lineno + 1,
            message,
        };
        if tokens.len() != 2 {
            return Err(parse_err(format!(
                "expected two node ids, found {}",
                tokens.len()
            )));
        }
        let mut ids = [0usize; 2];
        for (slot, tok) in ids.iter_mut().zip(&tokens) {
            let raw: usize = tok
                .parse()
                .map_err(|_| parse_err(format!("'{tok}' is not a node id")))?;
            *slot = match indexing {
                Indexing::ZeroBased => raw,
                Indexing::OneBased => raw
                    .checked_sub(1)
                    .ok_or_else(|| parse_err("node id 0 in a one-based list".into()))?,
            };
            max_id = max_id.max(*slot);
        }
        if let Some(n) = n_override.or(declared) {
            if ids[0] >= n || ids[1] >= n {
                return Err(parse_err(format!("node id exceeds declared size {n}")));
            }
        }
        pairs.push((lineno + 1, ids[0], ids[1]));
    }
    let n = n_override
        .or(declared)
        .unwrap_or(if pairs.is_empty() { 0 } else { max_id + 1 });
    let mut adjacency = AdjacencyMatrix::empty(n);
    let (mut self_loops, mut duplicates) = (0, 0);
    for (_, i, j) in pairs {
        if i == j {
            self_loops += 1;
        } else if adjacency.has_edge(i, j) {
            duplicates += 1;
        } else {
            adjacency.set(i, j);
        }
    }
    if adjacency.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(LoadedGraph {
        adjacency,
        self_loops,
        duplicates,
    })
}

pub fn write_edge_list<W: Write>(
    a: &AdjacencyMatrix,
    mut out: W,
    indexing: Indexing,
) -> Result<()> {
    let shift = usize::from(indexing == Indexing::OneBased);
    writeln!(out, "# nodes: {}", a.n())?;
    for (i, j) in a.edges() {
        writeln!(out, "{} {}", i + shift, j + shift)?;
    }
    Ok(())
}

/// Reads a square matrix of nonnegative numbers (rows on lines, whitespace or commas).
pub fn load_weight_matrix<R: BufRead>(source: R) -> Result<DenseMatrix<f64>> {
    let mut rows = Vec::new();
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row = trimmed
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("'{t}' is not a number"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let m = DenseMatrix::from_rows(&rows)?;
    m.ensure_square()?;
    Ok(m)
}

/// Links `i, j` when the symmetrized weight `Wᵢⱼ + Wⱼᵢ` reaches the median of
/// the upper-triangle values. The median is the linearly interpolated 0.5
/// quantile (Hyndman-Fan type 7).
pub fn threshold_at_median(weights: &DenseMatrix<f64>) -> Result<AdjacencyMatrix> {
    let n = weights.ensure_square()?;
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two nodes".into()));
    }
    let sym = |i: usize, j: usize| weights[(i, j)] + weights[(j, i)];
    let mut upper: Vec<f64> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| sym(i, j))
        .collect();
    upper.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let h = (upper.len() - 1) as f64 * 0.5;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let median = upper[lo] + (h - lo as f64) * (upper[hi] - upper[lo]);
    let mut a = AdjacencyMatrix::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if sym(i, j) >= median {
                a.set(i, j);
            }
        }
    }
    Ok(a)
}
