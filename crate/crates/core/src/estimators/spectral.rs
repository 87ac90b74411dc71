use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::graph::AdjacencyMatrix;
use crate::numerics::{kmeans, sym_eigs, DenseMatrix, EigenPairs, KMeansConfig};
use crate::scalar::Scalar;

/// How community labels are produced for the block-model fitters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Labeler {
    /// k-means on leading-eigenvector ratios `ξ_k/ξ_1`, truncated at `±log n`.
    #[default]
    Score,
    /// k-means on the rows of the top-`K` eigenvectors.
    Eigenvector,
}

/// SCORE ratio rows `(ξ₂(i)/ξ₁(i), …, ξ_K(i)/ξ₁(i))`, clamped to `[−log n, log n]`.
///
/// Rows with `ξ₁(i) = 0` are set to zero; their count is returned.
pub(super) fn score_ratios<T: Scalar>(pairs: &EigenPairs<T>) -> (DenseMatrix<T>, usize) {
    let n = pairs.vectors.rows();
    let k = pairs.len();
    let cap = T::of((n as f64).ln().max(1.0));
    let mut zeros = 0;
    let mut r = DenseMatrix::zeros(n, k - 1);
    for i in 0..n {
        let lead = pairs.vectors[(i, 0)];
        if lead == T::zero() {
            zeros += 1;
            continue;
        }
        for s in 1..k {
            r[(i, s - 1)] = (pairs.vectors[(i, s)] / lead).max(-cap).min(cap);
        }
    }
    (r, zeros)
}

/// Zero-based community labels plus any warnings raised on the way.
pub fn community_labels<T: Scalar, R: Rng + ?Sized>(
    a: &AdjacencyMatrix,
    k: usize,
    labeler: Labeler,
    config: KMeansConfig,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<String>)> {
    let n = a.n();
    if k <= 1 {
        return Ok((vec![0; n], Vec::new()));
    }
    let pairs = sym_eigs(&a.to_dense::<T>(), k)?;
    let mut warnings = Vec::new();
    let points = match labeler {
        Labeler::Score => {
            let (r, zeros) = score_ratios(&pairs);
            if zeros > 0 {
                warnings.push(format!(
                    "{zeros} nodes have a zero leading-eigenvector entry; clustered on eigenvectors instead"
                ));
                pairs.vectors.clone()
            } else {
                r
            }
        }
        Labeler::Eigenvector => pairs.vectors.clone(),
    };
    let clustering = kmeans(&points, k, config, rng)?;
    Ok((clustering.labels, warnings))
}
