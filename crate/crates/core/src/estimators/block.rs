use rand::Rng;

use super::spectral::community_labels;
use super::{CandidateModel, FitDiagnostics, FitOptions, FittedModel, FittedParams};
use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;
use crate::numerics::DenseMatrix;
use crate::scalar::Scalar;

pub fn fit_sbm<T: Scalar, R: Rng + ?Sized>(
    a: &AdjacencyMatrix,
    k: usize,
    rng: &mut R,
) -> Result<FittedModel<T>> {
    fit_sbm_with(a, k, &FitOptions::default(), rng)
}

pub fn fit_dcsbm<T: Scalar, R: Rng + ?Sized>(
    a: &AdjacencyMatrix,
    k: usize,
    rng: &mut R,
) -> Result<FittedModel<T>> {
    fit_dcsbm_with(a, k, &FitOptions::default(), rng)
}

pub(super) fn fit_sbm_with<T: Scalar, R: Rng + ?Sized>(
    a: &AdjacencyMatrix,
    k: usize,
    opts: &FitOptions,
    rng: &mut R,
) -> Result<FittedModel<T>> {
    let (labels, warnings) = community_labels::<T, _>(a, k, opts.labeler, opts.kmeans, rng)?;
    sbm_plug_in(a, labels, k, warnings, opts.eps_clip)
}

pub(super) fn fit_dcsbm_with<T: Scalar, R: Rng + ?Sized>(
    a: &AdjacencyMatrix,
    k: usize,
    opts: &FitOptions,
    rng: &mut R,
) -> Result<FittedModel<T>> {
    let (labels, warnings) = community_labels::<T, _>(a, k, opts.labeler, opts.kmeans, rng)?;
    dcsbm_plug_in(a, labels, k, warnings, opts.eps_clip)
}

/// SBM plug-in for externally supplied zero-based labels.
pub fn fit_sbm_with_labels<T: Scalar>(
    a: &AdjacencyMatrix,
    labels: &[usize],
    k: usize,
) -> Result<FittedModel<T>> {
    sbm_plug_in(a, labels.to_vec(), k, Vec::new(), super::EPS_CLIP)
}

/// DCSBM plug-in for externally supplied zero-based labels.
pub fn fit_dcsbm_with_labels<T: Scalar>(
    a: &AdjacencyMatrix,
    labels: &[usize],
    k: usize,
) -> Result<FittedModel<T>> {
    dcsbm_plug_in(a, labels.to_vec(), k, Vec::new(), super::EPS_CLIP)
}

fn check(a: &AdjacencyMatrix, labels: &[usize], k: usize) -> Result<()> {
    if labels.len() != a.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: labels.len(),
        });
    }
    if k == 0 || labels.iter().any(|&l| l >= k) {
        return Err(Error::InvalidArgument(format!("labels must lie in 0..{k}")));
    }
    Ok(())
}

/// `(counts, sizes)`: `counts[k][l] = Σ_{i∈k, j∈l} A_ij` (diagonal blocks count each edge twice).
fn block_counts(a: &AdjacencyMatrix, labels: &[usize], k: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut counts = vec![vec![0.0; k]; k];
    let mut sizes = vec![0; k];
    for &l in labels {
        sizes[l] += 1;
    }
    for (i, j) in a.edges() {
        let (u, v) = (labels[i], labels[j]);
        counts[u][v] += 1.0;
        counts[v][u] += 1.0;
    }
    (counts, sizes)
}

fn sbm_plug_in<T: Scalar>(
    a: &AdjacencyMatrix,
    labels: Vec<usize>,
    k: usize,
    mut warnings: Vec<String>,
    eps_clip: f64,
) -> Result<FittedModel<T>> {
    check(a, &labels, k)?;
    let n = a.n();
    let (counts, sizes) = block_counts(a, &labels, k);
    let density = 2.0 * a.edge_count() as f64 / (n * (n - 1)) as f64;
    let mut b = DenseMatrix::zeros(k, k);
    for u in 0..k {
        for v in 0..k {
            let pairs = if u == v {
                sizes[u] * sizes[u].saturating_sub(1)
            } else {
                sizes[u] * sizes[v]
            };
            b[(u, v)] = T::of(if pairs == 0 {
                density
            } else {
                counts[u][v] / pairs as f64
            });
        }
    }
    for (u, &s) in sizes.iter().enumerate() {
        if s < 2 {
            warnings.push(format!(
                "community {u} has {s} nodes; blocks without node pairs use the global density"
            ));
        }
    }
    let raw = DenseMatrix::from_fn(n, n, |i, j| b[(labels[i], labels[j])]);
    FittedModel::assemble(
        CandidateModel::Sbm { k },
        FittedParams::Sbm { labels, b },
        raw,
        FitDiagnostics {
            warnings,
            ..FitDiagnostics::default()
        },
        eps_clip,
    )
}

fn dcsbm_plug_in<T: Scalar>(
    a: &AdjacencyMatrix,
    labels: Vec<usize>,
    k: usize,
    mut warnings: Vec<String>,
    eps_clip: f64,
) -> Result<FittedModel<T>> {
    check(a, &labels, k)?;
    let n = a.n();
    let degrees = a.degrees().0;
    let (counts, sizes) = block_counts(a, &labels, k);
    let mut block_degree = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        block_degree[l] += degrees[i];
    }
    let theta: Vec<T> = (0..n)
        .map(|i| {
            let total = block_degree[labels[i]];
            if total == 0 {
                T::zero()
            } else {
                T::of(degrees[i] as f64 / total as f64)
            }
        })
        .collect();
    let zero_degree = degrees.iter().filter(|&&d| d == 0).count();
    if zero_degree > 0 {
        warnings.push(format!("{zero_degree} zero-degree nodes get theta = 0"));
    }
    if let Some(u) = sizes.iter().position(|&s| s == 0) {
        warnings.push(format!("community {u} is empty"));
    }
    let b = DenseMatrix::from_fn(k, k, |u, v| T::of(counts[u][v]));
    let raw = DenseMatrix::from_fn(n, n, |i, j| theta[i] * theta[j] * b[(labels[i], labels[j])]);
    FittedModel::assemble(
        CandidateModel::Dcsbm { k },
        FittedParams::Dcsbm { labels, theta, b },
        raw,
        FitDiagnostics {
            warnings,
            ..FitDiagnostics::default()
        },
        eps_clip,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::EPS_CLIP;
    use crate::models::{build_probability_matrix, sample_adjacency, GroundTruthModel, Preset};
    use crate::numerics::SeededStream;

    fn two_cliques() -> AdjacencyMatrix {
        let mut edges = Vec::new();
        for base in [0, 4] {
            for i in 0..4 {
                for j in i + 1..4 {
                    edges.push((base + i, base + j));
                }
            }
        }
        AdjacencyMatrix::from_edges(8, edges).unwrap()
    }

    /// Fraction of nodes labelled correctly under the best matching of labels.
    pub(crate) fn accuracy(truth: &[usize], found: &[usize], k: usize) -> f64 {
        let mut best = 0;
        let mut perm: Vec<usize> = (0..k).collect();
        permutations(&mut perm, 0, &mut |p| {
            let hits = truth
                .iter()
                .zip(found)
                .filter(|(t, f)| p[**f] == **t)
                .count();
            best = best.max(hits);
        });
        best as f64 / truth.len() as f64
    }

    fn permutations(p: &mut Vec<usize>, at: usize, visit: &mut impl FnMut(&[usize])) {
        if at == p.len() {
            visit(p);
            return;
        }
        for i in at..p.len() {
            p.swap(at, i);
            permutations(p, at + 1, visit);
            p.swap(at, i);
        }
    }

    #[test]
    fn cliques_split() {
        let a = two_cliques();
        let f: FittedModel = fit_sbm(&a, 2, &mut SeededStream::new(0, 0)).unwrap();
        let FittedParams::Sbm { labels, b } = &f.params else {
            panic!()
        };
        assert_eq!(labels, &vec![0, 0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(b.as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(f.phat.get(0, 5), EPS_CLIP);
    }

    #[test]
    fn planted_sbm_recovered() {
        for seed in 0..10 {
            let mut s = SeededStream::new(seed, 21);
            let model = Preset::SbmPlanted {
                n: 600,
                k: 3,
                rho: 0.1,
            }
            .build::<f64, _>(&mut s)
            .unwrap();
            let GroundTruthModel::Sbm { labels: truth, .. } = &model else {
                panic!()
            };
            let a = sample_adjacency(&build_probability_matrix(&model).unwrap(), &mut s);
            let f: FittedModel = fit_sbm(&a, 3, &mut s).unwrap();
            let FittedParams::Sbm { labels, .. } = &f.params else {
                panic!()
            };
            let acc = accuracy(truth, labels, 3);
            assert!(acc >= 0.95, "seed {seed}: {acc}");
        }
    }

    #[test]
    fn dcsbm_single_block_is_configuration_plug_in() {
        let mut s = SeededStream::new(5, 5);
        let p = crate::graph::ProbabilityMatrix::constant(50, 0.2).unwrap();
        let a = sample_adjacency(&p, &mut s);
        let f: FittedModel = fit_dcsbm(&a, 1, &mut s).unwrap();
        let d = a.degrees().0;
        let two_m = d.iter().sum::<usize>() as f64;
        for (i, j) in [(0, 1), (3, 40), (10, 20)] {
            let want = d[i] as f64 * d[j] as f64 / two_m;
            assert!((f.phat.get(i, j) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn dcsbm_matches_sbm_across_blocks_when_degrees_are_flat() {
        // Each node has the same degree inside its block; across-block
        // plug-ins then coincide, within-block ones differ by (n_k - 1)/n_k.
        let mut edges = Vec::new();
        for base in [0, 6] {
            for i in 0..6 {
                edges.push((base + i, base + (i + 1) % 6));
            }
        }
        for i in 0..6 {
            edges.push((i, 6 + i));
        }
        let a = AdjacencyMatrix::from_edges(12, edges).unwrap();
        let labels: Vec<usize> = (0..12).map(|i| i / 6).collect();
        let sbm: FittedModel = fit_sbm_with_labels(&a, &labels, 2).unwrap();
        let dc: FittedModel = fit_dcsbm_with_labels(&a, &labels, 2).unwrap();
        assert!((sbm.phat.get(0, 7) - dc.phat.get(0, 7)).abs() < 1e-12);
        assert!((sbm.phat.get(0, 2) * 5.0 / 6.0 - dc.phat.get(0, 2)).abs() < 1e-12);
    }

    #[test]
    fn zero_degree_tolerated() {
        let a = AdjacencyMatrix::from_edges(5, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let f: FittedModel = fit_dcsbm_with_labels(&a, &[0, 0, 0, 0, 0], 1).unwrap();
        assert_eq!(f.phat.get(4, 0), EPS_CLIP);
        assert_eq!(f.diagnostics.warnings.len(), 1);
    }

    #[test]
    fn plug_ins_are_permutation_equivariant() {
        let mut s = SeededStream::new(9, 9);
        let model = Preset::DcsbmThreeLevel {
            n: 60,
            k: 3,
            rho: 0.1,
        }
        .build::<f64, _>(&mut s)
        .unwrap();
        let GroundTruthModel::Dcsbm { labels, .. } = &model else {
            panic!()
        };
        let a = sample_adjacency(&build_probability_matrix(&model).unwrap(), &mut s);
        let perm: Vec<usize> = (0..60).map(|i| (i * 7 + 3) % 60).collect();
        let pa = a.permute(&perm);
        let mut plabels = vec![0; 60];
        for i in 0..60 {
            plabels[perm[i]] = labels[i];
        }
        let x: FittedModel = fit_sbm_with_labels(&a, labels, 3).unwrap();
        let y: FittedModel = fit_sbm_with_labels(&pa, &plabels, 3).unwrap();
        assert_eq!(x.phat.permute(&perm), y.phat);
        let x: FittedModel = fit_dcsbm_with_labels(&a, labels, 3).unwrap();
        let y: FittedModel = fit_dcsbm_with_labels(&pa, &plabels, 3).unwrap();
        assert!(
            x.phat
                .permute(&perm)
                .as_matrix()
                .max_abs_diff(y.phat.as_matrix())
                < 1e-15
        );
        let x: FittedModel = super::super::fit_er(&a).unwrap();
        let y: FittedModel = super::super::fit_er(&pa).unwrap();
        assert_eq!(x.phat.permute(&perm), y.phat);
    }

    #[test]
    fn dcsbm_estimates_close() {
        for seed in 0..5 {
            let mut s = SeededStream::new(seed, 31);
            let model = Preset::DcsbmThreeLevel {
                n: 600,
                k: 3,
                rho: 0.1,
            }
            .build::<f64, _>(&mut s)
            .unwrap();
            let p = build_probability_matrix(&model).unwrap();
            let a = sample_adjacency(&p, &mut s);
            let f: FittedModel = fit_dcsbm(&a, 3, &mut s).unwrap();
            let mut total = 0.0;
            for i in 0..600 {
                for j in i + 1..600 {
                    total += (f.phat.get(i, j) - p.get(i, j)).abs();
                }
            }
            let mean = total / (600.0 * 599.0 / 2.0);
            assert!(mean <= 0.02, "seed {seed}: {mean}");
        }
    }
}
