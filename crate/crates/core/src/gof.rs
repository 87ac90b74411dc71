//! The cubic-trace goodness-of-fit test and the sequential choice of `K`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{fit_with, CandidateModel, FitOptions, FittedModel};
use crate::graph::{AdjacencyMatrix, ProbabilityMatrix};
use crate::numerics::{normal_quantile, trace_cubed, two_sided_p_value, DenseMatrix, SeededStream};
use crate::scalar::Scalar;

/// Default level for a single test.
pub const DEFAULT_ALPHA: f64 = 0.05;
/// Default level for each step of [`select_k_dcmm`].
pub const DEFAULT_SELECT_ALPHA: f64 = 0.001;
pub const DEFAULT_K_MAX: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Normalized by a fitted `P̂`.
    Fitted,
    /// Normalized by the true `P`.
    Oracle,
}

/// `(Aᵢⱼ − pᵢⱼ)/√(n pᵢⱼ(1 − pᵢⱼ))` off the diagonal, zero on it.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedResidualMatrix<T = f64> {
    matrix: DenseMatrix<T>,
    provenance: Provenance,
}

impl<T: Scalar> NormalizedResidualMatrix<T> {
    pub fn as_matrix(&self) -> &DenseMatrix<T> {
        &self.matrix
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }
}

fn normalize<T: Scalar>(
    a: &AdjacencyMatrix,
    p: &ProbabilityMatrix<T>,
    provenance: Provenance,
) -> Result<NormalizedResidualMatrix<T>> {
    let n = a.n();
    if p.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.n(),
        });
    }
    let nn = T::of_usize(n);
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let row = a.row(i);
        for j in i + 1..n {
            let q = p.get(i, j);
            if q <= T::zero() || q >= T::one() {
                return Err(Error::DegenerateProbability {
                    i,
                    j,
                    value: q.as_f64(),
                });
            }
            let x = if row[j] != 0 { T::one() } else { T::zero() };
            let v = (x - q) / (nn * q * (T::one() - q)).sqrt();
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(NormalizedResidualMatrix {
        matrix: m,
        provenance,
    })
}

/// Residuals against a fitted, already clipped `P̂`.
pub fn normalize_residuals<T: Scalar>(
    a: &AdjacencyMatrix,
    phat: &ProbabilityMatrix<T>,
) -> Result<NormalizedResidualMatrix<T>> {
    normalize(a, phat, Provenance::Fitted)
}

/// Residuals against the true `P`; an off-diagonal 0 or 1 is an error.
pub fn normalize_true<T: Scalar>(
    a: &AdjacencyMatrix,
    p: &ProbabilityMatrix<T>,
) -> Result<NormalizedResidualMatrix<T>> {
    normalize(a, p, Provenance::Oracle)
}

/// `T_n = tr(R³)/√6`.
pub fn statistic<T: Scalar>(r: &NormalizedResidualMatrix<T>) -> T {
    trace_cubed(&r.matrix).expect("residual matrix is square") / T::of(6.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Accept,
    Reject,
}

/// Two-sided rule: reject iff `|t| ≥ u_{1−α/2}`.
pub fn decide(t: f64, alpha: f64) -> Result<Decision> {
    check_alpha(alpha)?;
    let u: f64 = normal_quantile(1.0 - alpha / 2.0)?;
    Ok(if t.abs() >= u {
        Decision::Reject
    } else {
        Decision::Accept
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TestResult<T = f64> {
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub decision: Decision,
    pub fit: FittedModel<T>,
    /// Kept for audit; not serialized.
    #[serde(skip)]
    pub residuals: NormalizedResidualMatrix<T>,
}

/// Fit, normalize, compute `T_n` and decide, with default fit options.
pub fn gof_test<T: Scalar, R: Rng + ?Sized>(
    a: &AdjacencyMatrix,
    candidate: CandidateModel,
    alpha: f64,
    rng: &mut R,
) -> Result<TestResult<T>> {
    gof_test_with(a, candidate, alpha, &FitOptions::default(), rng)
}

pub fn gof_test_with<T: Scalar, R: Rng + ?Sized>(
    a: &AdjacencyMatrix,
    candidate: CandidateModel,
    alpha: f64,
    opts: &FitOptions,
    rng: &mut R,
) -> Result<TestResult<T>> {
    check_alpha(alpha)?;
    let fit: FittedModel<T> = fit_with(a, candidate, opts, rng).map_err(|e| match e {
        Error::MleNonexistence { .. } => Error::Untestable {
            candidate: candidate.to_string(),
            reason: e.to_string(),
        },
        e @ (Error::InvalidArgument(_) | Error::Untestable { .. }) => e,
        e => Error::FitFailed {
            candidate: candidate.to_string(),
            source: Box::new(e),
        },
    })?;
    let residuals = normalize_residuals(a, &fit.phat)?;
    let t = statistic(&residuals).as_f64();
    Ok(TestResult {
        statistic: t,
        p_value: two_sided_p_value(t),
        alpha,
        decision: decide(t, alpha)?,
        fit,
        residuals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionStep {
    pub k: usize,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub decision: Decision,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub k_hat: Option<usize>,
    pub trace: Vec<SelectionStep>,
    pub k_max: usize,
    pub alpha: f64,
}

/// Smallest `K₀ ≤ k_max` whose DCMM fit is accepted, testing `K₀ = 1, 2, …`
/// and stopping at the first acceptance. `K₀` draws from `stream.fork(K₀)`.
///
/// A `K₀` whose fit fails is recorded as a rejection with a warning.
pub fn select_k_dcmm(
    a: &AdjacencyMatrix,
    k_max: usize,
    alpha: f64,
    stream: &SeededStream,
) -> Result<SelectionResult> {
    select_k_dcmm_with::<f64>(a, k_max, alpha, &FitOptions::default(), stream)
}

pub fn select_k_dcmm_with<T: Scalar>(
    a: &AdjacencyMatrix,
    k_max: usize,
    alpha: f64,
    opts: &FitOptions,
    stream: &SeededStream,
) -> Result<SelectionResult> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    check_alpha(alpha)?;
    let mut trace = Vec::new();
    let mut k_hat = None;
    for k in 1..=k_max.min(a.n()) {
        let mut rng = stream.fork(k as u64);
        let step = match gof_test_with::<T, _>(a, CandidateModel::Dcmm { k }, alpha, opts, &mut rng)
        {
            Ok(r) => SelectionStep {
                k,
                statistic: Some(r.statistic),
                p_value: Some(r.p_value),
                decision: r.decision,
                warning: (!r.fit.diagnostics.warnings.is_empty())
                    .then(|| r.fit.diagnostics.warnings.join("; ")),
            },
            Err(e) => SelectionStep {
                k,
                statistic: None,
                p_value: None,
                decision: Decision::Reject,
                warning: Some(e.to_string()),
            },
        };
        let accepted = step.decision == Decision::Accept;
        trace.push(step);
        if accepted {
            k_hat = Some(k);
            break;
        }
    }
    Ok(SelectionResult {
        k_hat,
        trace,
        k_max,
        alpha,
    })
}

/// `tr(Δ′³)` with `Δ′ᵢⱼ = (pᵢⱼ − p̂ᵢⱼ)/√(n pᵢⱼ(1 − pᵢⱼ))`, a simulation diagnostic.
pub fn delta_cubed_diagnostic<T: Scalar>(
    p: &ProbabilityMatrix<T>,
    phat: &ProbabilityMatrix<T>,
) -> Result<T> {
    let n = p.n();
    if phat.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: phat.n(),
        });
    }
    let nn = T::of_usize(n);
    let mut d = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let q = p.get(i, j);
            if q <= T::zero() || q >= T::one() {
                return Err(Error::DegenerateProbability {
                    i,
                    j,
                    value: q.as_f64(),
                });
            }
            let v = (q - phat.get(i, j)) / (nn * q * (T::one() - q)).sqrt();
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    trace_cubed(&d)
}

/// `max_{i≠j} |p̂ᵢⱼ − pᵢⱼ|` over the common index range.
pub fn max_abs_deviation<T: Scalar>(p: &ProbabilityMatrix<T>, phat: &ProbabilityMatrix<T>) -> T {
    let n = p.n().min(phat.n());
    let mut m = T::zero();
    for i in 0..n {
        for j in i + 1..n {
            m = m.max((p.get(i, j) - phat.get(i, j)).abs());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_probability_matrix, sample_adjacency, Preset};
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn er(n: usize, p: f64, seed: u64) -> (ProbabilityMatrix, AdjacencyMatrix) {
        let pm = ProbabilityMatrix::constant(n, p).unwrap();
        let a = sample_adjacency(&pm, &mut SeededStream::new(seed, 17));
        (pm, a)
    }

    #[test]
    fn two_node_entries() {
        let half = ProbabilityMatrix::constant(2, 0.5).unwrap();
        let edge = AdjacencyMatrix::from_edges(2, [(0, 1)]).unwrap();
        let r = normalize_residuals(&edge, &half).unwrap();
        assert!((r.as_matrix()[(0, 1)] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(r.as_matrix()[(0, 0)], 0.0);
        let r = normalize_true(&AdjacencyMatrix::empty(2), &half).unwrap();
        assert!((r.as_matrix()[(1, 0)] + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(r.provenance(), Provenance::Oracle);
    }

    #[test]
    fn entries_match_direct_formula() {
        let mut rng = SeededStream::new(4, 4);
        let n = 6;
        let mut p = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v: f64 = rng.gen_range(0.05..0.95);
                p[(i, j)] = v;
                p[(j, i)] = v;
            }
        }
        let p = ProbabilityMatrix::new(p).unwrap();
        let a = sample_adjacency(&p, &mut rng);
        let r = normalize_residuals(&a, &p).unwrap();
        for i in 0..n {
            for j in 0..n {
                let want = if i == j {
                    0.0
                } else {
                    let x = a.has_edge(i, j) as u8 as f64;
                    (x - p.get(i, j)) / (6.0 * p.get(i, j) * (1.0 - p.get(i, j))).sqrt()
                };
                assert!((r.as_matrix()[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_truth_rejected() {
        let p = ProbabilityMatrix::constant(3, 1.0).unwrap();
        assert!(matches!(
            normalize_true(&AdjacencyMatrix::empty(3), &p),
            Err(Error::DegenerateProbability { .. })
        ));
        assert!(normalize_true(&AdjacencyMatrix::empty(4), &p).is_err());
    }

    #[test]
    fn oracle_entry_variance_is_one_over_n() {
        let n = 500;
        let (p, a) = er(n, 0.05, 3);
        let r = normalize_true(&a, &p).unwrap();
        let mut rng = SeededStream::new(5, 5);
        let mut s2 = 0.0;
        let draws = 10_000;
        for _ in 0..draws {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            s2 += r.as_matrix()[(i, j)].powi(2);
        }
        let ratio = s2 / draws as f64 * n as f64;
        assert!((ratio - 1.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn statistic_examples() {
        let zero = NormalizedResidualMatrix {
            matrix: DenseMatrix::<f64>::zeros(4, 4),
            provenance: Provenance::Fitted,
        };
        assert_eq!(statistic(&zero), 0.0);
        let m = NormalizedResidualMatrix {
            matrix: DenseMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 0.5 }),
            provenance: Provenance::Fitted,
        };
        assert!((statistic(&m) - 0.75 / 6f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn permutation_invariance() {
        let mut rng = SeededStream::new(9, 9);
        let model = Preset::SbmPlanted {
            n: 80,
            k: 3,
            rho: 0.1,
        }
        .build::<f64, _>(&mut rng)
        .unwrap();
        let p = build_probability_matrix(&model).unwrap();
        let a = sample_adjacency(&p, &mut rng);
        let phat = p.clipped(0.01);
        let base = statistic(&normalize_residuals(&a, &phat).unwrap());
        for _ in 0..5 {
            let mut perm: Vec<usize> = (0..80).collect();
            perm.shuffle(&mut rng);
            let t =
                statistic(&normalize_residuals(&a.permute(&perm), &phat.permute(&perm)).unwrap());
            assert!((t - base).abs() < 1e-10);
        }
    }

    #[test]
    fn decision_matches_p_value() {
        let mut rng = SeededStream::new(1, 2);
        for _ in 0..10_000 {
            let t: f64 = rng.gen_range(-5.0..5.0);
            let alpha: f64 = rng.gen_range(1e-4..0.5);
            let by_p = two_sided_p_value(t) <= alpha;
            let by_u = decide(t, alpha).unwrap() == Decision::Reject;
            if by_p != by_u {
                // Only a round-trip tie at the boundary may disagree.
                assert!(
                    (two_sided_p_value(t) - alpha).abs() < 1e-12,
                    "t={t} alpha={alpha}"
                );
            }
        }
    }

    #[test]
    fn alpha_range_checked() {
        assert!(decide(1.0, 0.0).is_err());
        assert!(decide(1.0, 1.0).is_err());
        let (_, a) = er(20, 0.3, 1);
        assert!(
            gof_test::<f64, _>(&a, CandidateModel::Er, 1.5, &mut SeededStream::new(0, 0)).is_err()
        );
    }

    #[test]
    fn fitted_close_to_oracle_under_er() {
        let n = 1000;
        let reps = 100;
        let mut total = 0.0;
        for seed in 0..reps {
            let (p, a) = er(n, 0.1, seed);
            let fitted: TestResult = gof_test(
                &a,
                CandidateModel::Er,
                0.05,
                &mut SeededStream::new(seed, 0),
            )
            .unwrap();
            let oracle = statistic(&normalize_true(&a, &p).unwrap());
            total += (fitted.statistic - oracle).abs();
        }
        let mean = total / reps as f64;
        assert!(mean <= 0.2, "{mean}");
    }

    #[test]
    fn beta_without_mle_is_untestable() {
        let a = AdjacencyMatrix::from_edges(5, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let r = gof_test::<f64, _>(&a, CandidateModel::Beta, 0.05, &mut SeededStream::new(0, 0));
        assert!(matches!(r, Err(Error::Untestable { .. })), "{r:?}");
    }

    #[test]
    fn er_selects_one() {
        let mut ones = 0;
        for seed in 0..20 {
            let (_, a) = er(300, 0.1, 100 + seed);
            let s =
                select_k_dcmm(&a, 4, DEFAULT_SELECT_ALPHA, &SeededStream::new(seed, 1)).unwrap();
            ones += (s.k_hat == Some(1)) as usize;
        }
        assert!(ones >= 16, "{ones}");
    }

    #[test]
    fn selection_is_minimum_of_accepted_set() {
        let mut rng = SeededStream::new(3, 3);
        let model = Preset::DcmmMixed {
            n: 300,
            k: 3,
            n0: 48,
            rho: 0.1,
            x: 0.4,
            z: 1.0,
        }
        .build::<f64, _>(&mut rng)
        .unwrap();
        let a = sample_adjacency(&build_probability_matrix(&model).unwrap(), &mut rng);
        let s = select_k_dcmm(&a, 6, DEFAULT_SELECT_ALPHA, &SeededStream::new(3, 4)).unwrap();
        let accepted: Vec<usize> = s
            .trace
            .iter()
            .filter(|t| t.decision == Decision::Accept)
            .map(|t| t.k)
            .collect();
        assert_eq!(s.k_hat, accepted.iter().copied().min());
        for step in &s.trace {
            if let Some(t) = step.statistic {
                assert_eq!(step.decision, decide(t, s.alpha).unwrap());
            }
        }
    }

    #[test]
    fn all_rejected_gives_none() {
        // Two disjoint cliques: the rank-one fit is hopeless and K₀ = 2 is
        // unreachable with k_max = 1.
        let mut edges = Vec::new();
        for i in 0..30 {
            for j in i + 1..30 {
                if (i < 15) == (j < 15) {
                    edges.push((i, j));
                }
            }
        }
        let a = AdjacencyMatrix::from_edges(30, edges).unwrap();
        let s = select_k_dcmm(&a, 1, 0.05, &SeededStream::new(0, 0)).unwrap();
        assert_eq!(s.k_hat, None);
        assert_eq!(s.trace.len(), 1);
        assert_eq!(s.trace[0].decision, Decision::Reject);
    }

    #[test]
    fn selection_is_reproducible() {
        let (_, a) = er(120, 0.2, 8);
        let x = select_k_dcmm(&a, 3, 0.01, &SeededStream::new(1, 1)).unwrap();
        let y = select_k_dcmm(&a, 3, 0.01, &SeededStream::new(1, 1)).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn delta_cubed_examples() {
        let mut rng = SeededStream::new(6, 6);
        let n = 5;
        let mut pm = DenseMatrix::zeros(n, n);
        let mut qm = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let (u, v): (f64, f64) = (rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9));
                pm[(i, j)] = u;
                pm[(j, i)] = u;
                qm[(i, j)] = v;
                qm[(j, i)] = v;
            }
        }
        let (p, q) = (
            ProbabilityMatrix::new(pm).unwrap(),
            ProbabilityMatrix::new(qm).unwrap(),
        );
        assert_eq!(delta_cubed_diagnostic(&p, &p).unwrap(), 0.0);
        let d = |i: usize, j: usize| {
            if i == j {
                0.0
            } else {
                (p.get(i, j) - q.get(i, j)) / (5.0 * p.get(i, j) * (1.0 - p.get(i, j))).sqrt()
            }
        };
        let mut want = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    want += d(i, j) * d(j, k) * d(k, i);
                }
            }
        }
        assert!((delta_cubed_diagnostic(&p, &q).unwrap() - want).abs() < 1e-12);
        let degenerate = ProbabilityMatrix::constant(5, 0.0).unwrap();
        assert!(delta_cubed_diagnostic(&degenerate, &q).is_err());
    }

    #[test]
    fn beta_delta_cubed_follows_rank_two_expansion() {
        // With every βᵢ = 0, p̂ᵢⱼ − p ≈ (β̂ᵢ + β̂ⱼ)/4, so Δ′ ≈ −(u1ᵀ + 1uᵀ) with
        // uᵢ = β̂ᵢ/(2√n), whose cubed trace is −(2a³ + 6a·n‖u‖²) for a = Σuᵢ.
        let n = 400;
        for rep in 0..4 {
            let mut s = SeededStream::new(7, rep);
            let model = Preset::BetaLinear { n, l_n: 0.0 }
                .build::<f64, _>(&mut s)
                .unwrap();
            let p = build_probability_matrix(&model).unwrap();
            let a = sample_adjacency(&p, &mut s);
            let f: FittedModel = crate::estimators::fit_beta(&a, 1e-10, 500).unwrap();
            let crate::estimators::FittedParams::Beta { beta } = &f.params else {
                panic!()
            };
            let u: Vec<f64> = beta.iter().map(|b| b / (2.0 * (n as f64).sqrt())).collect();
            let sum: f64 = u.iter().sum();
            let s2 = n as f64 * u.iter().map(|x| x * x).sum::<f64>();
            let approx = -(2.0 * sum.powi(3) + 6.0 * sum * s2);
            let exact = delta_cubed_diagnostic(&p, &f.phat).unwrap();
            assert!(
                (exact - approx).abs() <= 0.2 * approx.abs() + 5e-3,
                "{exact} vs {approx}"
            );
        }
    }

    #[test]
    fn max_deviation_examples() {
        let p = ProbabilityMatrix::constant(6, 0.3).unwrap();
        assert_eq!(max_abs_deviation(&p, &p), 0.0);
        let q = ProbabilityMatrix::constant(6, 0.35).unwrap();
        assert!((max_abs_deviation(&p, &q) - 0.05f64).abs() < 1e-15);
    }

    #[test]
    fn er_fit_deviation_below_rate() {
        let n = 1000;
        let bound = (n as f64).powf(-0.25);
        let mut below = 0;
        for seed in 0..100 {
            let (p, a) = er(n, 0.1, 500 + seed);
            let f: FittedModel = crate::estimators::fit_er(&a).unwrap();
            below += (max_abs_deviation(&p, &f.phat) < bound) as usize;
        }
        assert!(below >= 95);
    }

    #[test]
    fn works_in_single_precision() {
        let (_, a) = er(100, 0.2, 2);
        let r: TestResult<f32> =
            gof_test(&a, CandidateModel::Er, 0.05, &mut SeededStream::new(0, 0)).unwrap();
        let d: TestResult<f64> =
            gof_test(&a, CandidateModel::Er, 0.05, &mut SeededStream::new(0, 0)).unwrap();
        assert!((r.statistic - d.statistic).abs() < 1e-3);
    }
}
