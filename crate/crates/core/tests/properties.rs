use proptest::prelude::*;

use netgof_core::estimators::{
    ase_reconstruction, beta_residual, fit_beta, FittedModel, FittedParams,
};
use netgof_core::gof::{normalize_residuals, statistic};
use netgof_core::models::{build_probability_matrix, sample_adjacency, MembershipMatrix, Preset};
use netgof_core::numerics::{DenseMatrix, SeededStream};
use netgof_core::ProbabilityMatrix;

/// Normalizes nonnegative weights to sum to one; an all-zero draw becomes uniform.
fn simplex(w: &[f64]) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        w.iter().map(|x| x / total).collect()
    } else {
        vec![1.0 / w.len() as f64; w.len()]
    }
}

fn closure_case() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>)> {
    (1usize..=6, 1usize..=6).prop_flat_map(|(k, l)| {
        (
            Just(k),
            Just(l),
            prop::collection::vec(0.0f64..1.0, k * l),
            prop::collection::vec(0.0f64..1.0, l),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn membership_closed_under_stochastic_maps((k, l, q, y) in closure_case()) {
        // Q is k × l with columns on the simplex; y is a membership row of length l.
        let mut qm = DenseMatrix::zeros(k, l);
        for c in 0..l {
            let col = simplex(&q[c * k..(c + 1) * k]);
            for r in 0..k {
                qm[(r, c)] = col[r];
            }
        }
        let y = simplex(&y);
        let pi = MembershipMatrix::new(DenseMatrix::from_fn(1, l, |_, c| y[c])).unwrap();
        let mapped = pi.transform(&qm).unwrap();
        let row = mapped.row(0);
        prop_assert_eq!(row.len(), k);
        prop_assert!(row.iter().all(|&v| v >= 0.0));
        prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn statistic_is_permutation_invariant(seed in any::<u64>(), n in 5usize..40, shuffle in any::<u64>()) {
        let mut rng = SeededStream::new(seed, 0);
        let k = 2.min(n);
        let model = Preset::SbmPlanted { n, k, rho: 0.2 }.build::<f64, _>(&mut rng).unwrap();
        let p = build_probability_matrix(&model).unwrap();
        let a = sample_adjacency(&p, &mut rng);
        let phat = p.clipped(1e-3);
        let mut perm: Vec<usize> = (0..n).collect();
        use rand::seq::SliceRandom;
        perm.shuffle(&mut SeededStream::new(shuffle, 1));
        let t0 = statistic(&normalize_residuals(&a, &phat).unwrap());
        let t1 = statistic(&normalize_residuals(&a.permute(&perm), &phat.permute(&perm)).unwrap());
        prop_assert!((t0 - t1).abs() < 1e-10);
    }

    #[test]
    fn beta_fit_solves_score_equations(seed in any::<u64>(), n in 30usize..120) {
        let mut rng = SeededStream::new(seed, 2);
        let model = Preset::BetaLinear { n, l_n: 0.5 }.build::<f64, _>(&mut rng).unwrap();
        let a = sample_adjacency(&build_probability_matrix(&model).unwrap(), &mut rng);
        let degrees = a.degrees();
        prop_assume!(degrees.min() > 0 && degrees.max() < n - 1);
        let f: FittedModel = fit_beta(&a, 1e-8, 2000).unwrap();
        let FittedParams::Beta { beta } = &f.params else { unreachable!() };
        prop_assert!(beta_residual(&a, beta) <= 1e-6);
    }

    #[test]
    fn ase_recovers_rank_one(x in prop::collection::vec(0.05f64..0.95, 3..30)) {
        let n = x.len();
        let m = DenseMatrix::from_fn(n, n, |i, j| x[i] * x[j]);
        let r = ase_reconstruction(&m, 1, None).unwrap();
        prop_assert!(r.max_abs_diff(&m) < 1e-10);
    }

    #[test]
    fn clipping_bounds_off_diagonal(n in 2usize..12, v in 0.0f64..=1.0, eps in 1e-8f64..1e-2) {
        let p = ProbabilityMatrix::constant(n, v).unwrap().clipped(eps);
        let (lo, hi) = p.off_diagonal_range();
        prop_assert!(lo >= eps && hi <= 1.0 - eps);
    }
}
