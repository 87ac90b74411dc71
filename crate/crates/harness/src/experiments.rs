//! The five experiment drivers.
//!
//! Replication `r` of a setting draws everything from
//! `derive_stream(base_seed, experiment_id, r)`, where the id hashes the
//! experiment kind, truth and setting key. Each candidate fit then uses a
//! fork of that stream keyed by the candidate label, so adding a candidate
//! or dropping a replication leaves every other variate unchanged.
//! Replications run on a rayon pool and are collected in index order.

use std::fmt::Write as _;

use netgof_core::estimators::CandidateModel;
use netgof_core::gof::{gof_test, normalize_true, select_k_dcmm, statistic, Decision, TestResult};
use netgof_core::models::{build_probability_matrix, sample_adjacency};
use netgof_core::numerics::{derive_stream, normal_cdf, normal_quantile, stable_id, SeededStream};
use netgof_core::AdjacencyMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{
    candidate_label, ExperimentConfig, ExperimentKind, Normalization, Setting, TruthSpec,
};
use crate::data::{data_dir, dataset_info, load_dataset};
use crate::error::{HarnessError, Result};
use crate::table::{proportion, ResultRow, ResultTable, DECIMALS};

/// Everything an experiment produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: ResultTable,
    /// Q-Q points as CSV, for the null experiment only.
    pub points: Option<String>,
    /// Datasets that were requested but not found.
    pub missing: Vec<String>,
}

pub fn run(cfg: &ExperimentConfig, jobs: usize) -> Result<Outcome> {
    cfg.validate()?;
    let plain = |table| Outcome {
        table,
        points: None,
        missing: Vec::new(),
    };
    match cfg.kind {
        ExperimentKind::NullQq => {
            let results = run_null_qq(cfg, jobs)?;
            Ok(Outcome {
                table: null_table(&results),
                points: Some(points_csv(&results)),
                missing: Vec::new(),
            })
        }
        ExperimentKind::Size => run_size(cfg, jobs).map(plain),
        ExperimentKind::Power => run_power(cfg, jobs).map(plain),
        ExperimentKind::Kest => run_kest(cfg, jobs).map(plain),
        ExperimentKind::Real => {
            let (table, missing) = run_real(cfg)?;
            Ok(Outcome {
                table,
                points: None,
                missing,
            })
        }
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start {jobs} workers: {e}")))
}

/// `f(0), …, f(reps − 1)` evaluated on `jobs` workers, in index order.
fn replicate<T: Send>(
    jobs: usize,
    reps: usize,
    f: impl Fn(u64) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    pool(jobs)?.install(|| (0..reps as u64).into_par_iter().map(&f).collect())
}

pub fn experiment_id(cfg: &ExperimentConfig, setting: &Setting) -> u64 {
    stable_id(&format!("{}|{}|{}", cfg.kind, cfg.truth, setting.key()))
}

fn candidate_stream(stream: &SeededStream, c: &CandidateModel) -> SeededStream {
    stream.fork(stable_id(&candidate_label(c)))
}

fn setting_keys(cfg: &ExperimentConfig, setting: &Setting) -> Vec<(String, String)> {
    let mut keys = vec![
        ("truth".to_string(), cfg.truth.clone()),
        ("n".to_string(), setting.n.to_string()),
    ];
    keys.extend(setting.params.iter().cloned());
    keys
}

/// Draws the truth and one adjacency matrix for replication `rep`.
fn draw(
    truth: &TruthSpec,
    stream: &mut SeededStream,
) -> Result<(netgof_core::ProbabilityMatrix, AdjacencyMatrix)> {
    let model = truth.draw(stream)?;
    let p = build_probability_matrix(&model)?;
    let a = sample_adjacency(&p, stream);
    Ok((p, a))
}

/// Sorted statistics for one setting against the standard normal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullQq {
    pub setting: String,
    /// Ascending `T_n` values.
    pub sample: Vec<f64>,
    /// `Φ⁻¹((i − ½)/m)` for `i = 1..m`.
    pub theoretical: Vec<f64>,
    pub ks: f64,
    pub mean: f64,
    pub variance: f64,
    pub excluded: usize,
}

/// One-sample Kolmogorov–Smirnov distance of `sorted` from `N(0, 1)`.
pub fn ks_normal(sorted: &[f64]) -> f64 {
    let m = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f: f64 = normal_cdf(x);
        d.max((i as f64 + 1.0) / m - f).max(f - i as f64 / m)
    })
}

/// Sample mean and unbiased variance; the variance is 0 for a single value.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

pub fn run_null_qq(cfg: &ExperimentConfig, jobs: usize) -> Result<Vec<NullQq>> {
    let mut out = Vec::new();
    for setting in cfg.settings() {
        let truth = setting.truth_spec(&cfg.truth)?;
        let id = experiment_id(cfg, &setting);
        let stats = replicate(jobs, cfg.reps, |rep| {
            let mut stream = derive_stream(cfg.base_seed, id, rep);
            let (p, a) = draw(&truth, &mut stream)?;
            Ok(match cfg.normalization {
                Normalization::Oracle => Some(statistic(&normalize_true(&a, &p)?)),
                Normalization::Fitted => {
                    let c = cfg.fixed_candidates()[0];
                    gof_test::<f64, _>(&a, c, cfg.alpha, &mut candidate_stream(&stream, &c))
                        .ok()
                        .map(|r| r.statistic)
                }
            })
        })?;
        let mut sample: Vec<f64> = stats.iter().flatten().copied().collect();
        let excluded = stats.len() - sample.len();
        sample.sort_by(f64::total_cmp);
        let m = sample.len();
        let theoretical = (1..=m)
            .map(|i| normal_quantile((i as f64 - 0.5) / m as f64))
            .collect::<netgof_core::Result<Vec<f64>>>()?;
        let (mean, variance) = if m > 0 {
            mean_var(&sample)
        } else {
            (f64::NAN, f64::NAN)
        };
        out.push(NullQq {
            setting: setting.key(),
            ks: if m > 0 { ks_normal(&sample) } else { f64::NAN },
            sample,
            theoretical,
            mean,
            variance,
            excluded,
        });
    }
    Ok(out)
}

fn null_table(results: &[NullQq]) -> ResultTable {
    let mut t = ResultTable::new("null");
    for r in results {
        let m = r.sample.len();
        for (metric, value, se) in [
            ("mean", r.mean, Some((r.variance / m as f64).sqrt())),
            ("variance", r.variance, None),
            ("ks", r.ks, None),
        ] {
            t.rows.push(ResultRow {
                keys: vec![
                    ("setting".into(), r.setting.clone()),
                    ("metric".into(), metric.into()),
                ],
                estimate: value,
                stderr: se.filter(|s| s.is_finite()),
                reps: m,
                excluded: r.excluded,
            });
        }
    }
    t
}

fn points_csv(results: &[NullQq]) -> String {
    let mut s = String::from("setting,theoretical,sample\n");
    for r in results {
        for (q, x) in r.theoretical.iter().zip(&r.sample) {
            let _ = writeln!(s, "{},{:.*},{:.*}", r.setting, DECIMALS, q, DECIMALS, x);
        }
    }
    s
}

/// Rejection frequencies for every (setting, candidate) cell.
fn rejection_table(cfg: &ExperimentConfig, jobs: usize, name: &str) -> Result<ResultTable> {
    let candidates = cfg.fixed_candidates();
    let mut table = ResultTable::new(name);
    for setting in cfg.settings() {
        let truth = setting.truth_spec(&cfg.truth)?;
        let id = experiment_id(cfg, &setting);
        let outcomes = replicate(jobs, cfg.reps, |rep| {
            let mut stream = derive_stream(cfg.base_seed, id, rep);
            let (_, a) = draw(&truth, &mut stream)?;
            Ok(candidates
                .iter()
                .map(|c| {
                    gof_test::<f64, _>(&a, *c, cfg.alpha, &mut candidate_stream(&stream, c))
                        .map(|r: TestResult| r.decision)
                        .map_err(|e| e.to_string())
                })
                .collect::<Vec<_>>())
        })?;
        for (ci, c) in candidates.iter().enumerate() {
            let mut rejects = 0;
            let mut valid = 0;
            let mut first_error = None;
            for o in &outcomes {
                match &o[ci] {
                    Ok(d) => {
                        valid += 1;
                        rejects += (*d == Decision::Reject) as usize;
                    }
                    Err(e) => {
                        first_error.get_or_insert_with(|| e.clone());
                    }
                }
            }
            let excluded = outcomes.len() - valid;
            if let Some(e) = first_error {
                table.notices.push(format!(
                    "{} / {}: {excluded} replications excluded, first error: {e}",
                    setting.key(),
                    candidate_label(c)
                ));
            }
            let (estimate, stderr) = proportion(rejects, valid);
            let mut keys = setting_keys(cfg, &setting);
            keys.push(("candidate".into(), candidate_label(c)));
            keys.push(("alpha".into(), cfg.alpha.to_string()));
            table.rows.push(ResultRow {
                keys,
                estimate: if valid > 0 { estimate } else { 0.0 },
                stderr,
                reps: valid,
                excluded,
            });
        }
    }
    Ok(table)
}

/// Empirical size: the candidates are expected to contain the truth.
pub fn run_size(cfg: &ExperimentConfig, jobs: usize) -> Result<ResultTable> {
    rejection_table(cfg, jobs, "size")
}

/// Empirical power: the candidates are expected to be misspecified.
pub fn run_power(cfg: &ExperimentConfig, jobs: usize) -> Result<ResultTable> {
    rejection_table(cfg, jobs, "power")
}

/// `P̂{K̂ = K}`, `Ê{K̂}`, `var̂{K̂}` and the share of replications where every
/// `K₀ ≤ k_max` was rejected. Those replications count as misses in the
/// first row and are left out of the moments.
pub fn run_kest(cfg: &ExperimentConfig, jobs: usize) -> Result<ResultTable> {
    let mut table = ResultTable::new("kest");
    for setting in cfg.settings() {
        let truth = setting.truth_spec(&cfg.truth)?;
        let k_true = truth.communities().ok_or_else(|| {
            HarnessError::Config(format!("truth {} has no community count", cfg.truth))
        })?;
        let id = experiment_id(cfg, &setting);
        let picks = replicate(jobs, cfg.reps, |rep| {
            let mut stream = derive_stream(cfg.base_seed, id, rep);
            let (_, a) = draw(&truth, &mut stream)?;
            Ok(select_k_dcmm(&a, cfg.k_max, cfg.alpha, &stream.fork(0))?.k_hat)
        })?;
        let found: Vec<f64> = picks.iter().flatten().map(|&k| k as f64).collect();
        let none = picks.len() - found.len();
        let hits = picks.iter().filter(|&&k| k == Some(k_true)).count();
        let (p, p_se) = proportion(hits, picks.len());
        let (mean, var) = if found.is_empty() {
            (0.0, 0.0)
        } else {
            mean_var(&found)
        };
        let (none_rate, none_se) = proportion(none, picks.len());
        let mut keys = setting_keys(cfg, &setting);
        keys.push(("k_max".into(), cfg.k_max.to_string()));
        keys.push(("alpha".into(), cfg.alpha.to_string()));
        let row = |metric: &str, estimate: f64, stderr: Option<f64>, reps: usize| {
            let mut k = keys.clone();
            k.push(("metric".into(), metric.into()));
            ResultRow {
                keys: k,
                estimate,
                stderr,
                reps,
                excluded: 0,
            }
        };
        let mean_se = (!found.is_empty()).then(|| (var / found.len() as f64).sqrt());
        table
            .rows
            .push(row(&format!("p_k_equals_{k_true}"), p, p_se, picks.len()));
        table.rows.push(row("mean_k", mean, mean_se, found.len()));
        table.rows.push(row("var_k", var, None, found.len()));
        table
            .rows
            .push(row("none_rate", none_rate, none_se, picks.len()));
    }
    Ok(table)
}

/// p-values for every (dataset, candidate) pair. Missing datasets are
/// skipped with a notice and returned; untestable pairs get a notice only.
pub fn run_real(cfg: &ExperimentConfig) -> Result<(ResultTable, Vec<String>)> {
    let dir = data_dir(cfg.data_dir.as_deref());
    let mut table = ResultTable::new("real");
    let mut missing = Vec::new();
    for name in &cfg.datasets {
        let a = match load_dataset(&dir, name) {
            Ok(a) => a,
            Err(e @ HarnessError::DatasetMissing { .. }) => {
                table.notices.push(format!("skipped: {e}"));
                missing.push(name.clone());
                continue;
            }
            Err(e) => return Err(e),
        };
        let k = dataset_info(name).communities;
        for spec in &cfg.candidates {
            let c = spec.resolve(k);
            let label = candidate_label(&c);
            let mut rng = SeededStream::new(cfg.base_seed, stable_id(&format!("{name}|{label}")));
            match gof_test::<f64, _>(&a, c, cfg.alpha, &mut rng) {
                Ok(r) => table.rows.push(ResultRow {
                    keys: vec![
                        ("dataset".into(), name.clone()),
                        ("candidate".into(), label),
                        ("statistic".into(), format!("{:.*}", DECIMALS, r.statistic)),
                    ],
                    estimate: r.p_value,
                    stderr: None,
                    reps: 1,
                    excluded: 0,
                }),
                Err(e) => table.notices.push(format!("{name} / {label}: {e}")),
            }
        }
    }
    Ok((table, missing))
}
