//! Simulation generators for the standard study settings.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{GroundTruthModel, MembershipMatrix};
use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum Preset {
    /// `β_i = i·L_n/n`, `i = 1..n`.
    BetaLinear { n: usize, l_n: f64 },
    /// `B_uv = ρ(1 + 4·[u = v])`, labels uniform over `K`.
    SbmPlanted { n: usize, k: usize, rho: f64 },
    /// `sbm_planted` blocks plus the three-branch θ law.
    DcsbmThreeLevel { n: usize, k: usize, rho: f64 },
    /// Rank-one dot-product graph, `x_i = ρ(0.8 sin(π(i−1)/(n−1)) + 0.1)`.
    LsmSine { n: usize, rho: f64 },
    /// `B = ρ11ᵀ + (1−ρ)I`, `n0` pure nodes per community, `1/θ ~ U[1, z]`.
    DcmmMixed {
        n: usize,
        k: usize,
        n0: usize,
        rho: f64,
        x: f64,
        z: f64,
    },
}

impl Preset {
    pub const NAMES: [&'static str; 5] = [
        "beta_linear",
        "sbm_planted",
        "dcsbm_three_level",
        "lsm_sine",
        "dcmm_mixed",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::BetaLinear { .. } => "beta_linear",
            Self::SbmPlanted { .. } => "sbm_planted",
            Self::DcsbmThreeLevel { .. } => "dcsbm_three_level",
            Self::LsmSine { .. } => "lsm_sine",
            Self::DcmmMixed { .. } => "dcmm_mixed",
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Self::BetaLinear { n, .. }
            | Self::SbmPlanted { n, .. }
            | Self::DcsbmThreeLevel { n, .. }
            | Self::LsmSine { n, .. }
            | Self::DcmmMixed { n, .. } => *n,
        }
    }

    /// Builds a preset from its name and `key=value` parameters.
    ///
    /// Missing keys take the defaults `k=3`, `rho=0.05` (`0.1` for dcmm, `1` for
    /// lsm), `l_n=0`, `n0=80`, `x=0.4`, `z=1`. `l_n` also accepts the schedule
    /// names understood by [`beta_ln_schedule`].
    pub fn from_params(name: &str, n: usize, params: &[(String, String)]) -> Result<Self> {
        let get = |key: &str| {
            params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
        };
        let num = |key: &str, default: f64| -> Result<f64> {
            match get(key) {
                None => Ok(default),
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("{key}={v} is not a number"))),
            }
        };
        let int = |key: &str, default: usize| -> Result<usize> {
            match get(key) {
                None => Ok(default),
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("{key}={v} is not an integer"))),
            }
        };
        let known: &[&str] = match name {
            "beta_linear" => &["l_n"],
            "sbm_planted" | "dcsbm_three_level" => &["k", "rho"],
            "lsm_sine" => &["rho"],
            "dcmm_mixed" => &["k", "n0", "rho", "x", "z"],
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown preset {other:?}; expected one of {:?}",
                    Self::NAMES
                )))
            }
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            return Err(Error::InvalidArgument(format!(
                "preset {name} has no parameter {k:?}"
            )));
        }
        let preset = match name {
            "beta_linear" => {
                let l_n = match get("l_n") {
                    None => 0.0,
                    Some(v) => match v.parse::<f64>() {
                        Ok(x) => x,
                        Err(_) => beta_ln_schedule(v, n).ok_or_else(|| {
                            Error::InvalidArgument(format!("unknown l_n schedule {v:?}"))
                        })?,
                    },
                };
                Self::BetaLinear { n, l_n }
            }
            "sbm_planted" => Self::SbmPlanted {
                n,
                k: int("k", 3)?,
                rho: num("rho", 0.05)?,
            },
            "dcsbm_three_level" => Self::DcsbmThreeLevel {
                n,
                k: int("k", 3)?,
                rho: num("rho", 0.05)?,
            },
            "lsm_sine" => Self::LsmSine {
                n,
                rho: num("rho", 1.0)?,
            },
            _ => Self::DcmmMixed {
                n,
                k: int("k", 3)?,
                n0: int("n0", 80)?,
                rho: num("rho", 0.1)?,
                x: num("x", 0.4)?,
                z: num("z", 1.0)?,
            },
        };
        preset.check()?;
        Ok(preset)
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        let n = self.n();
        if n < 2 {
            return bad(format!("n = {n} < 2"));
        }
        match *self {
            Self::BetaLinear { l_n, .. } if !l_n.is_finite() => bad(format!("l_n = {l_n}")),
            Self::SbmPlanted { k, rho, .. } | Self::DcsbmThreeLevel { k, rho, .. } => {
                if k == 0 || k > n {
                    return bad(format!("k = {k} outside 1..={n}"));
                }
                // The largest block probability is 5ρ; θ can reach 13/11 or 1.2.
                let cap = if matches!(self, Self::DcsbmThreeLevel { .. }) {
                    5.0 * (13.0f64 / 11.0).powi(2)
                } else {
                    5.0
                };
                if !(rho > 0.0 && rho * cap <= 1.0) {
                    return bad(format!("rho = {rho} outside (0, {}]", 1.0 / cap));
                }
                Ok(())
            }
            Self::LsmSine { rho, .. } if !(rho > 0.0 && rho <= 1.0) => {
                bad(format!("rho = {rho} outside (0, 1]"))
            }
            Self::DcmmMixed {
                k, n0, rho, x, z, ..
            } => {
                if k == 0 || k * n0 > n {
                    return bad(format!("k = {k}, n0 = {n0} do not fit in n = {n}"));
                }
                if !(rho > 0.0 && rho < 1.0) {
                    return bad(format!("rho = {rho} outside (0, 1)"));
                }
                let x_max = if k > 1 { 1.0 / (k - 1) as f64 } else { 1.0 };
                if !(x > 0.0 && x < x_max) {
                    return bad(format!("x = {x} outside (0, {x_max})"));
                }
                if !(z >= 1.0 && z.is_finite()) {
                    return bad(format!("z = {z} below 1"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Draws the randomized ingredients (labels, θ, mixed rows) from `rng`.
    pub fn build<T: Scalar, R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GroundTruthModel<T>> {
        self.check()?;
        let model = match *self {
            Self::BetaLinear { n, l_n } => GroundTruthModel::Beta {
                beta: (1..=n).map(|i| T::of(i as f64 * l_n / n as f64)).collect(),
            },
            Self::SbmPlanted { n, k, rho } => GroundTruthModel::Sbm {
                b: planted_blocks(k, rho),
                labels: uniform_labels(n, k, rng),
            },
            Self::DcsbmThreeLevel { n, k, rho } => {
                let labels = uniform_labels(n, k, rng);
                let theta = (0..n)
                    .map(|_| {
                        let u: f64 = rng.gen();
                        let t = if u < 0.8 {
                            rng.gen_range(0.8..=1.2)
                        } else if u < 0.9 {
                            9.0 / 11.0
                        } else {
                            13.0 / 11.0
                        };
                        T::of(t)
                    })
                    .collect();
                GroundTruthModel::Dcsbm {
                    b: planted_blocks(k, rho),
                    labels,
                    theta,
                }
            }
            Self::LsmSine { n, rho } => {
                let x = DenseMatrix::from_fn(n, 1, |i, _| {
                    let t = std::f64::consts::PI * i as f64 / (n - 1) as f64;
                    T::of(rho * (0.8 * t.sin() + 0.1))
                });
                GroundTruthModel::Lsm {
                    x,
                    signature: (1, 0),
                }
            }
            Self::DcmmMixed {
                n,
                k,
                n0,
                rho,
                x,
                z,
            } => {
                let b = DenseMatrix::from_fn(k, k, |u, v| T::of(if u == v { 1.0 } else { rho }));
                let mixed = mixed_rows(k, x);
                let mut pi = DenseMatrix::zeros(n, k);
                for i in 0..n {
                    if i < k * n0 {
                        pi[(i, i / n0)] = T::one();
                    } else {
                        let r = &mixed[rng.gen_range(0..mixed.len())];
                        for (c, &v) in r.iter().enumerate() {
                            pi[(i, c)] = T::of(v);
                        }
                    }
                }
                let theta = (0..n)
                    .map(|_| {
                        if z == 1.0 {
                            T::one()
                        } else {
                            T::of(1.0 / rng.gen_range(1.0..=z))
                        }
                    })
                    .collect();
                GroundTruthModel::Dcmm {
                    b,
                    pi: MembershipMatrix::new(pi)?,
                    theta,
                }
            }
        };
        Ok(model)
    }
}

/// Named `L_n` schedules for the β-model study: `"0"`, `"loglog_cuberoot"`
/// (`(log log n)^{1/3}`), `"loglog_sqrt"`, `"loglog"`, `"log_sqrt"` (`(log n)^{1/2}`).
pub fn beta_ln_schedule(name: &str, n: usize) -> Option<f64> {
    let ln = (n as f64).ln();
    match name {
        "0" | "zero" => Some(0.0),
        "loglog_cuberoot" => Some(ln.ln().cbrt()),
        "loglog_sqrt" => Some(ln.ln().sqrt()),
        "loglog" => Some(ln.ln()),
        "log_sqrt" => Some(ln.sqrt()),
        _ => None,
    }
}

fn planted_blocks<T: Scalar>(k: usize, rho: f64) -> DenseMatrix<T> {
    DenseMatrix::from_fn(k, k, |u, v| T::of(if u == v { 5.0 * rho } else { rho }))
}

fn uniform_labels<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..k)).collect()
}

/// For `K = 3`: `(x,x,1−2x)`, `(x,1−2x,x)`, `(1−2x,x,x)` and the barycentre.
/// Other `K` put `1 − (K−1)x` on each coordinate in turn.
fn mixed_rows(k: usize, x: f64) -> Vec<Vec<f64>> {
    if k == 1 {
        return vec![vec![1.0]];
    }
    let heavy = 1.0 - (k - 1) as f64 * x;
    let mut rows: Vec<Vec<f64>> = (0..k)
        .map(|m| {
            (0..k)
                .map(|c| if c == k - 1 - m { heavy } else { x })
                .collect()
        })
        .collect();
    rows.push(vec![1.0 / k as f64; k]);
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_probability_matrix, sample_adjacency};
    use crate::numerics::SeededStream;

    fn all_presets(n: usize) -> Vec<Preset> {
        vec![
            Preset::BetaLinear {
                n,
                l_n: beta_ln_schedule("log_sqrt", n).unwrap(),
            },
            Preset::SbmPlanted { n, k: 3, rho: 0.1 },
            Preset::DcsbmThreeLevel { n, k: 3, rho: 0.1 },
            Preset::LsmSine { n, rho: 1.0 },
            Preset::DcmmMixed {
                n,
                k: 3,
                n0: n / 10,
                rho: 0.1,
                x: 0.4,
                z: 5.0,
            },
        ]
    }

    #[test]
    fn beta_linear_zero() {
        let m: GroundTruthModel = Preset::BetaLinear { n: 4, l_n: 0.0 }
            .build(&mut SeededStream::new(0, 0))
            .unwrap();
        assert_eq!(m, GroundTruthModel::Beta { beta: vec![0.0; 4] });
    }

    #[test]
    fn sbm_planted_blocks() {
        let m: GroundTruthModel = Preset::SbmPlanted {
            n: 30,
            k: 3,
            rho: 0.05,
        }
        .build(&mut SeededStream::new(0, 0))
        .unwrap();
        let GroundTruthModel::Sbm { b, labels } = m else {
            panic!()
        };
        for u in 0..3 {
            for v in 0..3 {
                let want = if u == v { 0.25 } else { 0.05 };
                assert!((b[(u, v)] - want).abs() < 1e-15);
            }
        }
        assert!(labels.iter().all(|&l| l < 3));
    }

    #[test]
    fn dcmm_mixed_layout() {
        let preset = Preset::DcmmMixed {
            n: 500,
            k: 3,
            n0: 80,
            rho: 0.1,
            x: 0.4,
            z: 1.0,
        };
        let m: GroundTruthModel = preset.build(&mut SeededStream::new(4, 2)).unwrap();
        let GroundTruthModel::Dcmm { b, pi, theta } = m else {
            panic!()
        };
        let pure = (0..500).filter(|&i| pi.pure_label(i).is_some()).count();
        assert_eq!(pure, 240);
        assert_eq!(pi.pure_label(0), Some(0));
        assert_eq!(pi.pure_label(239), Some(2));
        assert!(theta.iter().all(|&t| t == 1.0));
        for u in 0..3 {
            for v in 0..3 {
                assert_eq!(b[(u, v)], if u == v { 1.0 } else { 0.1 });
            }
        }
    }

    #[test]
    fn mixed_rows_for_three() {
        let rows = mixed_rows(3, 0.4);
        assert_eq!(rows.len(), 4);
        for r in &rows {
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        assert!((rows[0][2] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn every_preset_builds_and_samples() {
        for preset in all_presets(120) {
            for seed in 0..5 {
                let mut s = SeededStream::new(seed, 17);
                let model: GroundTruthModel = preset.build(&mut s).unwrap();
                let p = build_probability_matrix(&model).unwrap();
                let (lo, hi) = p.off_diagonal_range();
                assert!(lo >= 0.0 && hi <= 1.0, "{}", preset.name());
                let a = sample_adjacency(&p, &mut s);
                for i in 0..120 {
                    assert!(!a.has_edge(i, i));
                    for j in 0..120 {
                        assert_eq!(a.has_edge(i, j), a.has_edge(j, i));
                    }
                }
            }
        }
    }

    #[test]
    fn lsm_sine_peak() {
        let m: GroundTruthModel = Preset::LsmSine { n: 101, rho: 1.0 }
            .build(&mut SeededStream::new(0, 0))
            .unwrap();
        let p = build_probability_matrix(&m).unwrap();
        assert!(p.off_diagonal_range().1 <= 0.81 + 1e-12);
    }

    #[test]
    fn parameter_validation() {
        let kv = |k: &str, v: &str| (k.to_string(), v.to_string());
        assert!(Preset::from_params("dcmm_mixed", 500, &[kv("x", "0.6")]).is_err());
        assert!(Preset::from_params("dcmm_mixed", 100, &[kv("n0", "40")]).is_err());
        assert!(Preset::from_params("sbm_planted", 100, &[kv("rho", "0.3")]).is_err());
        assert!(Preset::from_params("sbm_planted", 100, &[kv("sigma", "1")]).is_err());
        assert!(Preset::from_params("nope", 100, &[]).is_err());
        let p = Preset::from_params("beta_linear", 400, &[kv("l_n", "log_sqrt")]).unwrap();
        assert_eq!(
            p,
            Preset::BetaLinear {
                n: 400,
                l_n: 400f64.ln().sqrt()
            }
        );
        let p = Preset::from_params("dcmm_mixed", 500, &[kv("z", "5")]).unwrap();
        assert_eq!(
            p,
            Preset::DcmmMixed {
                n: 500,
                k: 3,
                n0: 80,
                rho: 0.1,
                x: 0.4,
                z: 5.0
            }
        );
    }

    #[test]
    fn generic_over_f32() {
        let m: GroundTruthModel<f32> = Preset::SbmPlanted {
            n: 40,
            k: 2,
            rho: 0.1,
        }
        .build(&mut SeededStream::new(0, 0))
        .unwrap();
        assert!(build_probability_matrix(&m).is_ok());
    }
}
