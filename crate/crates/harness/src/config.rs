//! Experiment descriptions and their key-value text format.
//!
//! One `key = value` per line, `#` starts a comment, lists are
//! comma-separated. Reserved keys:
//!
//! | key | meaning |
//! |---|---|
//! | `experiment` | `null`, `size`, `power`, `kest` or `real` |
//! | `truth` | `er` or a preset name (`beta_linear`, `sbm_planted`, …) |
//! | `n` | list of network sizes |
//! | `candidates` | list such as `er, beta, sbm:3, dcsbm:2, dcmm:3, lsm:2, lsm:2:1/1` |
//! | `reps`, `alpha`, `seed`, `k_max` | scalars |
//! | `normalization` | `oracle` or `fitted` (null experiment only) |
//! | `datasets`, `data_dir` | real-data experiment |
//! | `output` | result path; `.json` selects JSON, anything else CSV |
//!
//! Every other key is a truth parameter; a list value makes it a grid axis.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use netgof_core::estimators::CandidateModel;
use netgof_core::models::{GroundTruthModel, Preset};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    NullQq,
    Size,
    Power,
    Kest,
    Real,
}

impl FromStr for ExperimentKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "null" | "null_qq" => Self::NullQq,
            "size" => Self::Size,
            "power" => Self::Power,
            "kest" => Self::Kest,
            "real" => Self::Real,
            other => {
                return Err(HarnessError::Config(format!(
                    "unknown experiment {other:?}"
                )))
            }
        })
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::NullQq => "null",
            Self::Size => "size",
            Self::Power => "power",
            Self::Kest => "kest",
            Self::Real => "real",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Residuals against the true `P`.
    #[default]
    Oracle,
    /// Residuals against the first candidate's fit.
    Fitted,
}

/// Parses `er`, `beta`, `sbm:3`, `dcsbm:3`, `dcmm:3`, `lsm:2` or `lsm:2:1/1`.
pub fn parse_candidate(s: &str) -> Result<CandidateModel> {
    let bad = || HarnessError::Config(format!("cannot parse candidate {s:?}"));
    let parts: Vec<&str> = s.trim().split(':').collect();
    let num = |i: usize| -> Result<usize> {
        parts
            .get(i)
            .ok_or_else(bad)?
            .trim()
            .parse()
            .map_err(|_| bad())
    };
    let c = match (parts[0].trim(), parts.len()) {
        ("er", 1) => CandidateModel::Er,
        ("beta", 1) => CandidateModel::Beta,
        ("sbm", 2) => CandidateModel::Sbm { k: num(1)? },
        ("dcsbm", 2) => CandidateModel::Dcsbm { k: num(1)? },
        ("dcmm", 2) => CandidateModel::Dcmm { k: num(1)? },
        ("lsm", 2) => CandidateModel::Lsm {
            d: num(1)?,
            signature: None,
        },
        ("lsm", 3) => {
            let (a, b) = parts[2].split_once('/').ok_or_else(bad)?;
            CandidateModel::Lsm {
                d: num(1)?,
                signature: Some((
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                )),
            }
        }
        _ => return Err(bad()),
    };
    c.validate()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(c)
}

/// A candidate as written in a config; real-data runs may leave `K` to the
/// dataset registry by naming only the family (`sbm`, `dcsbm`, `dcmm`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CandidateSpec {
    Fixed(CandidateModel),
    PerDataset(&'static str),
}

impl CandidateSpec {
    pub fn resolve(&self, k: usize) -> CandidateModel {
        match *self {
            Self::Fixed(c) => c,
            Self::PerDataset("sbm") => CandidateModel::Sbm { k },
            Self::PerDataset("dcsbm") => CandidateModel::Dcsbm { k },
            Self::PerDataset(_) => CandidateModel::Dcmm { k },
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Fixed(c) => candidate_label(c),
            Self::PerDataset(f) => f.to_string(),
        }
    }
}

fn parse_spec(s: &str) -> Result<CandidateSpec> {
    match s.trim() {
        "sbm" => Ok(CandidateSpec::PerDataset("sbm")),
        "dcsbm" => Ok(CandidateSpec::PerDataset("dcsbm")),
        "dcmm" => Ok(CandidateSpec::PerDataset("dcmm")),
        other => parse_candidate(other).map(CandidateSpec::Fixed),
    }
}

/// Inverse of [`parse_candidate`].
pub fn candidate_label(c: &CandidateModel) -> String {
    match c {
        CandidateModel::Er => "er".into(),
        CandidateModel::Beta => "beta".into(),
        CandidateModel::Sbm { k } => format!("sbm:{k}"),
        CandidateModel::Dcsbm { k } => format!("dcsbm:{k}"),
        CandidateModel::Dcmm { k } => format!("dcmm:{k}"),
        CandidateModel::Lsm { d, signature: None } => format!("lsm:{d}"),
        CandidateModel::Lsm {
            d,
            signature: Some((a, b)),
        } => format!("lsm:{d}:{a}/{b}"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// `er` or a preset name; unused by the real-data experiment.
    pub truth: String,
    pub n_grid: Vec<usize>,
    /// Truth parameters in file order; more than one value makes an axis.
    pub grid: Vec<(String, Vec<String>)>,
    pub candidates: Vec<CandidateSpec>,
    pub reps: usize,
    pub alpha: f64,
    pub base_seed: u64,
    pub k_max: usize,
    pub normalization: Normalization,
    pub datasets: Vec<String>,
    pub data_dir: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults for `kind`: 200 reps for size and power, 1000 for Q-Q, 100
    /// for K estimation; α = 0.001 for K estimation and 0.05 otherwise.
    pub fn new(kind: ExperimentKind) -> Self {
        let (reps, alpha) = match kind {
            ExperimentKind::NullQq => (1000, 0.05),
            ExperimentKind::Kest => (100, 0.001),
            _ => (200, 0.05),
        };
        Self {
            kind,
            truth: "er".into(),
            n_grid: Vec::new(),
            grid: Vec::new(),
            candidates: Vec::new(),
            reps,
            alpha,
            base_seed: 0,
            k_max: 10,
            normalization: Normalization::Oracle,
            datasets: Vec::new(),
            data_dir: None,
            output: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim().to_string();
            if entries.iter().any(|(k, _): &(String, String)| *k == key) {
                return Err(HarnessError::Config(format!(
                    "line {}: duplicate key {key:?}",
                    lineno + 1
                )));
            }
            entries.push((key, value.trim().to_string()));
        }
        let kind = entries
            .iter()
            .find(|(k, _)| k == "experiment")
            .ok_or_else(|| HarnessError::Config("missing key \"experiment\"".into()))?
            .1
            .parse()?;
        let mut cfg = Self::new(kind);
        for (key, value) in entries {
            let scalar =
                |what: &str| HarnessError::Config(format!("{key} = {value:?} is not {what}"));
            match key.as_str() {
                "experiment" => {}
                "truth" => cfg.truth = value.clone(),
                "n" => {
                    cfg.n_grid = list(&value)
                        .iter()
                        .map(|v| v.parse().map_err(|_| scalar("a list of integers")))
                        .collect::<Result<_>>()?
                }
                "candidates" => {
                    cfg.candidates = list(&value)
                        .iter()
                        .map(|c| parse_spec(c))
                        .collect::<Result<_>>()?
                }
                "reps" => cfg.reps = value.parse().map_err(|_| scalar("an integer"))?,
                "alpha" => cfg.alpha = value.parse().map_err(|_| scalar("a number"))?,
                "seed" => {
                    cfg.base_seed = value.parse().map_err(|_| scalar("an unsigned integer"))?
                }
                "k_max" => cfg.k_max = value.parse().map_err(|_| scalar("an integer"))?,
                "normalization" => {
                    cfg.normalization = match value.as_str() {
                        "oracle" => Normalization::Oracle,
                        "fitted" => Normalization::Fitted,
                        _ => return Err(scalar("oracle or fitted")),
                    }
                }
                "datasets" => cfg.datasets = list(&value),
                "data_dir" => cfg.data_dir = Some(PathBuf::from(&value)),
                "output" => cfg.output = Some(PathBuf::from(&value)),
                _ => cfg.grid.push((key.clone(), list(&value))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(HarnessError::Config(m));
        if self.reps == 0 {
            return err("reps must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return err(format!("alpha = {} outside (0, 1)", self.alpha));
        }
        if self.kind == ExperimentKind::Real {
            if self.datasets.is_empty() {
                return err("datasets must not be empty".into());
            }
            if self.candidates.is_empty() {
                return err("candidates must not be empty".into());
            }
            return Ok(());
        }
        if self.n_grid.is_empty() {
            return err("n must not be empty".into());
        }
        if let Some(c) = self
            .candidates
            .iter()
            .find(|c| matches!(c, CandidateSpec::PerDataset(_)))
        {
            return err(format!(
                "candidate {} needs an explicit K outside real-data runs",
                c.label()
            ));
        }
        if let Some((k, _)) = self.grid.iter().find(|(_, v)| v.is_empty()) {
            return err(format!("grid axis {k} is empty"));
        }
        match self.kind {
            ExperimentKind::Size | ExperimentKind::Power if self.candidates.is_empty() => {
                return err("candidates must not be empty".into())
            }
            ExperimentKind::NullQq
                if self.normalization == Normalization::Fitted && self.candidates.is_empty() =>
            {
                return err("fitted normalization needs a candidate".into())
            }
            ExperimentKind::Kest if self.k_max == 0 => {
                return err("k_max must be at least 1".into())
            }
            _ => {}
        }
        // Building every setting once checks names, parameters and sizes.
        for setting in self.settings() {
            setting.truth_spec(&self.truth)?;
            for c in self.fixed_candidates() {
                let size = match c {
                    CandidateModel::Sbm { k }
                    | CandidateModel::Dcsbm { k }
                    | CandidateModel::Dcmm { k } => k,
                    CandidateModel::Lsm { d, .. } => d,
                    _ => 1,
                };
                if size > setting.n {
                    return err(format!(
                        "candidate {} does not fit n = {}",
                        candidate_label(&c),
                        setting.n
                    ));
                }
            }
        }
        Ok(())
    }

    /// Candidates with their `K` fixed; per-dataset entries are skipped.
    pub fn fixed_candidates(&self) -> Vec<CandidateModel> {
        self.candidates
            .iter()
            .filter_map(|c| match c {
                CandidateSpec::Fixed(c) => Some(*c),
                CandidateSpec::PerDataset(_) => None,
            })
            .collect()
    }

    /// Cartesian product of `n` and the grid axes, `n` outermost.
    pub fn settings(&self) -> Vec<Setting> {
        let mut out: Vec<Setting> = self
            .n_grid
            .iter()
            .map(|&n| Setting {
                n,
                params: Vec::new(),
            })
            .collect();
        for (key, values) in &self.grid {
            out = out
                .into_iter()
                .flat_map(|s| {
                    values.iter().map(move |v| {
                        let mut s = s.clone();
                        s.params.push((key.clone(), v.clone()));
                        s
                    })
                })
                .collect();
        }
        out
    }
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect()
}

/// One grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub n: usize,
    pub params: Vec<(String, String)>,
}

impl Setting {
    /// `n=400;rho=0.05`.
    pub fn key(&self) -> String {
        let mut s = format!("n={}", self.n);
        for (k, v) in &self.params {
            s.push_str(&format!(";{k}={v}"));
        }
        s
    }

    pub fn truth_spec(&self, truth: &str) -> Result<TruthSpec> {
        if truth == "er" {
            let mut p = 0.05;
            for (k, v) in &self.params {
                match k.as_str() {
                    "p" | "rho" => {
                        p = v.parse().map_err(|_| {
                            HarnessError::Config(format!("{k} = {v:?} is not a number"))
                        })?
                    }
                    _ => {
                        return Err(HarnessError::Config(format!(
                            "er truth has no parameter {k:?}"
                        )))
                    }
                }
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(HarnessError::Config(format!("p = {p} outside [0, 1]")));
            }
            return Ok(TruthSpec::Er { n: self.n, p });
        }
        Preset::from_params(truth, self.n, &self.params)
            .map(TruthSpec::Preset)
            .map_err(|e| HarnessError::Config(e.to_string()))
    }
}

/// A truth ready to be drawn: fixed ER or a randomized preset.
#[derive(Debug, Clone, PartialEq)]
pub enum TruthSpec {
    Er { n: usize, p: f64 },
    Preset(Preset),
}

impl TruthSpec {
    pub fn draw(
        &self,
        rng: &mut netgof_core::numerics::SeededStream,
    ) -> netgof_core::Result<GroundTruthModel> {
        match *self {
            Self::Er { n, p } => Ok(GroundTruthModel::Er { n, p }),
            Self::Preset(ref preset) => preset.build(rng),
        }
    }

    /// True number of communities, where the family has one.
    pub fn communities(&self) -> Option<usize> {
        match *self {
            Self::Preset(Preset::SbmPlanted { k, .. })
            | Self::Preset(Preset::DcsbmThreeLevel { k, .. })
            | Self::Preset(Preset::DcmmMixed { k, .. }) => Some(k),
            Self::Er { .. } => Some(1),
            _ => None,
        }
    }
}
