//! Locating and loading the real networks.
//!
//! Each dataset is a file `<name>.txt` in the data directory. Edge lists use
//! one-based node ids; the trade network is instead a whitespace-separated
//! weight matrix that is symmetrized as `W + Wᵀ` and thresholded at the
//! median of its upper triangle.

use std::env;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use netgof_core::graph::{load_edge_list, load_weight_matrix, threshold_at_median};
use netgof_core::{AdjacencyMatrix, Indexing};

use crate::error::{HarnessError, Result};

/// Environment variable that overrides the default data directory.
pub const DATA_ENV: &str = "NETGOF_DATA";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    EdgeList,
    /// Directed trade volumes, thresholded after symmetrization.
    WeightMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetInfo {
    pub name: &'static str,
    pub format: DatasetFormat,
    /// Number of communities used for block-model candidates.
    pub communities: usize,
}

pub const DATASETS: [DatasetInfo; 5] = [
    DatasetInfo {
        name: "foodweb",
        format: DatasetFormat::EdgeList,
        communities: 1,
    },
    DatasetInfo {
        name: "karate",
        format: DatasetFormat::EdgeList,
        communities: 2,
    },
    DatasetInfo {
        name: "dolphin",
        format: DatasetFormat::EdgeList,
        communities: 2,
    },
    DatasetInfo {
        name: "football",
        format: DatasetFormat::EdgeList,
        communities: 11,
    },
    DatasetInfo {
        name: "trade",
        format: DatasetFormat::WeightMatrix,
        communities: 3,
    },
];

/// Registry entry for `name`; unknown names are edge lists with one community.
pub fn dataset_info(name: &str) -> DatasetInfo {
    DATASETS
        .iter()
        .copied()
        .find(|d| d.name == name)
        .unwrap_or(DatasetInfo {
            name: "custom",
            format: DatasetFormat::EdgeList,
            communities: 1,
        })
}

/// `explicit`, else `$NETGOF_DATA`, else `./data`.
pub fn data_dir(explicit: Option<&Path>) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => env::var_os(DATA_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("data")),
    }
}

pub fn dataset_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.txt"))
}

pub fn load_dataset(dir: &Path, name: &str) -> Result<AdjacencyMatrix> {
    let path = dataset_path(dir, name);
    if !path.is_file() {
        return Err(HarnessError::DatasetMissing {
            name: name.to_string(),
            path: path.display().to_string(),
        });
    }
    let reader = BufReader::new(File::open(&path)?);
    match dataset_info(name).format {
        DatasetFormat::EdgeList => Ok(load_edge_list(reader, Indexing::OneBased, None)?.adjacency),
        DatasetFormat::WeightMatrix => Ok(threshold_at_median(&load_weight_matrix(reader)?)?),
    }
}
