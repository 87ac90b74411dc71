//! Monte-Carlo experiments and real-data runs for the goodness-of-fit test.

pub mod config;
pub mod data;
pub mod error;
pub mod experiments;
pub mod table;

pub use config::{
    parse_candidate, CandidateSpec, ExperimentConfig, ExperimentKind, Normalization, Setting,
};
pub use error::{HarnessError, Result};
pub use experiments::{run, run_kest, run_null_qq, run_power, run_real, run_size, NullQq, Outcome};
pub use table::{Format, ResultRow, ResultTable};
