//! Spectral goodness-of-fit testing for random-graph models.

pub mod error;
pub mod estimators;
pub mod gof;
pub mod graph;
pub mod models;
pub mod numerics;
pub mod scalar;

pub use error::{Error, Result};
pub use graph::{AdjacencyMatrix, DegreeVector, GraphSummary, Indexing, ProbabilityMatrix};
pub use scalar::Scalar;

pub type DenseMatrixF32 = numerics::DenseMatrix<f32>;
pub type DenseMatrixF64 = numerics::DenseMatrix<f64>;
pub type ProbabilityMatrixF32 = graph::ProbabilityMatrix<f32>;
pub type ProbabilityMatrixF64 = graph::ProbabilityMatrix<f64>;
pub type MembershipMatrixF32 = models::MembershipMatrix<f32>;
pub type MembershipMatrixF64 = models::MembershipMatrix<f64>;
pub type GroundTruthModelF32 = models::GroundTruthModel<f32>;
pub type GroundTruthModelF64 = models::GroundTruthModel<f64>;
pub type FittedModelF32 = estimators::FittedModel<f32>;
pub type FittedModelF64 = estimators::FittedModel<f64>;
pub type TestResultF32 = gof::TestResult<f32>;
pub type TestResultF64 = gof::TestResult<f64>;
