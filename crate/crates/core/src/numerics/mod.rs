//! Deterministic numerical kernels.

pub mod eigen;
pub mod kmeans;
pub mod linsolve;
pub mod matrix;
pub mod normal;
pub mod rng;
pub mod spa;
pub mod trace;

pub use eigen::{sym_eigenvalues, sym_eigs, EigenPairs};
pub use kmeans::{kmeans, Clustering, KMeansConfig};
pub use matrix::DenseMatrix;
pub use normal::{normal_cdf, normal_pdf, normal_quantile, two_sided_p_value};
pub use rng::{derive_stream, stable_id, SeededStream};
pub use spa::spa_vertices;
pub use trace::trace_cubed;
