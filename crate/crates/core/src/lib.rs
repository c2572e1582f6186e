//! Structure learning for sparse Gaussian graphical models with the
//! multiplicative-weights (Sparsitron) neighborhood learner.
//!
//! - [`model`]: precision matrices, random instances, derived parameters.
//! - [`sampler`]: deterministic `N(0, Σ)` sampling and normalization.
//! - [`sparsitron`]: the Hedge-based learner for one neighborhood.
//! - [`recovery`]: per-node learning and thresholding into a graph.
//! - [`oracle`]: closed-form risks used as ground truth.
//! - [`cli`]: experiment orchestration behind the `ggm-mw` binary.

pub mod cli;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod recovery;
pub mod rng;
pub mod sampler;
pub mod sparsitron;

pub use error::{Error, Result};
