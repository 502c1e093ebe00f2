//! Meta-evaluation of automatic metrics against human scores.
//!
//! The crate computes the twelve grouped correlation measures (global, input,
//! item and system grouping crossed with Pearson, Spearman and Kendall tau-b)
//! and characterizes each measure by
//!
//! * discriminative power, the mean Perm-Both p-value over metric pairs
//!   ([`dp`]),
//! * ranking consistency, the split-half stability of the metric ranking
//!   ([`rc`]),
//! * sensitivity to score granularity, via Monte-Carlo simulation ([`sim`]).
//!
//! All stochastic routines derive per-task generators from a master seed, so
//! results are identical whatever the rayon thread count.

pub mod agreement;
pub mod corrcoef;
pub mod dataset;
pub mod dp;
pub mod error;
pub mod matrix;
pub mod measures;
pub mod numeric;
pub mod rc;
pub mod seed;
pub mod sigtest;
pub mod sim;

pub use corrcoef::{CoefKind, CoefResult, Degeneracy};
pub use dataset::{load_dataset, MetaEvalDataset, MetricScores};
pub use error::{Error, ErrorKind, Result};
pub use matrix::{MatrixView, Scale, ScoreMatrix};
pub use measures::{evaluate, evaluate_all, Grouping, Measure, MeasureResult};
