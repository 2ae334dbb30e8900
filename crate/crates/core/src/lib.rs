//! Toolkit for out-of-distribution detection benchmarks.
//!
//! - [`datamodel`]: labeled embedding datasets and their on-disk format
//! - [`splitgen`]: adjacent (held-out class) and cross-dataset splits
//! - [`scorers`]: MSP, Mahalanobis and kNN detectors
//! - [`metrics`]: AUROC, FPR at a target TPR and seed aggregation
//! - [`infotheory`]: exact entropy, mutual information and bottleneck search
//!   on small discrete joints
//! - [`synthgen`]: two-factor synthetic embeddings
//! - [`runner`]: configured end-to-end runs and reports

pub mod datamodel;
pub mod error;
pub mod infotheory;
pub mod metrics;
pub mod rng;
pub mod runner;
pub mod scorers;
pub mod splitgen;
pub mod synthgen;

pub use datamodel::{load_dataset, write_dataset, LabeledDataset, SplitTag};
pub use error::{Error, Result};
pub use metrics::{aggregate, auroc, fpr_at_tpr, AggregateResult, MetricResult};
pub use runner::{run_benchmark, EvalReport, RunConfig};
pub use scorers::{ScorerConfig, ScorerMethod};
pub use splitgen::{generate_adjacent_split, BenchmarkSplit, SplitKind};
