//! Mining version-control history for defect prediction.
//!
//! Parses `git log --numstat` output into commits, splits them into release
//! windows, builds the co-change graph of each window and derives two
//! entropy measures per file: change entropy (how scattered changes are
//! across files) and co-change graph entropy (how scattered a file's
//! co-change relationships are). Both are combined with process metrics into
//! per-release datasets and analysed with correlation and rank-based tests.

pub mod config;
pub mod entropy;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod labels;
pub mod metrics;
pub mod pipeline;
pub mod stats;

pub use config::ProjectConfig;
pub use entropy::{
    attribute_entropy, change_probabilities, entropy_report, shannon_entropy, Distribution, EntropyReport, Measure,
};
pub use error::{Error, Result};
pub use graph::CoChangeGraph;
pub use ingest::{
    assign_release_windows, filter_fatty, filter_source_files, parse_change_log, ChangeHistory, Commit, FileChange,
    ReleaseRole, ReleaseSpec,
};
pub use labels::{emit_experiment, join_and_label, load_labels, DefectLabelRecord};
pub use metrics::{build_metric_set, compute_row, compute_rows, FileMetricsRow, MetricSet, WindowAnalysis};
pub use stats::StatResult;
