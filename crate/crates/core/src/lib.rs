//! Class-weighted evaluation of multi-class classifiers.
//!
//! Everything here is pure computation over in-memory data and builds
//! without `std` (only `alloc` is required). File formats and the command
//! line live in the companion `wba` crate.
//!
//! The central quantity is Weighted Balanced Accuracy: per-class accuracies
//! (recall) combined with per-class importance weights that live on the
//! probability simplex. With uniform weights it is Balanced Accuracy, with
//! frequency weights it is plain Accuracy.
//!
//! - [`confusion`]: the [`ConfusionMatrix`] every metric is computed from.
//! - [`metrics`]: Accuracy, Balanced Accuracy, WBA and weighted macro
//!   precision / recall / F1.
//! - [`weighting`]: user, rarity, composite and partially specified weights.
//! - [`wloss`]: class-weighted softmax cross-entropy and its gradient.
//! - [`profile`]: class frequencies, infrequent classes and skew.
//! - [`analysis`]: multi-run reports, rankings and ranking disagreements.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod confusion;
mod error;
pub mod metrics;
pub mod profile;
pub mod weighting;
pub mod wloss;

pub use analysis::{
    disagreements, evaluate_suite, rank_by, Disagreement, MetricNotes, MetricReport, Ranking,
    RunReport, RunResult,
};
pub use confusion::ConfusionMatrix;
pub use error::{Error, Result};
pub use metrics::{
    accuracy, balanced_accuracy, per_class_accuracy, wba, weighted_macro, ClassStat, ClassStats,
    Component, MacroKind, MetricKind, MetricValue, Note, Resolution,
};
pub use profile::{class_frequencies, infrequent_classes, skew, ClassFrequencies, DatasetProfile};
pub use weighting::{
    composite_weights, frequency_weights, partial_fill, rarity_weights, rarity_weights_from_counts,
    user_weights, validate, Criterion, CriterionSource, CriterionSpec, FillPolicy, Violation, WeightSpec, WeightVector,
};
pub use wloss::{weighted_nll, weighted_nll_grad, LogitBatch};
