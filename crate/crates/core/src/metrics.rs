//! Scalar metrics computed from a [`ConfusionMatrix`].
//!
//! All sums run in label order so results are reproducible bit for bit.
//! Per-class components that are undefined (a class with no true items, a
//! class that is never predicted) are resolved deterministically and
//! reported as [`Note`]s on the returned [`MetricValue`].

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::confusion::ConfusionMatrix;
use crate::error::{Error, Result};
use crate::weighting::WeightVector;

/// Metric identifiers, with short names used on the command line and in
/// reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MetricKind {
    #[cfg_attr(feature = "serde", serde(rename = "accuracy"))]
    Accuracy,
    #[cfg_attr(feature = "serde", serde(rename = "ba"))]
    BalancedAccuracy,
    #[cfg_attr(feature = "serde", serde(rename = "wba"))]
    Wba,
    #[cfg_attr(feature = "serde", serde(rename = "wprecision"))]
    WeightedPrecision,
    #[cfg_attr(feature = "serde", serde(rename = "wrecall"))]
    WeightedRecall,
    #[cfg_attr(feature = "serde", serde(rename = "wf1"))]
    WeightedF1,
    /// Unweighted macro average over classes present in the ground truth.
    #[cfg_attr(feature = "serde", serde(rename = "precision"))]
    MacroPrecision,
    #[cfg_attr(feature = "serde", serde(rename = "recall"))]
    MacroRecall,
    #[cfg_attr(feature = "serde", serde(rename = "f1"))]
    MacroF1,
}

impl MetricKind {
    pub const ALL: [MetricKind; 9] = [
        MetricKind::Accuracy,
        MetricKind::BalancedAccuracy,
        MetricKind::Wba,
        MetricKind::WeightedPrecision,
        MetricKind::WeightedRecall,
        MetricKind::WeightedF1,
        MetricKind::MacroPrecision,
        MetricKind::MacroRecall,
        MetricKind::MacroF1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Accuracy => "accuracy",
            MetricKind::BalancedAccuracy => "ba",
            MetricKind::Wba => "wba",
            MetricKind::WeightedPrecision => "wprecision",
            MetricKind::WeightedRecall => "wrecall",
            MetricKind::WeightedF1 => "wf1",
            MetricKind::MacroPrecision => "precision",
            MetricKind::MacroRecall => "recall",
            MetricKind::MacroF1 => "f1",
        }
    }

    /// Whether the metric depends on class importance weights.
    pub fn is_weighted(self) -> bool {
        matches!(
            self,
            MetricKind::Wba
                | MetricKind::WeightedPrecision
                | MetricKind::WeightedRecall
                | MetricKind::WeightedF1
        )
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        MetricKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

/// The per-class quantity a weighted macro average is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacroKind {
    Precision,
    Recall,
    F1,
}

/// Which per-class component was undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Component {
    /// Per-class accuracy (recall); undefined when the class has no true items.
    Accuracy,
    /// Per-class precision; undefined when the class is never predicted.
    Precision,
}

/// How an undefined per-class component was handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Resolution {
    ExcludedFromMean,
    /// The class carries zero weight, so it contributes nothing.
    IgnoredZeroWeight,
    DefinedAsZero,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Note {
    pub label: String,
    pub component: Component,
    pub resolution: Resolution,
}

/// A metric score in `[0, 1]` plus notes on degenerate classes.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricValue {
    pub kind: MetricKind,
    pub value: f64,
    pub notes: Vec<Note>,
}

/// Per-class counts and scores.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassStat {
    pub label: String,
    /// True cardinality n_i.
    pub support: u64,
    /// Correct predictions p_i.
    pub correct: u64,
    /// Items predicted as this class.
    pub predicted: u64,
    /// Relative frequency f_i = n_i / N.
    pub frequency: f64,
    /// p_i / n_i; `None` when n_i = 0.
    pub accuracy: Option<f64>,
    /// `None` when the class is never predicted.
    pub precision: Option<f64>,
    /// Same as `accuracy`.
    pub recall: Option<f64>,
    /// `None` when recall is undefined; an undefined precision counts as 0.
    pub f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct ClassStats {
    pub classes: Vec<ClassStat>,
}

impl ClassStats {
    pub fn accuracies(&self) -> Vec<Option<f64>> {
        self.classes.iter().map(|c| c.accuracy).collect()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.classes.iter().map(|c| c.frequency).collect()
    }
}

fn nonempty(cm: &ConfusionMatrix) -> Result<u64> {
    match cm.total() {
        0 => Err(Error::EmptyMatrix),
        n => Ok(n),
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Overall accuracy: correct predictions over all items.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<MetricValue> {
    let n = nonempty(cm)?;
    let correct: u64 = (0..cm.n_classes()).map(|i| cm.correct(i)).sum();
    Ok(MetricValue { kind: MetricKind::Accuracy, value: correct as f64 / n as f64, notes: Vec::new() })
}

/// Per-class accuracy (recall) together with precision, F1 and frequency.
pub fn per_class_accuracy(cm: &ConfusionMatrix) -> Result<ClassStats> {
    let n = nonempty(cm)?;
    let classes = (0..cm.n_classes())
        .map(|i| {
            let support = cm.support(i);
            let correct = cm.correct(i);
            let predicted = cm.predicted(i);
            let accuracy = ratio(correct, support);
            let precision = ratio(correct, predicted);
            ClassStat {
                label: cm.labels()[i].clone(),
                support,
                correct,
                predicted,
                frequency: support as f64 / n as f64,
                accuracy,
                precision,
                recall: accuracy,
                f1: accuracy.map(|r| f1_score(precision.unwrap_or(0.0), r)),
            }
        })
        .collect();
    Ok(ClassStats { classes })
}

/// Mean of per-class accuracies over classes with at least one true item.
pub fn balanced_accuracy(cm: &ConfusionMatrix) -> Result<MetricValue> {
    nonempty(cm)?;
    let populated = (0..cm.n_classes()).filter(|&i| cm.support(i) > 0).count();
    if populated == 0 {
        return Err(Error::NoPopulatedClass);
    }
    // Same form as wba() with uniform weights, so the two agree exactly.
    let share = 1.0 / populated as f64;
    let mut value = 0.0;
    let mut notes = Vec::new();
    for i in 0..cm.n_classes() {
        match ratio(cm.correct(i), cm.support(i)) {
            Some(acc) => value += share * acc,
            None => notes.push(Note {
                label: cm.labels()[i].clone(),
                component: Component::Accuracy,
                resolution: Resolution::ExcludedFromMean,
            }),
        }
    }
    Ok(MetricValue { kind: MetricKind::BalancedAccuracy, value, notes })
}

/// Weighted Balanced Accuracy: `Σ w_i · accuracy_i`.
pub fn wba(cm: &ConfusionMatrix, w: &WeightVector) -> Result<MetricValue> {
    let mut v = weighted_sum(cm, w.labels(), w.weights(), MacroKind::Recall)?;
    v.kind = MetricKind::Wba;
    Ok(v)
}

/// Weighted macro precision, recall or F1: `Σ w_i · m_i`.
pub fn weighted_macro(cm: &ConfusionMatrix, w: &WeightVector, kind: MacroKind) -> Result<MetricValue> {
    weighted_sum(cm, w.labels(), w.weights(), kind)
}

/// Unweighted macro average over classes present in the ground truth.
pub(crate) fn macro_average(cm: &ConfusionMatrix, kind: MacroKind) -> Result<MetricValue> {
    nonempty(cm)?;
    let populated = (0..cm.n_classes()).filter(|&i| cm.support(i) > 0).count();
    if populated == 0 {
        return Err(Error::NoPopulatedClass);
    }
    let share = 1.0 / populated as f64;
    let weights: Vec<f64> = (0..cm.n_classes())
        .map(|i| if cm.support(i) > 0 { share } else { 0.0 })
        .collect();
    let mut v = weighted_sum(cm, cm.labels(), &weights, kind)?;
    v.kind = match kind {
        MacroKind::Precision => MetricKind::MacroPrecision,
        MacroKind::Recall => MetricKind::MacroRecall,
        MacroKind::F1 => MetricKind::MacroF1,
    };
    Ok(v)
}

fn check_alignment(cm: &ConfusionMatrix, labels: &[String]) -> Result<()> {
    if labels.len() != cm.n_classes() {
        return Err(Error::DimensionMismatch { expected: cm.n_classes(), found: labels.len() });
    }
    for (index, (expected, found)) in cm.labels().iter().zip(labels).enumerate() {
        if expected != found {
            return Err(Error::LabelMismatch {
                index,
                expected: expected.clone(),
                found: found.clone(),
            });
        }
    }
    Ok(())
}

fn weighted_sum(
    cm: &ConfusionMatrix,
    labels: &[String],
    weights: &[f64],
    kind: MacroKind,
) -> Result<MetricValue> {
    check_alignment(cm, labels)?;
    nonempty(cm)?;
    let mut value = 0.0;
    let mut notes = Vec::new();
    for (i, &w) in weights.iter().enumerate() {
        let label = &cm.labels()[i];
        let support = cm.support(i);
        if w > 0.0 && support == 0 {
            return Err(Error::WeightOnEmptyClass(label.clone()));
        }
        let correct = cm.correct(i);
        let recall = ratio(correct, support);
        let precision = ratio(correct, cm.predicted(i));
        let needs_precision = matches!(kind, MacroKind::Precision | MacroKind::F1);
        let needs_recall = matches!(kind, MacroKind::Recall | MacroKind::F1);

        let resolution = if w > 0.0 { Resolution::DefinedAsZero } else { Resolution::IgnoredZeroWeight };
        if needs_recall && recall.is_none() {
            notes.push(Note { label: label.clone(), component: Component::Accuracy, resolution: Resolution::IgnoredZeroWeight });
        }
        if needs_precision && precision.is_none() {
            notes.push(Note { label: label.clone(), component: Component::Precision, resolution });
        }
        if w == 0.0 {
            continue;
        }
        let p = precision.unwrap_or(0.0);
        // support > 0 here, so recall is defined
        let r = recall.unwrap_or(0.0);
        let m = match kind {
            MacroKind::Precision => p,
            MacroKind::Recall => r,
            MacroKind::F1 => f1_score(p, r),
        };
        value += w * m;
    }
    let kind = match kind {
        MacroKind::Precision => MetricKind::WeightedPrecision,
        MacroKind::Recall => MetricKind::WeightedRecall,
        MacroKind::F1 => MetricKind::WeightedF1,
    };
    Ok(MetricValue { kind, value, notes })
}

/// Computes `kind`, using `w` for the weighted metrics.
pub fn compute(kind: MetricKind, cm: &ConfusionMatrix, w: &WeightVector) -> Result<MetricValue> {
    match kind {
        MetricKind::Accuracy => accuracy(cm),
        MetricKind::BalancedAccuracy => balanced_accuracy(cm),
        MetricKind::Wba => wba(cm, w),
        MetricKind::WeightedPrecision => weighted_macro(cm, w, MacroKind::Precision),
        MetricKind::WeightedRecall => weighted_macro(cm, w, MacroKind::Recall),
        MetricKind::WeightedF1 => weighted_macro(cm, w, MacroKind::F1),
        MetricKind::MacroPrecision => macro_average(cm, MacroKind::Precision),
        MetricKind::MacroRecall => macro_average(cm, MacroKind::Recall),
        MetricKind::MacroF1 => macro_average(cm, MacroKind::F1),
    }
}
