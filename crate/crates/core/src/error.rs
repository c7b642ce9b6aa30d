use alloc::string::String;
use core::fmt;

use crate::metrics::MetricKind;

/// Everything that can go wrong in the core computations.
#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// The confusion matrix holds no items (N = 0).
    EmptyMatrix,
    /// A label set with no classes.
    NoClasses,
    DuplicateLabel(String),
    /// A row, column or vector does not have the expected length.
    DimensionMismatch { expected: usize, found: usize },
    /// Every class has zero true items.
    NoPopulatedClass,
    /// Two label lists that must be identical differ at `index`.
    LabelMismatch { index: usize, expected: String, found: String },
    UnknownLabel(String),
    MissingWeight(String),
    WeightOutOfRange { label: String, value: f64 },
    WeightSum { sum: f64 },
    /// A positive weight on a class that never occurs in the ground truth.
    WeightOnEmptyClass(String),
    /// Rarity is undefined for a class with zero frequency.
    ZeroFrequency(String),
    InvalidFrequency { label: String, value: f64 },
    FrequencySum { sum: f64 },
    TooFewCriteria(usize),
    CriterionValue { criterion: String, label: String, value: f64 },
    CriterionNotNormalized { criterion: String, sum: f64 },
    /// Every class has a zero product across the composite criteria.
    NoSurvivingClass,
    /// Rarity fill requested without a frequency distribution.
    MissingFrequencies,
    EmptyInput,
    TooFewValues { needed: usize, found: usize },
    ZeroVariance,
    ClassOutOfRange { item: usize, class: usize, classes: usize },
    NonFiniteLogit { item: usize, class: usize },
    /// Every item in a batch belongs to a zero-weight class.
    NoWeightedItems,
    UnknownMetric(String),
    MetricNotInReport(MetricKind),
    DuplicateRun(String),
    NoRuns,
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyMatrix => f.write_str("confusion matrix contains no items"),
            Error::NoClasses => f.write_str("label set is empty"),
            Error::DuplicateLabel(l) => write!(f, "duplicate label `{l}`"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NoPopulatedClass => f.write_str("no class has any true items"),
            Error::LabelMismatch { index, expected, found } => write!(
                f,
                "label mismatch at position {index}: expected `{expected}`, found `{found}`"
            ),
            Error::UnknownLabel(l) => write!(f, "unknown label `{l}`"),
            Error::MissingWeight(l) => write!(f, "no weight given for label `{l}`"),
            Error::WeightOutOfRange { label, value } => {
                write!(f, "weight {value} for label `{label}` is outside [0, 1]")
            }
            Error::WeightSum { sum } => write!(f, "weights sum to {sum}, expected 1"),
            Error::WeightOnEmptyClass(l) => write!(
                f,
                "label `{l}` has positive weight but no true items"
            ),
            Error::ZeroFrequency(l) => {
                write!(f, "rarity is undefined for label `{l}` with zero frequency")
            }
            Error::InvalidFrequency { label, value } => {
                write!(f, "frequency {value} for label `{label}` is not in [0, 1]")
            }
            Error::FrequencySum { sum } => write!(f, "frequencies sum to {sum}, expected 1"),
            Error::TooFewCriteria(m) => {
                write!(f, "composite weights need at least 2 criteria, got {m}")
            }
            Error::CriterionValue { criterion, label, value } => write!(
                f,
                "criterion `{criterion}` gives label `{label}` invalid weight {value}"
            ),
            Error::CriterionNotNormalized { criterion, sum } => {
                write!(f, "criterion `{criterion}` sums to {sum}, expected 1")
            }
            Error::NoSurvivingClass => {
                f.write_str("no class has a non-zero weight under every criterion")
            }
            Error::MissingFrequencies => f.write_str("rarity fill requires class frequencies"),
            Error::EmptyInput => f.write_str("input is empty"),
            Error::TooFewValues { needed, found } => {
                write!(f, "need at least {needed} values, got {found}")
            }
            Error::ZeroVariance => f.write_str("values have zero variance"),
            Error::ClassOutOfRange { item, class, classes } => write!(
                f,
                "item {item} has class index {class}, but there are only {classes} classes"
            ),
            Error::NonFiniteLogit { item, class } => {
                write!(f, "logit for item {item}, class {class} is not finite")
            }
            Error::NoWeightedItems => {
                f.write_str("every item belongs to a zero-weight class; loss is undefined")
            }
            Error::UnknownMetric(m) => write!(f, "unknown metric `{m}`"),
            Error::MetricNotInReport(m) => write!(f, "metric `{m}` is not part of the report"),
            Error::DuplicateRun(r) => write!(f, "duplicate run name `{r}`"),
            Error::NoRuns => f.write_str("no runs to evaluate"),
        }
    }
}

impl core::error::Error for Error {}
