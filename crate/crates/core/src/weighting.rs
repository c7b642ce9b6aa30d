//! Class importance weights.
//!
//! A [`WeightVector`] always lies on the probability simplex. The
//! constructors below produce one from user-supplied weights, from class
//! rarity (normalized inverse frequency), from a product of several
//! criteria, or from a partial user specification with the remainder filled
//! in automatically. [`WeightSpec`] describes a scheme declaratively and is
//! resolved against a concrete label set and class distribution.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::confusion::ConfusionMatrix;
use crate::error::{Error, Result};

/// Tolerance on the sum of user-supplied weights and frequencies.
pub const INPUT_TOLERANCE: f64 = 1e-6;

/// Tolerance used by [`validate`] for stored weight vectors.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Per-class weights aligned to an ordered label set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawWeights", into = "RawWeights"))]
pub struct WeightVector {
    labels: Vec<String>,
    weights: Vec<f64>,
}

impl WeightVector {
    /// Checks `weights` against the simplex (sum within [`INPUT_TOLERANCE`])
    /// and stores them divided by their sum.
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        check_unique(&labels)?;
        if labels.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: labels.len(), found: weights.len() });
        }
        for (label, &value) in labels.iter().zip(&weights) {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::WeightOutOfRange { label: label.clone(), value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > INPUT_TOLERANCE {
            return Err(Error::WeightSum { sum });
        }
        Ok(Self::normalized(labels, weights))
    }

    /// `1 / C` for every class.
    pub fn uniform(labels: Vec<String>) -> Result<Self> {
        check_unique(&labels)?;
        let w = 1.0 / labels.len() as f64;
        let weights = vec![w; labels.len()];
        Ok(Self { labels, weights })
    }

    // Caller guarantees non-negative weights with a positive sum.
    fn normalized(labels: Vec<String>, mut weights: Vec<f64>) -> Self {
        let sum: f64 = weights.iter().sum();
        if sum != 1.0 {
            weights.iter_mut().for_each(|w| *w /= sum);
        }
        Self { labels, weights }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.weights[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.labels.iter().map(String::as_str).zip(self.weights.iter().copied())
    }

    pub fn validate(&self) -> core::result::Result<(), Vec<Violation>> {
        validate(&self.weights)
    }
}

/// A violated simplex condition.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    NotFinite { index: usize },
    OutOfRange { index: usize, value: f64 },
    SumNotOne { sum: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => f.write_str("no weights"),
            Violation::NotFinite { index } => write!(f, "weight {index} is not finite"),
            Violation::OutOfRange { index, value } => {
                write!(f, "weight {index} = {value} is outside [0, 1]")
            }
            Violation::SumNotOne { sum } => write!(f, "weights sum to {sum}, not 1"),
        }
    }
}

/// Lists every simplex condition `weights` violates.
pub fn validate(weights: &[f64]) -> core::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    if weights.is_empty() {
        out.push(Violation::Empty);
    }
    for (index, &value) in weights.iter().enumerate() {
        if !value.is_finite() {
            out.push(Violation::NotFinite { index });
        } else if !(0.0..=1.0).contains(&value) {
            out.push(Violation::OutOfRange { index, value });
        }
    }
    let sum: f64 = weights.iter().sum();
    if !weights.is_empty() && (sum.is_nan() || (sum - 1.0).abs() > SIMPLEX_TOLERANCE) {
        out.push(Violation::SumNotOne { sum });
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn check_unique(labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::NoClasses);
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

fn check_keys(labels: &[String], map: &BTreeMap<String, f64>) -> Result<()> {
    match map.keys().find(|k| !labels.contains(k)) {
        Some(k) => Err(Error::UnknownLabel(k.clone())),
        None => Ok(()),
    }
}

/// User-defined weights: `w_i = u_i`. Every label needs a value.
pub fn user_weights(labels: &[String], user: &BTreeMap<String, f64>) -> Result<WeightVector> {
    check_keys(labels, user)?;
    let weights = labels
        .iter()
        .map(|l| user.get(l).copied().ok_or_else(|| Error::MissingWeight(l.clone())))
        .collect::<Result<Vec<f64>>>()?;
    WeightVector::new(labels.to_vec(), weights)
}

/// Rarity weights from relative frequencies:
/// `w_i = 1 / (f_i · Σ_j 1/f_j)`.
pub fn rarity_weights(labels: &[String], frequencies: &[f64]) -> Result<WeightVector> {
    check_unique(labels)?;
    check_frequencies(labels, frequencies)?;
    let sum: f64 = frequencies.iter().sum();
    if (sum - 1.0).abs() > INPUT_TOLERANCE {
        return Err(Error::FrequencySum { sum });
    }
    Ok(inverse_normalized(labels, frequencies))
}

/// Rarity weights from raw class counts. The inverse-frequency form is
/// scale invariant, so this equals [`rarity_weights`] on `n_i / N`.
pub fn rarity_weights_from_counts(labels: &[String], counts: &[u64]) -> Result<WeightVector> {
    check_unique(labels)?;
    if labels.len() != counts.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), found: counts.len() });
    }
    if let Some(i) = counts.iter().position(|&n| n == 0) {
        return Err(Error::ZeroFrequency(labels[i].clone()));
    }
    let counts: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
    Ok(inverse_normalized(labels, &counts))
}

fn check_frequencies(labels: &[String], frequencies: &[f64]) -> Result<()> {
    if labels.len() != frequencies.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), found: frequencies.len() });
    }
    for (label, &f) in labels.iter().zip(frequencies) {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidFrequency { label: label.clone(), value: f });
        }
        if f == 0.0 {
            return Err(Error::ZeroFrequency(label.clone()));
        }
    }
    Ok(())
}

// values must all be positive
fn inverse_normalized(labels: &[String], values: &[f64]) -> WeightVector {
    let inv_sum: f64 = values.iter().map(|v| 1.0 / v).sum();
    let weights = values.iter().map(|v| 1.0 / (v * inv_sum)).collect();
    WeightVector::normalized(labels.to_vec(), weights)
}

/// One column of a composite scheme: a simplex vector aligned to the labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub name: String,
    pub weights: Vec<f64>,
}

/// Multiplicative composite of `M ≥ 2` criteria:
/// `w_i = Π_j m_ij / Σ_k Π_j m_kj`.
///
/// Each criterion must already be on the simplex; columns are not
/// normalized on the caller's behalf.
pub fn composite_weights(labels: &[String], criteria: &[Criterion]) -> Result<WeightVector> {
    check_unique(labels)?;
    if criteria.len() < 2 {
        return Err(Error::TooFewCriteria(criteria.len()));
    }
    for c in criteria {
        if c.weights.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: labels.len(), found: c.weights.len() });
        }
        for (label, &value) in labels.iter().zip(&c.weights) {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::CriterionValue {
                    criterion: c.name.clone(),
                    label: label.clone(),
                    value,
                });
            }
        }
        let sum: f64 = c.weights.iter().sum();
        if (sum - 1.0).abs() > INPUT_TOLERANCE {
            return Err(Error::CriterionNotNormalized { criterion: c.name.clone(), sum });
        }
    }
    let products: Vec<f64> = (0..labels.len())
        .map(|i| criteria.iter().map(|c| c.weights[i]).product())
        .collect();
    let total: f64 = products.iter().sum();
    if total <= 0.0 {
        return Err(Error::NoSurvivingClass);
    }
    let weights = products.iter().map(|p| p / total).collect();
    Ok(WeightVector::normalized(labels.to_vec(), weights))
}

/// How leftover mass is spread over classes the user did not specify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum FillPolicy {
    #[default]
    Even,
    /// Proportional to rarity among the unspecified classes.
    Rarity,
}

impl FillPolicy {
    pub fn name(self) -> &'static str {
        match self {
            FillPolicy::Even => "even",
            FillPolicy::Rarity => "rarity",
        }
    }
}

/// Partially specified user weights. Specified classes keep their value;
/// the remaining mass `1 - Σ u_i` goes to the other classes according to
/// `fill`. `frequencies` (aligned to `labels`) is needed for
/// [`FillPolicy::Rarity`].
pub fn partial_fill(
    labels: &[String],
    specified: &BTreeMap<String, f64>,
    fill: FillPolicy,
    frequencies: Option<&[f64]>,
) -> Result<WeightVector> {
    check_unique(labels)?;
    check_keys(labels, specified)?;
    for (label, &value) in specified {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::WeightOutOfRange { label: label.clone(), value });
        }
    }
    let given: f64 = labels.iter().filter_map(|l| specified.get(l)).sum();
    if given > 1.0 + INPUT_TOLERANCE {
        return Err(Error::WeightSum { sum: given });
    }
    let open: Vec<usize> = (0..labels.len()).filter(|&i| !specified.contains_key(&labels[i])).collect();
    if open.is_empty() {
        return user_weights(labels, specified);
    }
    let remaining = (1.0 - given).max(0.0);
    let mut weights: Vec<f64> = labels.iter().map(|l| specified.get(l).copied().unwrap_or(0.0)).collect();
    match fill {
        FillPolicy::Even => {
            let share = remaining / open.len() as f64;
            for &i in &open {
                weights[i] = share;
            }
        }
        FillPolicy::Rarity => {
            let freqs = frequencies.ok_or(Error::MissingFrequencies)?;
            if freqs.len() != labels.len() {
                return Err(Error::DimensionMismatch { expected: labels.len(), found: freqs.len() });
            }
            for &i in &open {
                let f = freqs[i];
                if !(0.0..=1.0).contains(&f) {
                    return Err(Error::InvalidFrequency { label: labels[i].clone(), value: f });
                }
                if f == 0.0 {
                    return Err(Error::ZeroFrequency(labels[i].clone()));
                }
            }
            let inv_sum: f64 = open.iter().map(|&i| 1.0 / freqs[i]).sum();
            for &i in &open {
                weights[i] = remaining / (freqs[i] * inv_sum);
            }
        }
    }
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return Err(Error::WeightSum { sum });
    }
    Ok(WeightVector::normalized(labels.to_vec(), weights))
}

/// Frequency weights `w_i = n_i / N`; with these WBA equals Accuracy.
pub fn frequency_weights(cm: &ConfusionMatrix) -> Result<WeightVector> {
    let n = cm.total();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let weights = cm.supports().iter().map(|&c| c as f64 / n as f64).collect();
    Ok(WeightVector::normalized(cm.labels().to_vec(), weights))
}

/// Where a composite criterion's column comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum CriterionSource {
    Explicit(BTreeMap<String, f64>),
    /// Rarity weights of the class distribution being evaluated.
    Rarity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionSpec {
    pub name: String,
    pub source: CriterionSource,
}

/// Declarative description of how weights are produced.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    /// Full user map; every class present in the ground truth needs a value.
    User(BTreeMap<String, f64>),
    /// Rarity from the evaluated class distribution, or from `reference`
    /// when supplied.
    Rarity { reference: Option<BTreeMap<String, f64>> },
    Composite(Vec<CriterionSpec>),
    Partial { weights: BTreeMap<String, f64>, fill: FillPolicy },
}

impl WeightSpec {
    pub fn scheme(&self) -> &'static str {
        match self {
            WeightSpec::User(_) => "user",
            WeightSpec::Rarity { .. } => "rarity",
            WeightSpec::Composite(_) => "composite",
            WeightSpec::Partial { .. } => "partial",
        }
    }

    /// Resolves the scheme for a label set whose ground-truth class
    /// distribution is `frequencies`.
    ///
    /// Classes with zero frequency never occur in the ground truth; they
    /// get weight 0 unless the user explicitly assigns one.
    pub fn resolve(&self, labels: &[String], frequencies: &[f64]) -> Result<WeightVector> {
        check_unique(labels)?;
        if labels.len() != frequencies.len() {
            return Err(Error::DimensionMismatch { expected: labels.len(), found: frequencies.len() });
        }
        let present: Vec<bool> = frequencies.iter().map(|&f| f > 0.0).collect();
        match self {
            WeightSpec::User(map) => {
                check_keys(labels, map)?;
                let keep: Vec<usize> = (0..labels.len())
                    .filter(|&i| present[i] || map.contains_key(&labels[i]))
                    .collect();
                let sub = subset(labels, &keep);
                let w = user_weights(&sub, map)?;
                Ok(expand(labels, &keep, &w))
            }
            WeightSpec::Rarity { reference } => {
                let freqs: Vec<f64> = match reference {
                    None => frequencies.to_vec(),
                    Some(map) => {
                        check_keys(labels, map)?;
                        labels.iter().map(|l| map.get(l).copied().unwrap_or(0.0)).collect()
                    }
                };
                for (i, &f) in freqs.iter().enumerate() {
                    if !(0.0..=1.0).contains(&f) {
                        return Err(Error::InvalidFrequency { label: labels[i].clone(), value: f });
                    }
                    if present[i] && f == 0.0 {
                        return Err(Error::ZeroFrequency(labels[i].clone()));
                    }
                }
                let keep: Vec<usize> = (0..labels.len()).filter(|&i| present[i]).collect();
                if keep.is_empty() {
                    return Err(Error::NoPopulatedClass);
                }
                let sub_freqs: Vec<f64> = keep.iter().map(|&i| freqs[i]).collect();
                Ok(expand(labels, &keep, &inverse_normalized(&subset(labels, &keep), &sub_freqs)))
            }
            WeightSpec::Composite(specs) => {
                let mut criteria = Vec::with_capacity(specs.len());
                for spec in specs {
                    let weights = match &spec.source {
                        CriterionSource::Rarity => {
                            WeightSpec::Rarity { reference: None }.resolve(labels, frequencies)?.weights
                        }
                        CriterionSource::Explicit(map) => {
                            check_keys(labels, map)?;
                            labels
                                .iter()
                                .zip(&present)
                                .map(|(l, &p)| match map.get(l) {
                                    Some(&v) => Ok(v),
                                    None if !p => Ok(0.0),
                                    None => Err(Error::MissingWeight(l.clone())),
                                })
                                .collect::<Result<Vec<f64>>>()?
                        }
                    };
                    criteria.push(Criterion { name: spec.name.clone(), weights });
                }
                composite_weights(labels, &criteria)
            }
            WeightSpec::Partial { weights, fill } => {
                check_keys(labels, weights)?;
                let keep: Vec<usize> = (0..labels.len())
                    .filter(|&i| present[i] || weights.contains_key(&labels[i]))
                    .collect();
                let sub = subset(labels, &keep);
                let sub_freqs: Vec<f64> = keep.iter().map(|&i| frequencies[i]).collect();
                let w = partial_fill(&sub, weights, *fill, Some(&sub_freqs))?;
                Ok(expand(labels, &keep, &w))
            }
        }
    }
}

fn subset(labels: &[String], keep: &[usize]) -> Vec<String> {
    keep.iter().map(|&i| labels[i].clone()).collect()
}

fn expand(labels: &[String], keep: &[usize], w: &WeightVector) -> WeightVector {
    let mut weights = vec![0.0; labels.len()];
    for (&i, &v) in keep.iter().zip(w.weights()) {
        weights[i] = v;
    }
    WeightVector { labels: labels.to_vec(), weights }
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct RawWeights {
    labels: Vec<String>,
    weights: Vec<f64>,
}

#[cfg(feature = "serde")]
impl TryFrom<RawWeights> for WeightVector {
    type Error = Error;

    fn try_from(raw: RawWeights) -> Result<Self> {
        let w = WeightVector { labels: raw.labels, weights: raw.weights };
        check_unique(&w.labels)?;
        if w.labels.len() != w.weights.len() {
            return Err(Error::DimensionMismatch { expected: w.labels.len(), found: w.weights.len() });
        }
        match w.validate() {
            Ok(()) => Ok(w),
            Err(_) => Err(Error::WeightSum { sum: w.weights.iter().sum() }),
        }
    }
}

#[cfg(feature = "serde")]
impl From<WeightVector> for RawWeights {
    fn from(w: WeightVector) -> Self {
        RawWeights { labels: w.labels, weights: w.weights }
    }
}
