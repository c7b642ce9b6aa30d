//! Dataset characterization: class frequencies, infrequent classes, skew.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Distinct labels (sorted), their counts and relative frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassFrequencies {
    pub labels: Vec<String>,
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
}

/// Counts each distinct label; `f_i = n_i / N`.
pub fn class_frequencies<S: AsRef<str>>(labels: &[S]) -> Result<ClassFrequencies> {
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for l in labels {
        *counts.entry(l.as_ref()).or_default() += 1;
    }
    let n = labels.len() as f64;
    Ok(ClassFrequencies {
        labels: counts.keys().map(|l| l.to_string()).collect(),
        frequencies: counts.values().map(|&c| c as f64 / n).collect(),
        counts: counts.into_values().collect(),
    })
}

/// Indices of classes with fewer items than the average `N / C`.
pub fn infrequent_classes(counts: &[u64]) -> Vec<usize> {
    let n: u64 = counts.iter().sum();
    let c = counts.len() as u64;
    // n_i < N / C  <=>  n_i · C < N
    (0..counts.len()).filter(|&i| (counts[i] as u128) * (c as u128) < n as u128).collect()
}

/// Sample skewness in the spreadsheet `SKEW` form:
/// `n / ((n-1)(n-2)) · Σ ((x_i - mean) / s)^3`, with `s` the sample
/// standard deviation.
pub fn skew(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 3 {
        return Err(Error::TooFewValues { needed: 3, found: n });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let ss: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
    let s = libm::sqrt(ss / (nf - 1.0));
    // deviations below rounding noise of the values themselves
    let noise = f64::EPSILON * f64::EPSILON * values.iter().map(|x| x * x).sum::<f64>();
    if s.is_nan() || s <= 0.0 || ss <= noise {
        return Err(Error::ZeroVariance);
    }
    let cubes: f64 = values
        .iter()
        .map(|x| {
            let z = (x - mean) / s;
            z * z * z
        })
        .sum();
    Ok(nf / ((nf - 1.0) * (nf - 2.0)) * cubes)
}

/// Summary statistics of a class distribution.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DatasetProfile {
    /// Total items N.
    pub items: u64,
    /// Number of classes C.
    pub classes: usize,
    pub labels: Vec<String>,
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
    /// N / C.
    pub average_class_frequency: f64,
    pub infrequent_count: usize,
    pub infrequent_labels: Vec<String>,
    /// Skew of the per-class counts; `None` when fewer than 3 classes or
    /// all counts are equal.
    pub skew: Option<f64>,
    pub notes: Vec<String>,
}

impl DatasetProfile {
    /// Profiles a class distribution given as labels with counts. Classes
    /// with zero count are kept (they count as infrequent).
    pub fn from_counts(labels: Vec<String>, counts: Vec<u64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::NoClasses);
        }
        if labels.len() != counts.len() {
            return Err(Error::DimensionMismatch { expected: labels.len(), found: counts.len() });
        }
        let items: u64 = counts.iter().sum();
        if items == 0 {
            return Err(Error::EmptyInput);
        }
        let classes = labels.len();
        let infrequent = infrequent_classes(&counts);
        let values: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let mut notes = Vec::new();
        let skew = match skew(&values) {
            Ok(s) => Some(s),
            Err(Error::TooFewValues { .. }) => {
                notes.push("skew unavailable: fewer than 3 classes".to_string());
                None
            }
            Err(Error::ZeroVariance) => {
                notes.push("skew unavailable: all classes have the same count".to_string());
                None
            }
            Err(e) => return Err(e),
        };
        Ok(Self {
            items,
            classes,
            frequencies: counts.iter().map(|&c| c as f64 / items as f64).collect(),
            average_class_frequency: items as f64 / classes as f64,
            infrequent_count: infrequent.len(),
            infrequent_labels: infrequent.iter().map(|&i| labels[i].clone()).collect(),
            labels,
            counts,
            skew,
            notes,
        })
    }

    /// Profiles a list of ground-truth labels.
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let f = class_frequencies(labels)?;
        Self::from_counts(f.labels, f.counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn frequencies() {
        let f = class_frequencies(&["A", "A", "B", "C"]).unwrap();
        assert_eq!(f.labels, vec!["A", "B", "C"]);
        assert_eq!(f.frequencies, vec![0.5, 0.25, 0.25]);
        assert_eq!(class_frequencies(&["x"]).unwrap().frequencies, vec![1.0]);
        assert_eq!(class_frequencies::<&str>(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn infrequent() {
        assert_eq!(infrequent_classes(&[1, 1, 10]), vec![0, 1]);
        assert!(infrequent_classes(&[7, 7, 7]).is_empty());
        // boundary: exactly average counts as frequent
        assert_eq!(infrequent_classes(&[2, 4, 6]), vec![0]);
    }

    #[test]
    fn skew_examples() {
        assert!(skew(&[1.0, 2.0, 3.0]).unwrap().abs() < 1e-12);
        assert!((skew(&[1.0, 1.0, 4.0]).unwrap() - 1.7321).abs() < 1e-4);
        assert!((skew(&[1.0, 1.0, 4.0]).unwrap() - libm::sqrt(3.0)).abs() < 1e-12);
        assert_eq!(skew(&[1.0, 2.0]), Err(Error::TooFewValues { needed: 3, found: 2 }));
        assert_eq!(skew(&[5.0, 5.0, 5.0]), Err(Error::ZeroVariance));
    }

    #[test]
    fn profile_notes_missing_skew() {
        let p = DatasetProfile::from_labels(&["a", "b", "b"]).unwrap();
        assert_eq!(p.skew, None);
        assert_eq!(p.notes.len(), 1);
        assert_eq!(p.infrequent_labels, vec!["a"]);
        let p = DatasetProfile::from_labels(&["a", "b", "c", "c"]).unwrap();
        assert_eq!(p.items, 4);
        assert_eq!(p.classes, 3);
        assert!(p.skew.is_some());
    }
}
