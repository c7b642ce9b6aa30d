//! Square count matrix over an ordered label set.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Confusion matrix: entry `(i, j)` counts items of true class `i`
/// predicted as class `j`.
///
/// Labels are opaque strings and are unique. The matrix may hold zero items;
/// metric functions reject that case themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawConfusion", into = "RawConfusion"))]
pub struct ConfusionMatrix {
    labels: Vec<String>,
    // row-major, C x C
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    /// Builds a matrix from labels and one row of counts per true class.
    pub fn new(labels: Vec<String>, rows: Vec<Vec<u64>>) -> Result<Self> {
        check_labels(&labels)?;
        let c = labels.len();
        if rows.len() != c {
            return Err(Error::DimensionMismatch { expected: c, found: rows.len() });
        }
        let mut counts = Vec::with_capacity(c * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch { expected: c, found: row.len() });
            }
            counts.extend(row);
        }
        Ok(Self { labels, counts })
    }

    /// All-zero matrix over `labels`.
    pub fn zeros(labels: Vec<String>) -> Result<Self> {
        check_labels(&labels)?;
        let c = labels.len();
        Ok(Self { labels, counts: vec![0; c * c] })
    }

    /// Counts `(true, predicted)` pairs. Labels are the sorted distinct
    /// values seen in either column.
    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let pairs: Vec<(&str, &str)> = pairs.into_iter().collect();
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        for &(t, p) in &pairs {
            index.insert(t, 0);
            index.insert(p, 0);
        }
        if index.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (i, slot) in index.values_mut().enumerate() {
            *slot = i;
        }
        let labels: Vec<String> = index.keys().map(|l| l.to_string()).collect();
        let mut cm = Self::zeros(labels)?;
        for (t, p) in pairs {
            cm.increment(index[t], index[p]);
        }
        Ok(cm)
    }

    /// Counts `(true, predicted)` index pairs over a fixed label set.
    pub fn from_indexed_pairs<I>(labels: Vec<String>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut cm = Self::zeros(labels)?;
        let c = cm.n_classes();
        for (item, (t, p)) in pairs.into_iter().enumerate() {
            for class in [t, p] {
                if class >= c {
                    return Err(Error::ClassOutOfRange { item, class, classes: c });
                }
            }
            cm.increment(t, p);
        }
        Ok(cm)
    }

    fn increment(&mut self, t: usize, p: usize) {
        let c = self.labels.len();
        self.counts[t * c + p] += 1;
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.n_classes() + predicted]
    }

    pub fn row(&self, truth: usize) -> &[u64] {
        let c = self.n_classes();
        &self.counts[truth * c..(truth + 1) * c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.counts.chunks(self.n_classes())
    }

    /// Total number of items N.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// True cardinality n_i of class `i`.
    pub fn support(&self, i: usize) -> u64 {
        self.row(i).iter().sum()
    }

    /// Number of items predicted as class `j`.
    pub fn predicted(&self, j: usize) -> u64 {
        (0..self.n_classes()).map(|i| self.get(i, j)).sum()
    }

    /// Correct predictions p_i for class `i`.
    pub fn correct(&self, i: usize) -> u64 {
        self.get(i, i)
    }

    /// Per-class true cardinalities, in label order.
    pub fn supports(&self) -> Vec<u64> {
        (0..self.n_classes()).map(|i| self.support(i)).collect()
    }

    /// Position of `label`, if present.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Re-indexes onto `labels`, which must contain every label of `self`.
    /// Labels not present in `self` get zero rows and columns.
    pub fn aligned_to(&self, labels: &[String]) -> Result<Self> {
        let mut map = Vec::with_capacity(self.n_classes());
        for l in &self.labels {
            let at = labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::UnknownLabel(l.clone()))?;
            map.push(at);
        }
        let mut out = Self::zeros(labels.to_vec())?;
        let c = out.n_classes();
        for (i, &ti) in map.iter().enumerate() {
            for (j, &tj) in map.iter().enumerate() {
                out.counts[ti * c + tj] = self.get(i, j);
            }
        }
        Ok(out)
    }

    /// Expands back into `(true, predicted)` index pairs, row by row.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let c = self.n_classes();
        (0..c * c).flat_map(move |k| {
            let n = self.counts[k] as usize;
            core::iter::repeat_n((k / c, k % c), n)
        })
    }
}

fn check_labels(labels: &[String]) -> Result<()> {
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

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct RawConfusion {
    labels: Vec<String>,
    counts: Vec<Vec<u64>>,
}

#[cfg(feature = "serde")]
impl TryFrom<RawConfusion> for ConfusionMatrix {
    type Error = Error;

    fn try_from(raw: RawConfusion) -> Result<Self> {
        ConfusionMatrix::new(raw.labels, raw.counts)
    }
}

#[cfg(feature = "serde")]
impl From<ConfusionMatrix> for RawConfusion {
    fn from(cm: ConfusionMatrix) -> Self {
        let counts = cm.rows().map(|r| r.to_vec()).collect();
        RawConfusion { labels: cm.labels, counts }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(ls: &[&str]) -> Vec<String> {
        ls.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn pairs_build_sorted_labels() {
        let cm = ConfusionMatrix::from_pairs([("B", "B"), ("A", "A"), ("A", "B")]).unwrap();
        assert_eq!(cm.labels(), &labels(&["A", "B"])[..]);
        assert_eq!(cm.row(0), &[1, 1]);
        assert_eq!(cm.row(1), &[0, 1]);
        assert_eq!(cm.total(), 3);
        assert_eq!(cm.predicted(1), 2);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert_eq!(
            ConfusionMatrix::new(labels(&["a", "b"]), vec![vec![1, 2]]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        );
        assert_eq!(
            ConfusionMatrix::new(labels(&["a", "a"]), vec![vec![1, 2], vec![0, 0]]),
            Err(Error::DuplicateLabel("a".into()))
        );
        assert_eq!(ConfusionMatrix::new(vec![], vec![]), Err(Error::NoClasses));
    }

    #[test]
    fn alignment_adds_zero_rows() {
        let cm = ConfusionMatrix::new(labels(&["b", "a"]), vec![vec![2, 1], vec![0, 3]]).unwrap();
        let wide = cm.aligned_to(&labels(&["a", "b", "c"])).unwrap();
        assert_eq!(wide.row(0), &[3, 0, 0]);
        assert_eq!(wide.row(1), &[1, 2, 0]);
        assert_eq!(wide.row(2), &[0, 0, 0]);
        assert!(cm.aligned_to(&labels(&["a"])).is_err());
    }

    #[test]
    fn pairs_round_trip() {
        let cm = ConfusionMatrix::new(labels(&["x", "y"]), vec![vec![2, 1], vec![0, 3]]).unwrap();
        let again = ConfusionMatrix::from_indexed_pairs(cm.labels().to_vec(), cm.pairs()).unwrap();
        assert_eq!(cm, again);
    }
}
