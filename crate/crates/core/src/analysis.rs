//! Multi-run, multi-metric comparison.
//!
//! [`evaluate_suite`] scores every run under every requested metric, ranks
//! the runs per metric and lists, for every pair of metrics, the run pairs
//! the two metrics order oppositely.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::confusion::ConfusionMatrix;
use crate::error::{Error, Result};
use crate::metrics::{self, ClassStats, MetricKind, Note};
use crate::weighting::{WeightSpec, WeightVector};

/// One classifier's results on a test set.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub name: String,
    pub matrix: ConfusionMatrix,
    /// Where the run was loaded from, if anywhere.
    pub source: Option<String>,
}

impl RunResult {
    pub fn new(name: impl Into<String>, matrix: ConfusionMatrix) -> Self {
        Self { name: name.into(), matrix, source: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricNotes {
    pub metric: MetricKind,
    pub notes: Vec<Note>,
}

/// Scores and per-class breakdown for one run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunReport {
    pub name: String,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub source: Option<String>,
    /// One score per metric, in the report's metric order.
    pub scores: Vec<f64>,
    /// Weights the weighted metrics were computed with.
    pub weights: WeightVector,
    pub classes: ClassStats,
    /// Degenerate-class notes, only for metrics that produced any.
    pub notes: Vec<MetricNotes>,
}

/// Runs ordered by descending score under one metric.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ranking {
    pub metric: MetricKind,
    pub order: Vec<String>,
    /// Groups of runs with exactly equal scores (listed in `order` order).
    pub ties: Vec<Vec<String>>,
}

/// Run pairs that two metrics rank in opposite order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Disagreement {
    pub metric_a: MetricKind,
    pub metric_b: MetricKind,
    pub discordant: Vec<[String; 2]>,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricReport {
    /// Weight scheme description.
    pub scheme: String,
    pub labels: Vec<String>,
    pub metrics: Vec<MetricKind>,
    pub runs: Vec<RunReport>,
    pub rankings: Vec<Ranking>,
    pub disagreements: Vec<Disagreement>,
}

impl MetricReport {
    pub fn metric_index(&self, metric: MetricKind) -> Result<usize> {
        self.metrics
            .iter()
            .position(|&m| m == metric)
            .ok_or(Error::MetricNotInReport(metric))
    }

    pub fn score(&self, run: &str, metric: MetricKind) -> Option<f64> {
        let m = self.metric_index(metric).ok()?;
        self.runs.iter().find(|r| r.name == run).map(|r| r.scores[m])
    }

    pub fn ranking(&self, metric: MetricKind) -> Option<&Ranking> {
        self.rankings.iter().find(|r| r.metric == metric)
    }

    pub fn run_names(&self) -> impl Iterator<Item = &str> {
        self.runs.iter().map(|r| r.name.as_str())
    }
}

/// Label union across runs, in order of first appearance.
fn union_labels(runs: &[RunResult]) -> Vec<String> {
    let mut labels: Vec<String> = Vec::new();
    for run in runs {
        for l in run.matrix.labels() {
            if !labels.contains(l) {
                labels.push(l.clone());
            }
        }
    }
    labels
}

fn evaluate_run(
    run: &RunResult,
    labels: &[String],
    spec: &WeightSpec,
    metrics: &[MetricKind],
) -> Result<RunReport> {
    let matrix = run.matrix.aligned_to(labels)?;
    let classes = metrics::per_class_accuracy(&matrix)?;
    // weights describe the task: derive them from the ground truth only
    let weights = spec.resolve(labels, &classes.frequencies())?;
    let mut scores = Vec::with_capacity(metrics.len());
    let mut notes = Vec::new();
    for &metric in metrics {
        let v = metrics::compute(metric, &matrix, &weights)?;
        scores.push(v.value);
        if !v.notes.is_empty() {
            notes.push(MetricNotes { metric, notes: v.notes });
        }
    }
    Ok(RunReport { name: run.name.clone(), source: run.source.clone(), scores, weights, classes, notes })
}

/// Scores every run under every metric and attaches rankings and
/// pairwise metric disagreements.
///
/// Runs are aligned onto the union of their label sets; a class a run never
/// mentions gets zero rows and columns there.
pub fn evaluate_suite(runs: &[RunResult], spec: &WeightSpec, metrics: &[MetricKind]) -> Result<MetricReport> {
    if runs.is_empty() {
        return Err(Error::NoRuns);
    }
    for (i, run) in runs.iter().enumerate() {
        if runs[..i].iter().any(|r| r.name == run.name) {
            return Err(Error::DuplicateRun(run.name.clone()));
        }
    }
    let mut metric_list: Vec<MetricKind> = Vec::new();
    for &m in metrics {
        if !metric_list.contains(&m) {
            metric_list.push(m);
        }
    }
    if metric_list.is_empty() {
        return Err(Error::EmptyInput);
    }
    let labels = union_labels(runs);
    let run_reports = runs
        .iter()
        .map(|run| evaluate_run(run, &labels, spec, &metric_list))
        .collect::<Result<Vec<_>>>()?;

    let mut report = MetricReport {
        scheme: String::from(spec.scheme()),
        labels,
        metrics: metric_list,
        runs: run_reports,
        rankings: Vec::new(),
        disagreements: Vec::new(),
    };
    let metrics = report.metrics.clone();
    for &m in &metrics {
        let order = rank_by(&report, m)?;
        let ties = tie_groups(&report, m, &order)?;
        report.rankings.push(Ranking { metric: m, order, ties });
    }
    for (i, &a) in metrics.iter().enumerate() {
        for &b in &metrics[i + 1..] {
            let d = disagreements(&report, a, b)?;
            report.disagreements.push(d);
        }
    }
    Ok(report)
}

fn column(report: &MetricReport, metric: MetricKind) -> Result<Vec<f64>> {
    let m = report.metric_index(metric)?;
    Ok(report.runs.iter().map(|r| r.scores[m]).collect())
}

fn by_score(scores: &[f64], names: &[&str], i: usize, j: usize) -> Ordering {
    scores[j]
        .partial_cmp(&scores[i])
        .unwrap_or(Ordering::Equal)
        .then_with(|| names[i].cmp(names[j]))
}

/// Run names by descending score; equal scores fall back to name order.
pub fn rank_by(report: &MetricReport, metric: MetricKind) -> Result<Vec<String>> {
    let scores = column(report, metric)?;
    let names: Vec<&str> = report.run_names().collect();
    let mut idx: Vec<usize> = (0..names.len()).collect();
    idx.sort_by(|&i, &j| by_score(&scores, &names, i, j));
    Ok(idx.into_iter().map(|i| names[i].into()).collect())
}

fn tie_groups(report: &MetricReport, metric: MetricKind, order: &[String]) -> Result<Vec<Vec<String>>> {
    let m = report.metric_index(metric)?;
    let score_of = |name: &str| report.runs.iter().find(|r| r.name == name).map(|r| r.scores[m]);
    let mut groups: Vec<Vec<String>> = Vec::new();
    let mut current: Vec<String> = Vec::new();
    let mut last: Option<f64> = None;
    for name in order {
        let s = score_of(name);
        if s.is_some() && s == last {
            current.push(name.clone());
        } else {
            if current.len() > 1 {
                groups.push(core::mem::take(&mut current));
            }
            current.clear();
            current.push(name.clone());
        }
        last = s;
    }
    if current.len() > 1 {
        groups.push(current);
    }
    Ok(groups)
}

/// Run pairs strictly ordered one way by `metric_a` and the other way by
/// `metric_b`. Pairs tied under either metric are not discordant.
pub fn disagreements(report: &MetricReport, metric_a: MetricKind, metric_b: MetricKind) -> Result<Disagreement> {
    let a = column(report, metric_a)?;
    let b = column(report, metric_b)?;
    let names: Vec<&str> = report.run_names().collect();
    let mut discordant = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            let oa = a[i].partial_cmp(&a[j]);
            let ob = b[i].partial_cmp(&b[j]);
            match (oa, ob) {
                (Some(x), Some(y)) if x != Ordering::Equal && y != Ordering::Equal && x != y => {
                    discordant.push([names[i].into(), names[j].into()]);
                }
                _ => {}
            }
        }
    }
    Ok(Disagreement { metric_a, metric_b, agree: discordant.is_empty(), discordant })
}
