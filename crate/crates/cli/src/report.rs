//! Report rendering: JSON (full structure), CSV (score matrix) and a
//! markdown summary rounded to 3 decimals.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use wba_core::metrics::{Component, Resolution};
use wba_core::MetricReport;

use crate::io::{self, IoError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

pub fn render(report: &MetricReport, format: Format) -> String {
    match format {
        Format::Json => render_json(report),
        Format::Csv => render_csv(report),
        Format::Markdown => render_markdown(report),
    }
}

pub fn render_json(report: &MetricReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn render_csv(report: &MetricReport) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let header: Vec<&str> = std::iter::once("run").chain(report.metrics.iter().map(|m| m.name())).collect();
    w.write_record(&header).expect("in-memory write");
    for run in &report.runs {
        let rec: Vec<String> =
            std::iter::once(run.name.clone()).chain(run.scores.iter().map(|s| s.to_string())).collect();
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn cell(s: &str) -> String {
    s.replace('|', "\\|")
}

pub fn render_markdown(report: &MetricReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Evaluation report\n");
    let _ = writeln!(out, "Weight scheme: {}\n", report.scheme);
    let _ = write!(out, "| run |");
    for m in &report.metrics {
        let _ = write!(out, " {m} |");
    }
    let _ = write!(out, "\n|---|");
    for _ in &report.metrics {
        let _ = write!(out, "---:|");
    }
    out.push('\n');
    for run in &report.runs {
        let _ = write!(out, "| {} |", cell(&run.name));
        for s in &run.scores {
            let _ = write!(out, " {s:.3} |");
        }
        out.push('\n');
    }

    let _ = writeln!(out, "\n## Rankings\n");
    for r in &report.rankings {
        let order: Vec<String> = r.order.iter().map(|n| cell(n)).collect();
        let _ = write!(out, "- {}: {}", r.metric, order.join(" > "));
        if !r.ties.is_empty() {
            let ties: Vec<String> = r.ties.iter().map(|g| g.join(" = ")).collect();
            let _ = write!(out, " (ties: {})", ties.join("; "));
        }
        out.push('\n');
    }

    if !report.disagreements.is_empty() {
        let _ = writeln!(out, "\n## Disagreements\n");
        for d in &report.disagreements {
            if d.agree {
                let _ = writeln!(out, "- {} vs {}: agree", d.metric_a, d.metric_b);
            } else {
                let pairs: Vec<String> = d.discordant.iter().map(|[a, b]| format!("{} / {}", cell(a), cell(b))).collect();
                let _ = writeln!(out, "- {} vs {}: {}", d.metric_a, d.metric_b, pairs.join(", "));
            }
        }
    }

    let notes: Vec<String> = report
        .runs
        .iter()
        .flat_map(|run| {
            run.notes.iter().flat_map(move |mn| {
                mn.notes.iter().map(move |n| {
                    let component = match n.component {
                        Component::Accuracy => "accuracy",
                        Component::Precision => "precision",
                    };
                    let resolution = match n.resolution {
                        Resolution::ExcludedFromMean => "excluded from the mean",
                        Resolution::IgnoredZeroWeight => "ignored (zero weight)",
                        Resolution::DefinedAsZero => "counted as 0",
                    };
                    format!(
                        "- {} / {}: class `{}` has undefined {component}, {resolution}",
                        cell(&run.name),
                        mn.metric,
                        n.label,
                    )
                })
            })
        })
        .collect();
    if !notes.is_empty() {
        let _ = writeln!(out, "\n## Notes\n");
        for n in notes {
            let _ = writeln!(out, "{n}");
        }
    }
    out
}

pub fn write_report(report: &MetricReport, format: Format, path: &Path) -> Result<(), IoError> {
    io::write_text(path, &render(report, format))
}

/// Reads a report written as JSON.
pub fn read_report(path: &Path) -> Result<MetricReport, IoError> {
    let text = io::read_text(path)?;
    serde_json::from_str(&text).map_err(|e| IoError::Parse {
        location: format!("{}:{}:{}", path.display(), e.line(), e.column()),
        message: format!("invalid report: {e}"),
    })
}
