//! `wba` command line: evaluate, compare, weights, profile.
//!
//! Exit codes: 0 on success, 1 when a file cannot be read or written, 2 on
//! usage or validation errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use thiserror::Error;
use wba_core::{
    evaluate_suite, ConfusionMatrix, CriterionSource, CriterionSpec, DatasetProfile, FillPolicy, MetricKind,
    MetricReport, RunResult, WeightSpec, WeightVector,
};

use crate::io::{self, IoError};
use crate::report::{self, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wba", version, about = "Class-weighted evaluation of multi-class classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score a single run.
    Evaluate(EvaluateArgs),
    /// Score, rank and cross-check several runs on the same test set.
    Compare(CompareArgs),
    /// Print a resolved weight vector as JSON.
    Weights(WeightsArgs),
    /// Print class-distribution statistics of a test set as JSON.
    Profile(ProfileArgs),
}

#[derive(Debug, Args)]
pub struct WeightingArgs {
    /// JSON weight configuration file.
    #[arg(long, value_name = "FILE", conflicts_with = "scheme")]
    pub weights: Option<PathBuf>,
    /// Inline scheme: rarity, uniform, user(L=w,...), partial-user(L=w,...)
    /// or partial-rarity(L=w,...). Defaults to rarity.
    #[arg(long, value_name = "SCHEME", value_parser = parse_inline_scheme)]
    pub scheme: Option<InlineScheme>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["predictions", "confusion"])))]
pub struct EvaluateArgs {
    /// CSV with header `true,predicted`.
    #[arg(long, value_name = "FILE")]
    pub predictions: Option<PathBuf>,
    /// Confusion-matrix CSV with header `label,<labels...>`.
    #[arg(long, value_name = "FILE")]
    pub confusion: Option<PathBuf>,
    #[command(flatten)]
    pub weighting: WeightingArgs,
    /// Comma-separated metrics.
    #[arg(long, value_delimiter = ',', default_value = "accuracy,ba,wba,wf1", value_parser = parse_metric)]
    pub metrics: Vec<MetricKind>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// A named run; repeat for each run. PATH is a predictions or
    /// confusion-matrix CSV.
    #[arg(long = "run", value_name = "NAME=PATH", required = true, value_parser = parse_run_arg)]
    pub runs: Vec<(String, PathBuf)>,
    #[command(flatten)]
    pub weighting: WeightingArgs,
    #[arg(long, value_delimiter = ',', default_value = "accuracy,ba,wba,wf1", value_parser = parse_metric)]
    pub metrics: Vec<MetricKind>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").args(["predictions", "confusion", "frequencies", "labels"])))]
pub struct WeightsArgs {
    #[command(flatten)]
    pub weighting: WeightingArgs,
    /// Composite criterion: a JSON label map file, or `rarity`. Repeat for
    /// each criterion.
    #[arg(long = "criteria", value_name = "FILE|rarity", conflicts_with_all = ["weights", "scheme"])]
    pub criteria: Vec<String>,
    /// Take labels and class distribution from a predictions CSV.
    #[arg(long, value_name = "FILE")]
    pub predictions: Option<PathBuf>,
    /// Take labels and class distribution from a confusion-matrix CSV.
    #[arg(long, value_name = "FILE")]
    pub confusion: Option<PathBuf>,
    /// JSON label map of class frequencies.
    #[arg(long, value_name = "FILE")]
    pub frequencies: Option<PathBuf>,
    /// Comma-separated labels (no class distribution).
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long, value_name = "FILE")]
    pub predictions: PathBuf,
}

/// Weight scheme given on the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct InlineScheme {
    pub text: String,
    pub spec: WeightSpec,
}

fn parse_metric(s: &str) -> Result<MetricKind, String> {
    s.parse::<MetricKind>().map_err(|e| {
        let known: Vec<&str> = MetricKind::ALL.iter().map(|k| k.name()).collect();
        format!("{e} (known: {})", known.join(", "))
    })
}

fn parse_run_arg(s: &str) -> Result<(String, PathBuf), String> {
    let (name, path) = s.split_once('=').ok_or_else(|| format!("expected NAME=PATH, got `{s}`"))?;
    let name = name.trim();
    if name.is_empty() || path.is_empty() {
        return Err(format!("expected NAME=PATH, got `{s}`"));
    }
    Ok((name.to_string(), PathBuf::from(path)))
}

fn parse_assignments(body: &str) -> Result<BTreeMap<String, f64>, String> {
    let mut map = BTreeMap::new();
    for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (label, value) = part.rsplit_once('=').ok_or_else(|| format!("expected LABEL=WEIGHT, got `{part}`"))?;
        let label = label.trim();
        let w: f64 = value.trim().parse().map_err(|_| format!("`{}` is not a number", value.trim()))?;
        if !(0.0..=1.0).contains(&w) {
            return Err(format!("weight {w} for `{label}` is outside [0, 1]"));
        }
        if map.insert(label.to_string(), w).is_some() {
            return Err(format!("label `{label}` given twice"));
        }
    }
    Ok(map)
}

pub fn parse_inline_scheme(s: &str) -> Result<InlineScheme, String> {
    let text = s.trim().to_string();
    let (name, body) = match text.split_once('(') {
        Some((name, rest)) => {
            let body = rest.strip_suffix(')').ok_or_else(|| format!("missing `)` in `{text}`"))?;
            (name.trim(), Some(body))
        }
        None => (text.as_str(), None),
    };
    let spec = match (name, body) {
        ("rarity", None) => WeightSpec::Rarity { reference: None },
        ("uniform", None) => WeightSpec::Partial { weights: BTreeMap::new(), fill: FillPolicy::Even },
        ("user", Some(b)) => {
            let map = parse_assignments(b)?;
            let sum: f64 = map.values().sum();
            if (sum - 1.0).abs() > wba_core::weighting::INPUT_TOLERANCE {
                return Err(format!("user weights sum to {sum}, expected 1"));
            }
            WeightSpec::User(map)
        }
        ("partial-user" | "partial", Some(b)) => WeightSpec::Partial { weights: parse_assignments(b)?, fill: FillPolicy::Even },
        ("partial-rarity", Some(b)) => WeightSpec::Partial { weights: parse_assignments(b)?, fill: FillPolicy::Rarity },
        ("composite", _) => return Err("composite weights need --weights FILE or --criteria".into()),
        _ => {
            return Err(format!(
                "unknown scheme `{text}` (expected rarity, uniform, user(..), partial-user(..) or partial-rarity(..))"
            ))
        }
    };
    Ok(InlineScheme { text, spec })
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Core(#[from] wba_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(e) if e.is_io() => EXIT_IO,
            _ => EXIT_INVALID,
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing to `stdout` / `stderr`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
            } else {
                let _ = stdout.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match execute(cli.command) {
        Ok(Output { text, path }) => {
            let written = match path {
                Some(p) => io::write_text(&p, &text).map_err(CliError::from),
                None => stdout.write_all(text.as_bytes()).map_err(|e| {
                    CliError::Io(IoError::Write { path: PathBuf::from("<stdout>"), source: e })
                }),
            };
            match written {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

struct Output {
    text: String,
    path: Option<PathBuf>,
}

fn execute(command: Command) -> Result<Output, CliError> {
    match command {
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Weights(args) => cmd_weights(args),
        Command::Profile(args) => cmd_profile(args),
    }
}

/// The weight spec and how to describe it in report headers.
fn weight_spec(args: &WeightingArgs) -> Result<(WeightSpec, String), CliError> {
    match (&args.weights, &args.scheme) {
        (Some(path), _) => {
            let spec = io::read_weight_config(path)?;
            let text = format!("{} ({})", spec.scheme(), path.display());
            Ok((spec, text))
        }
        (None, Some(inline)) => Ok((inline.spec.clone(), inline.text.clone())),
        (None, None) => Ok((WeightSpec::Rarity { reference: None }, "rarity (default)".into())),
    }
}

fn suite(runs: Vec<RunResult>, weighting: &WeightingArgs, metrics: &[MetricKind]) -> Result<MetricReport, CliError> {
    let (spec, description) = weight_spec(weighting)?;
    let mut report = evaluate_suite(&runs, &spec, metrics)?;
    report.scheme = description;
    Ok(report)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<Output, CliError> {
    let (cm, source) = match (&args.predictions, &args.confusion) {
        (Some(p), None) => (io::read_predictions(p)?.confusion_matrix(), p),
        (None, Some(c)) => (io::read_confusion(c)?, c),
        _ => return Err(CliError::Usage("give exactly one of --predictions or --confusion".into())),
    };
    let mut run = RunResult::new(run_name(source), cm);
    run.source = Some(source.display().to_string());
    let report = suite(vec![run], &args.weighting, &args.metrics)?;
    Ok(Output { text: report::render(&report, args.output.format), path: args.output.output })
}

fn run_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into())
}

fn cmd_compare(args: CompareArgs) -> Result<Output, CliError> {
    if args.runs.len() < 2 {
        return Err(CliError::Usage("compare needs at least two --run NAME=PATH arguments".into()));
    }
    for (i, (name, _)) in args.runs.iter().enumerate() {
        if args.runs[..i].iter().any(|(n, _)| n == name) {
            return Err(CliError::Usage(format!("duplicate run name `{name}`")));
        }
    }
    // validate the weight config before touching run files
    weight_spec(&args.weighting)?;
    let runs = args
        .runs
        .iter()
        .map(|(name, path)| {
            let mut run = RunResult::new(name.clone(), io::read_run(path)?);
            run.source = Some(path.display().to_string());
            Ok(run)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let report = suite(runs, &args.weighting, &args.metrics)?;
    Ok(Output { text: report::render(&report, args.output.format), path: args.output.output })
}

/// Labels plus ground-truth frequencies, when known.
struct Distribution {
    labels: Vec<String>,
    frequencies: Option<Vec<f64>>,
}

fn distribution_from_matrix(cm: &ConfusionMatrix) -> Result<Distribution, CliError> {
    let n = cm.total();
    if n == 0 {
        return Err(wba_core::Error::EmptyMatrix.into());
    }
    let frequencies = cm.supports().iter().map(|&c| c as f64 / n as f64).collect();
    Ok(Distribution { labels: cm.labels().to_vec(), frequencies: Some(frequencies) })
}

fn needs_distribution(spec: &WeightSpec) -> bool {
    match spec {
        WeightSpec::Rarity { reference } => reference.is_none(),
        WeightSpec::Partial { fill, .. } => *fill == FillPolicy::Rarity,
        WeightSpec::Composite(c) => c.iter().any(|c| c.source == CriterionSource::Rarity),
        WeightSpec::User(_) => false,
    }
}

fn spec_labels(spec: &WeightSpec) -> Vec<String> {
    let mut labels: Vec<String> = Vec::new();
    let mut add = |m: &BTreeMap<String, f64>| {
        for k in m.keys() {
            if !labels.contains(k) {
                labels.push(k.clone());
            }
        }
    };
    match spec {
        WeightSpec::User(m) => add(m),
        WeightSpec::Rarity { reference: Some(m) } => add(m),
        WeightSpec::Composite(cs) => {
            for c in cs {
                if let CriterionSource::Explicit(m) = &c.source {
                    add(m);
                }
            }
        }
        _ => {}
    }
    labels.sort();
    labels
}

fn cmd_weights(args: WeightsArgs) -> Result<Output, CliError> {
    let (spec, description) = if args.criteria.is_empty() {
        weight_spec(&args.weighting)?
    } else {
        if args.criteria.len() < 2 {
            return Err(CliError::Usage("composite weights need at least two --criteria".into()));
        }
        let mut criteria = Vec::new();
        for c in &args.criteria {
            if c == "rarity" {
                criteria.push(CriterionSpec { name: "rarity".into(), source: CriterionSource::Rarity });
            } else {
                let path = Path::new(c);
                let map: BTreeMap<String, f64> = io::read_label_map(path)?.into_iter().collect();
                criteria.push(CriterionSpec { name: run_name(path), source: CriterionSource::Explicit(map) });
            }
        }
        let names: Vec<&str> = criteria.iter().map(|c| c.name.as_str()).collect();
        let text = format!("composite({})", names.join(" x "));
        (WeightSpec::Composite(criteria), text)
    };

    let dist = if let Some(p) = &args.predictions {
        distribution_from_matrix(&io::read_predictions(p)?.confusion_matrix())?
    } else if let Some(c) = &args.confusion {
        distribution_from_matrix(&io::read_confusion(c)?)?
    } else if let Some(f) = &args.frequencies {
        let pairs = io::read_label_map(f)?;
        let (labels, freqs): (Vec<String>, Vec<f64>) = pairs.into_iter().unzip();
        let sum: f64 = freqs.iter().sum();
        if (sum - 1.0).abs() > wba_core::weighting::INPUT_TOLERANCE {
            return Err(CliError::Usage(format!("{}: frequencies sum to {sum}, expected 1", f.display())));
        }
        Distribution { labels, frequencies: Some(freqs) }
    } else if let Some(labels) = &args.labels {
        Distribution { labels: labels.iter().map(|l| l.trim().to_string()).collect(), frequencies: None }
    } else {
        Distribution { labels: spec_labels(&spec), frequencies: None }
    };
    if dist.labels.is_empty() {
        return Err(CliError::Usage(
            "no labels: give --labels, --predictions, --confusion or --frequencies".into(),
        ));
    }
    let frequencies = match dist.frequencies {
        Some(f) => f,
        None if needs_distribution(&spec) => {
            return Err(CliError::Usage(format!(
                "scheme `{description}` needs a class distribution: give --predictions, --confusion or --frequencies"
            )))
        }
        // every class treated as present
        None => vec![1.0 / dist.labels.len() as f64; dist.labels.len()],
    };
    let w = spec.resolve(&dist.labels, &frequencies)?;
    Ok(Output { text: render_weights(&description, &w), path: None })
}

pub fn render_weights(scheme: &str, w: &WeightVector) -> String {
    let mut weights = Map::new();
    for (label, value) in w.iter() {
        weights.insert(label.to_string(), json!(value));
    }
    let doc = json!({ "scheme": scheme, "weights": Value::Object(weights) });
    let mut s = serde_json::to_string_pretty(&doc).expect("json value");
    s.push('\n');
    s
}

fn cmd_profile(args: ProfileArgs) -> Result<Output, CliError> {
    let predictions = io::read_predictions(&args.predictions)?;
    let profile = DatasetProfile::from_labels(&predictions.truth())?;
    let mut s = serde_json::to_string_pretty(&profile).expect("profile serializes");
    s.push('\n');
    Ok(Output { text: s, path: None })
}
