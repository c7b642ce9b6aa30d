//! File formats: prediction CSVs, confusion-matrix CSVs, JSON weight
//! configurations and label maps.
//!
//! Every parser has a pure `parse_*` form that takes the file contents and a
//! display name for error messages, and a `read_*` form that loads a path.
//! Parse errors always name a position: a line number for CSV, a field
//! path for JSON.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use thiserror::Error;
use wba_core::weighting::INPUT_TOLERANCE;
use wba_core::{ConfusionMatrix, CriterionSource, CriterionSpec, FillPolicy, WeightSpec};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{location}: {message}")]
    Parse { location: String, message: String },
    #[error(transparent)]
    Core(#[from] wba_core::Error),
}

impl IoError {
    /// True for failures of the file system rather than of the content.
    pub fn is_io(&self) -> bool {
        matches!(self, IoError::Read { .. } | IoError::Write { .. })
    }

    fn at_line(origin: &str, line: u64, message: impl Into<String>) -> Self {
        IoError::Parse { location: format!("{origin}:{line}"), message: message.into() }
    }

    fn at_field(origin: &str, field: &str, message: impl Into<String>) -> Self {
        IoError::Parse { location: format!("{origin}: {field}"), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, IoError>;

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| IoError::Read { path: path.to_path_buf(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| IoError::Write { path: path.to_path_buf(), source })
}

fn csv_records(text: &str) -> csv::StringRecordsIntoIter<&[u8]> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes())
        .into_records()
}

fn next_record(
    records: &mut csv::StringRecordsIntoIter<&[u8]>,
    origin: &str,
) -> Result<Option<(u64, Vec<String>)>> {
    match records.next() {
        None => Ok(None),
        Some(Err(e)) => {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Err(IoError::at_line(origin, line, format!("malformed CSV: {e}")))
        }
        Some(Ok(rec)) => {
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            Ok(Some((line, rec.iter().map(|f| f.trim().to_string()).collect())))
        }
    }
}

/// Rows of `(true, predicted)` labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predictions {
    pub rows: Vec<(String, String)>,
}

impl Predictions {
    /// Confusion matrix over the sorted distinct labels of both columns.
    pub fn confusion_matrix(&self) -> ConfusionMatrix {
        ConfusionMatrix::from_pairs(self.rows.iter().map(|(t, p)| (t.as_str(), p.as_str())))
            .expect("predictions hold at least one row")
    }

    pub fn truth(&self) -> Vec<&str> {
        self.rows.iter().map(|(t, _)| t.as_str()).collect()
    }
}

/// Parses a `true,predicted` CSV.
pub fn parse_predictions(text: &str, origin: &str) -> Result<Predictions> {
    let mut records = csv_records(text);
    match next_record(&mut records, origin)? {
        None => return Err(IoError::at_line(origin, 1, "empty file, expected header `true,predicted`")),
        Some((line, header)) => {
            if header != ["true", "predicted"] {
                return Err(IoError::at_line(
                    origin,
                    line,
                    format!("expected header `true,predicted`, found `{}`", header.join(",")),
                ));
            }
        }
    }
    let mut rows = Vec::new();
    while let Some((line, fields)) = next_record(&mut records, origin)? {
        if fields.len() != 2 {
            return Err(IoError::at_line(
                origin,
                line,
                format!("row {line}: expected 2 fields, found {}", fields.len()),
            ));
        }
        if fields[0].is_empty() {
            return Err(IoError::at_line(origin, line, format!("row {line}: empty true label")));
        }
        if fields[1].is_empty() {
            return Err(IoError::at_line(origin, line, format!("row {line}: empty predicted label")));
        }
        let mut it = fields.into_iter();
        rows.push((it.next().unwrap(), it.next().unwrap()));
    }
    if rows.is_empty() {
        return Err(IoError::at_line(origin, 2, "no data rows"));
    }
    Ok(Predictions { rows })
}

pub fn read_predictions(path: &Path) -> Result<Predictions> {
    parse_predictions(&read_text(path)?, &path.display().to_string())
}

fn parse_count(field: &str, origin: &str, line: u64, column: usize) -> Result<u64> {
    if field.starts_with('-') && field.len() > 1 {
        return Err(IoError::at_line(origin, line, format!("column {column}: negative count `{field}`")));
    }
    field
        .parse::<u64>()
        .map_err(|_| IoError::at_line(origin, line, format!("column {column}: `{field}` is not a non-negative integer")))
}

/// Parses a confusion-matrix CSV: header `label,<l1>,...,<lC>`, then one
/// row per true class in the same label order.
pub fn parse_confusion(text: &str, origin: &str) -> Result<ConfusionMatrix> {
    let mut records = csv_records(text);
    let (header_line, header) = next_record(&mut records, origin)?
        .ok_or_else(|| IoError::at_line(origin, 1, "empty file, expected header `label,...`"))?;
    if header.first().map(String::as_str) != Some("label") {
        return Err(IoError::at_line(origin, header_line, "header must start with `label`"));
    }
    let labels: Vec<String> = header[1..].to_vec();
    if labels.is_empty() {
        return Err(IoError::at_line(origin, header_line, "header lists no class labels"));
    }
    for (i, l) in labels.iter().enumerate() {
        if l.is_empty() {
            return Err(IoError::at_line(origin, header_line, format!("column {}: empty label", i + 2)));
        }
        if labels[..i].contains(l) {
            return Err(IoError::at_line(origin, header_line, format!("duplicate label `{l}`")));
        }
    }
    let c = labels.len();
    let mut rows = Vec::with_capacity(c);
    let mut last_line = header_line;
    while let Some((line, fields)) = next_record(&mut records, origin)? {
        last_line = line;
        if rows.len() == c {
            return Err(IoError::at_line(origin, line, format!("not square: more than {c} rows")));
        }
        if fields.len() != c + 1 {
            return Err(IoError::at_line(
                origin,
                line,
                format!("not square: expected {} fields, found {}", c + 1, fields.len()),
            ));
        }
        let expected = &labels[rows.len()];
        if &fields[0] != expected {
            return Err(IoError::at_line(
                origin,
                line,
                format!("row label `{}` does not match column label `{expected}`", fields[0]),
            ));
        }
        let row = fields[1..]
            .iter()
            .enumerate()
            .map(|(j, f)| parse_count(f, origin, line, j + 2))
            .collect::<Result<Vec<u64>>>()?;
        rows.push(row);
    }
    if rows.len() != c {
        return Err(IoError::at_line(origin, last_line, format!("not square: {} rows for {c} labels", rows.len())));
    }
    Ok(ConfusionMatrix::new(labels, rows)?)
}

pub fn read_confusion(path: &Path) -> Result<ConfusionMatrix> {
    parse_confusion(&read_text(path)?, &path.display().to_string())
}

/// Renders a confusion matrix in the format [`parse_confusion`] reads.
pub fn format_confusion(cm: &ConfusionMatrix) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let header: Vec<&str> = std::iter::once("label").chain(cm.labels().iter().map(String::as_str)).collect();
    w.write_record(&header).expect("in-memory write");
    for (label, row) in cm.labels().iter().zip(cm.rows()) {
        let rec: Vec<String> = std::iter::once(label.clone()).chain(row.iter().map(u64::to_string)).collect();
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub fn write_confusion(cm: &ConfusionMatrix, path: &Path) -> Result<()> {
    write_text(path, &format_confusion(cm))
}

/// What a run file holds, judged from its header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunFileKind {
    Predictions,
    Confusion,
}

pub fn sniff_run_kind(text: &str) -> Option<RunFileKind> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let first = text.lines().next()?;
    let cell = first.split(',').next()?.trim().trim_matches('"');
    match cell {
        "true" => Some(RunFileKind::Predictions),
        "label" => Some(RunFileKind::Confusion),
        _ => None,
    }
}

/// Loads either a predictions file or a confusion-matrix file.
pub fn read_run(path: &Path) -> Result<ConfusionMatrix> {
    let text = read_text(path)?;
    let origin = path.display().to_string();
    match sniff_run_kind(&text) {
        Some(RunFileKind::Predictions) => Ok(parse_predictions(&text, &origin)?.confusion_matrix()),
        Some(RunFileKind::Confusion) => parse_confusion(&text, &origin),
        None => Err(IoError::at_line(
            &origin,
            1,
            "unrecognized header: expected `true,predicted` or `label,...`",
        )),
    }
}

fn parse_json(text: &str, origin: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| IoError::Parse {
        location: format!("{origin}:{}:{}", e.line(), e.column()),
        message: format!("invalid JSON: {e}"),
    })
}

fn field_path(parent: &str, key: &str) -> String {
    let simple = !key.is_empty() && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if simple {
        format!("{parent}.{key}")
    } else {
        format!("{parent}[{}]", Value::String(key.to_string()))
    }
}

fn number_map(value: &Value, origin: &str, path: &str) -> Result<BTreeMap<String, f64>> {
    let obj = value
        .as_object()
        .ok_or_else(|| IoError::at_field(origin, path, "expected an object of label -> number"))?;
    let mut out = BTreeMap::new();
    for (k, v) in obj {
        let p = field_path(path, k);
        let x = v.as_f64().ok_or_else(|| IoError::at_field(origin, &p, "expected a number"))?;
        if !(0.0..=1.0).contains(&x) {
            return Err(IoError::at_field(origin, &p, format!("{x} is outside [0, 1]")));
        }
        out.insert(k.clone(), x);
    }
    Ok(out)
}

fn check_sum(map: &BTreeMap<String, f64>, origin: &str, path: &str, what: &str) -> Result<()> {
    let sum: f64 = map.values().sum();
    if (sum - 1.0).abs() > INPUT_TOLERANCE {
        return Err(IoError::at_field(origin, path, format!("{what} sum to {sum}, expected 1")));
    }
    Ok(())
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], origin: &str, path: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(IoError::at_field(origin, &field_path(path, k), "unexpected field")),
        None => Ok(()),
    }
}

/// Parses a JSON weight configuration.
///
/// ```json
/// {"scheme": "partial", "weights": {"B": 0.7}, "fill": "even"}
/// ```
///
/// Schemes: `user` (full `weights` map), `rarity` (optional reference
/// `frequencies` map), `partial` (`weights` map plus `fill`: `even` or
/// `rarity`), `composite` (`criteria`: a list of `{name, weights}` or
/// `{name, scheme: "rarity"}` blocks).
pub fn parse_weight_config(text: &str, origin: &str) -> Result<WeightSpec> {
    let root = parse_json(text, origin)?;
    let obj = root.as_object().ok_or_else(|| IoError::at_field(origin, "$", "expected a JSON object"))?;
    let scheme = obj
        .get("scheme")
        .ok_or_else(|| IoError::at_field(origin, "$.scheme", "missing field"))?
        .as_str()
        .ok_or_else(|| IoError::at_field(origin, "$.scheme", "expected a string"))?;
    let weights = |required: bool| -> Result<Option<BTreeMap<String, f64>>> {
        match obj.get("weights") {
            Some(v) => number_map(v, origin, "$.weights").map(Some),
            None if required => Err(IoError::at_field(origin, "$.weights", "missing field")),
            None => Ok(None),
        }
    };
    match scheme {
        "user" => {
            check_keys(obj, &["scheme", "weights"], origin, "$")?;
            let w = weights(true)?.unwrap();
            check_sum(&w, origin, "$.weights", "weights")?;
            Ok(WeightSpec::User(w))
        }
        "rarity" => {
            check_keys(obj, &["scheme", "frequencies"], origin, "$")?;
            let reference = match obj.get("frequencies") {
                Some(v) => {
                    let f = number_map(v, origin, "$.frequencies")?;
                    check_sum(&f, origin, "$.frequencies", "frequencies")?;
                    Some(f)
                }
                None => None,
            };
            Ok(WeightSpec::Rarity { reference })
        }
        "partial" => {
            check_keys(obj, &["scheme", "weights", "fill"], origin, "$")?;
            let w = weights(false)?.unwrap_or_default();
            let sum: f64 = w.values().sum();
            if sum > 1.0 + INPUT_TOLERANCE {
                return Err(IoError::at_field(origin, "$.weights", format!("weights sum to {sum}, more than 1")));
            }
            let fill = match obj.get("fill") {
                None => FillPolicy::Even,
                Some(v) => match v.as_str() {
                    Some("even") => FillPolicy::Even,
                    Some("rarity") => FillPolicy::Rarity,
                    _ => return Err(IoError::at_field(origin, "$.fill", "expected \"even\" or \"rarity\"")),
                },
            };
            Ok(WeightSpec::Partial { weights: w, fill })
        }
        "composite" => {
            check_keys(obj, &["scheme", "criteria"], origin, "$")?;
            let list = obj
                .get("criteria")
                .ok_or_else(|| IoError::at_field(origin, "$.criteria", "missing field"))?
                .as_array()
                .ok_or_else(|| IoError::at_field(origin, "$.criteria", "expected an array"))?;
            if list.len() < 2 {
                return Err(IoError::at_field(
                    origin,
                    "$.criteria",
                    format!("composite weights need at least 2 criteria, got {}", list.len()),
                ));
            }
            let mut criteria = Vec::with_capacity(list.len());
            for (i, item) in list.iter().enumerate() {
                let path = format!("$.criteria[{i}]");
                let c = item.as_object().ok_or_else(|| IoError::at_field(origin, &path, "expected an object"))?;
                check_keys(c, &["name", "weights", "scheme"], origin, &path)?;
                let name = c
                    .get("name")
                    .and_then(Value::as_str)
                    .ok_or_else(|| IoError::at_field(origin, &format!("{path}.name"), "expected a string"))?
                    .to_string();
                let source = match (c.get("weights"), c.get("scheme")) {
                    (Some(w), None) => {
                        let wp = format!("{path}.weights");
                        let m = number_map(w, origin, &wp)?;
                        check_sum(&m, origin, &wp, "criterion weights")?;
                        CriterionSource::Explicit(m)
                    }
                    (None, Some(Value::String(s))) if s == "rarity" => CriterionSource::Rarity,
                    (None, Some(_)) => {
                        return Err(IoError::at_field(origin, &format!("{path}.scheme"), "only \"rarity\" is supported"))
                    }
                    _ => {
                        return Err(IoError::at_field(origin, &path, "give exactly one of `weights` or `scheme`"))
                    }
                };
                criteria.push(CriterionSpec { name, source });
            }
            Ok(WeightSpec::Composite(criteria))
        }
        other => Err(IoError::at_field(
            origin,
            "$.scheme",
            format!("unknown scheme `{other}` (expected user, rarity, composite or partial)"),
        )),
    }
}

pub fn read_weight_config(path: &Path) -> Result<WeightSpec> {
    parse_weight_config(&read_text(path)?, &path.display().to_string())
}

/// Parses a JSON object mapping labels to numbers in `[0, 1]`, keeping file
/// order. An object with a `weights` map (such as `wba weights` output) is
/// accepted too.
pub fn parse_label_map(text: &str, origin: &str) -> Result<Vec<(String, f64)>> {
    let root = parse_json(text, origin)?;
    let (value, path) = match root.get("weights") {
        Some(v) if v.is_object() => (v, "$.weights"),
        _ => (&root, "$"),
    };
    let obj = value
        .as_object()
        .ok_or_else(|| IoError::at_field(origin, path, "expected an object of label -> number"))?;
    if obj.is_empty() {
        return Err(IoError::at_field(origin, path, "no labels"));
    }
    obj.iter()
        .map(|(k, v)| {
            let p = field_path(path, k);
            let x = v.as_f64().ok_or_else(|| IoError::at_field(origin, &p, "expected a number"))?;
            if !(0.0..=1.0).contains(&x) {
                return Err(IoError::at_field(origin, &p, format!("{x} is outside [0, 1]")));
            }
            Ok((k.clone(), x))
        })
        .collect()
}

pub fn read_label_map(path: &Path) -> Result<Vec<(String, f64)>> {
    parse_label_map(&read_text(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predictions_to_matrix() {
        let p = parse_predictions("true,predicted\nA,A\nA,B\nB,B", "t").unwrap();
        let cm = p.confusion_matrix();
        assert_eq!(cm.labels(), ["A", "B"]);
        assert_eq!(cm.row(0), [1, 1]);
        assert_eq!(cm.row(1), [0, 1]);
    }

    #[test]
    fn predictions_accept_crlf_and_trim() {
        let p = parse_predictions("true,predicted\r\n  x , y \r\n", "t").unwrap();
        assert_eq!(p.rows, vec![("x".to_string(), "y".to_string())]);
    }

    #[test]
    fn predictions_errors() {
        let e = parse_predictions("true,predicted\n", "t").unwrap_err();
        assert!(e.to_string().contains("no data rows"), "{e}");
        let e = parse_predictions("true,predicted\nA,\n", "t").unwrap_err();
        assert!(e.to_string().contains("row 2"), "{e}");
        let e = parse_predictions("", "t").unwrap_err();
        assert!(e.to_string().contains("empty file"), "{e}");
        let e = parse_predictions("truth,pred\nA,A\n", "t").unwrap_err();
        assert!(e.to_string().contains("t:1"), "{e}");
        let e = parse_predictions("true,predicted\nA,A\nA,B,C\n", "t").unwrap_err();
        assert!(e.to_string().contains("t:3"), "{e}");
    }

    #[test]
    fn labels_are_not_coerced() {
        let p = parse_predictions("true,predicted\n01,1\n", "t").unwrap();
        assert_eq!(p.confusion_matrix().labels(), ["01", "1"]);
    }

    #[test]
    fn confusion_parse_and_format() {
        let text = "label,A,B\nA,3,0\nB,0,4\n";
        let cm = parse_confusion(text, "t").unwrap();
        assert_eq!(cm.total(), 7);
        assert_eq!(format_confusion(&cm), text);
    }

    #[test]
    fn confusion_errors() {
        let cases = [
            ("label,A,B\nB,1,0\nA,0,1\n", "does not match"),
            ("label,A,B\nA,1,0\n", "not square"),
            ("label,A,B\nA,1,0,2\nB,0,1\n", "not square"),
            ("label,A,B\nA,1,-2\nB,0,1\n", "negative"),
            ("label,A,B\nA,1,0.5\nB,0,1\n", "not a non-negative integer"),
            ("label,A,B\nA,1,1,000\nB,0,1\n", "not square"),
            ("lbl,A\nA,1\n", "header"),
            ("label,A,A\nA,1,0\nA,0,1\n", "duplicate"),
        ];
        for (text, want) in cases {
            let e = parse_confusion(text, "t").unwrap_err().to_string();
            assert!(e.contains(want), "{text:?}: {e}");
            assert!(e.starts_with("t:"), "{e}");
        }
    }

    #[test]
    fn weight_configs() {
        assert_eq!(parse_weight_config(r#"{"scheme":"rarity"}"#, "w").unwrap(), WeightSpec::Rarity { reference: None });
        let spec = parse_weight_config(r#"{"scheme":"partial","weights":{"B":0.7},"fill":"even"}"#, "w").unwrap();
        assert_eq!(
            spec,
            WeightSpec::Partial { weights: [("B".to_string(), 0.7)].into(), fill: FillPolicy::Even }
        );
        let spec = parse_weight_config(
            r#"{"scheme":"composite","criteria":[{"name":"r","scheme":"rarity"},{"name":"u","weights":{"1":0.7,"5":0.3}}]}"#,
            "w",
        )
        .unwrap();
        assert!(matches!(spec, WeightSpec::Composite(ref c) if c.len() == 2));
    }

    #[test]
    fn weight_config_errors_name_the_field() {
        let cases = [
            (r#"{"scheme":"magic"}"#, "$.scheme"),
            (r#"{"weights":{}}"#, "$.scheme"),
            (r#"{"scheme":"user","weights":{"a":0.5,"b":0.6}}"#, "$.weights"),
            (r#"{"scheme":"user","weights":{"a":"x"}}"#, "$.weights.a"),
            (r#"{"scheme":"user","weights":{"a b":1.5}}"#, "$.weights[\"a b\"]"),
            (r#"{"scheme":"partial","weights":{"a":0.5},"fill":"odd"}"#, "$.fill"),
            (r#"{"scheme":"rarity","extra":1}"#, "$.extra"),
            (r#"{"scheme":"composite","criteria":[{"name":"x","scheme":"rarity"}]}"#, "$.criteria"),
            (r#"{"scheme":"composite","criteria":[{"name":"x","scheme":"rarity"},{"name":"y"}]}"#, "$.criteria[1]"),
            ("{\n\"scheme\": }", "w:2"),
        ];
        for (text, want) in cases {
            let e = parse_weight_config(text, "w").unwrap_err().to_string();
            assert!(e.contains(want), "{text}: {e}");
        }
    }

    #[test]
    fn full_user_map_is_checked_against_labels() {
        let spec = parse_weight_config(r#"{"scheme":"user","weights":{"1":0.7,"5":0.3}}"#, "w").unwrap();
        let labels: Vec<String> = (1..=5).map(|i| i.to_string()).collect();
        assert!(spec.resolve(&labels, &[0.2; 5]).is_err());
        let spec = parse_weight_config(
            r#"{"scheme":"user","weights":{"1":0.7,"2":0,"3":0,"4":0,"5":0.3}}"#,
            "w",
        )
        .unwrap();
        assert!(spec.resolve(&labels, &[0.2; 5]).is_ok());
    }

    #[test]
    fn label_maps_keep_order() {
        let m = parse_label_map(r#"{"b":0.5,"a":0.5}"#, "m").unwrap();
        assert_eq!(m[0].0, "b");
        let m = parse_label_map(r#"{"scheme":"rarity","weights":{"x":1.0}}"#, "m").unwrap();
        assert_eq!(m, vec![("x".to_string(), 1.0)]);
    }

    #[test]
    fn sniffing() {
        assert_eq!(sniff_run_kind("true,predicted\n"), Some(RunFileKind::Predictions));
        assert_eq!(sniff_run_kind("label,a\n"), Some(RunFileKind::Confusion));
        assert_eq!(sniff_run_kind("x\n"), None);
    }
}
