//! Reading HPO run records from CSV or JSON-lines files.
//!
//! Both formats carry one evaluation per record with the fields
//! `study,learner,dataset,metric,resampling,dataset_size,seed,fold,iteration,val,test`.
//! `val` may hold per-fold scores (semicolon-joined in CSV, an array in
//! JSONL); they are averaged. Any additional column is kept in
//! [`RunKey::extra`]. Scores of maximized metrics are negated so every
//! trajectory is lower-is-better.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::format_f64;
use crate::metrics::ScoreTrajectory;

pub const COLUMNS: [&str; 11] = [
    "study",
    "learner",
    "dataset",
    "metric",
    "resampling",
    "dataset_size",
    "seed",
    "fold",
    "iteration",
    "val",
    "test",
];

/// Names accepted by [`RunKey::field`].
pub const KEY_FIELDS: [&str; 8] = [
    "study",
    "learner",
    "dataset",
    "metric",
    "resampling",
    "dataset_size",
    "seed",
    "fold",
];

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RunKey {
    pub study: String,
    pub learner: String,
    pub dataset: String,
    pub metric_name: String,
    pub resampling: String,
    pub dataset_size: Option<u64>,
    pub seed: Option<u64>,
    pub fold: Option<u64>,
    pub extra: BTreeMap<String, String>,
}

/// The fields that identify a run within one corpus.
type RunIdentity = (
    String,
    String,
    String,
    String,
    String,
    Option<u64>,
    Option<u64>,
);

impl RunKey {
    fn identity(&self) -> RunIdentity {
        (
            self.study.clone(),
            self.learner.clone(),
            self.dataset.clone(),
            self.metric_name.clone(),
            self.resampling.clone(),
            self.seed,
            self.fold,
        )
    }

    /// Looks up a key field by name (`metric` is the metric name); any other
    /// name is looked up in `extra`.
    pub fn field(&self, name: &str) -> Option<String> {
        let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        Some(match name {
            "study" => self.study.clone(),
            "learner" => self.learner.clone(),
            "dataset" => self.dataset.clone(),
            "metric" | "metric_name" => self.metric_name.clone(),
            "resampling" => self.resampling.clone(),
            "dataset_size" => opt(self.dataset_size),
            "seed" => opt(self.seed),
            "fold" => opt(self.fold),
            other => return self.extra.get(other).cloned(),
        })
    }

    /// Copy of the key with one field blanked out.
    pub fn without_field(&self, name: &str) -> Result<RunKey> {
        let mut key = self.clone();
        match name {
            "study" => key.study.clear(),
            "learner" => key.learner.clear(),
            "dataset" => key.dataset.clear(),
            "metric" | "metric_name" => key.metric_name.clear(),
            "resampling" => key.resampling.clear(),
            "dataset_size" => key.dataset_size = None,
            "seed" => key.seed = None,
            "fold" => key.fold = None,
            other => {
                if key.extra.remove(other).is_none() {
                    return Err(Error::arg(format!("unknown run key field '{other}'")));
                }
            }
        }
        Ok(key)
    }
}

impl fmt::Display for RunKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_else(|| "-".into());
        write!(
            f,
            "{}/{}/{}/{}/{}/seed={}/fold={}",
            self.study,
            self.learner,
            self.dataset,
            self.metric_name,
            self.resampling,
            opt(self.seed),
            opt(self.fold)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub name: String,
    pub orientation: Orientation,
    pub scale_note: String,
}

impl MetricSpec {
    pub fn new(name: impl Into<String>, orientation: Orientation) -> Self {
        MetricSpec {
            name: name.into(),
            orientation,
            scale_note: String::new(),
        }
    }

    fn to_internal(&self, x: f64) -> f64 {
        match self.orientation {
            Orientation::Minimize => x,
            Orientation::Maximize => -x,
        }
    }
}

/// Declared orientation of every metric in a corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricTable {
    specs: Vec<MetricSpec>,
}

impl MetricTable {
    pub fn new(specs: Vec<MetricSpec>) -> Self {
        MetricTable { specs }
    }

    pub fn get(&self, name: &str) -> Option<&MetricSpec> {
        self.specs.iter().find(|s| s.name == name)
    }

    pub fn specs(&self) -> &[MetricSpec] {
        &self.specs
    }

    /// Parses lines of `name,minimize|maximize[,note]`. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut specs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.splitn(3, ',');
            let name = parts.next().unwrap_or_default().trim();
            let orientation = match parts.next().map(str::trim) {
                Some("minimize") => Orientation::Minimize,
                Some("maximize") => Orientation::Maximize,
                other => return Err(Error::schema(format!(
                    "metric table line {}: expected 'name,minimize|maximize', got orientation {:?}",
                    lineno + 1,
                    other.unwrap_or("")
                ))),
            };
            if name.is_empty() {
                return Err(Error::schema(format!(
                    "metric table line {}: empty name",
                    lineno + 1
                )));
            }
            if specs.iter().any(|s: &MetricSpec| s.name == name) {
                return Err(Error::schema(format!(
                    "metric table: '{name}' declared twice"
                )));
            }
            specs.push(MetricSpec {
                name: name.to_string(),
                orientation,
                scale_note: parts.next().unwrap_or_default().trim().to_string(),
            });
        }
        Ok(MetricTable { specs })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.specs {
            let o = match s.orientation {
                Orientation::Minimize => "minimize",
                Orientation::Maximize => "maximize",
            };
            out.push_str(&s.name);
            out.push(',');
            out.push_str(o);
            if !s.scale_note.is_empty() {
                out.push(',');
                out.push_str(&s.scale_note);
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// `.jsonl`/`.ndjson` select JSON lines; anything else is CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => Format::Jsonl,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregator {
    #[default]
    Mean,
}

/// Combines per-split validation estimates into one score.
pub fn aggregate_folds(fold_scores: &[f64], aggregator: Aggregator) -> Result<f64> {
    if fold_scores.is_empty() {
        return Err(Error::schema("empty fold list"));
    }
    match aggregator {
        Aggregator::Mean => Ok(fold_scores.iter().sum::<f64>() / fold_scores.len() as f64),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValField {
    Missing,
    Scalar(f64),
    Folds(Vec<f64>),
}

/// One evaluation record as read from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct RawEvaluation {
    pub key: RunKey,
    pub iteration: u64,
    pub val: ValField,
    pub test: Option<f64>,
    /// `file:line` of the record.
    pub source: String,
}

/// One HPO trajectory with the metadata used for stratification.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub key: RunKey,
    pub trajectory: ScoreTrajectory,
    /// `file:line` of the run's first record.
    pub source: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ParseStats {
    pub rows_read: usize,
    pub rows_kept: usize,
    pub rows_dropped: usize,
    pub runs_read: usize,
    pub runs_rejected: usize,
    pub warnings: Vec<String>,
}

impl ParseStats {
    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    fn absorb(&mut self, other: ParseStats) {
        self.rows_read += other.rows_read;
        self.rows_kept += other.rows_kept;
        self.rows_dropped += other.rows_dropped;
        self.runs_read += other.runs_read;
        self.runs_rejected += other.runs_rejected;
        self.warnings.extend(other.warnings);
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    /// Sorted by key; runs sharing a key keep their order of appearance.
    pub runs: Vec<Run>,
    pub stats: ParseStats,
}

impl Corpus {
    pub fn merge(parts: impl IntoIterator<Item = Corpus>) -> Corpus {
        let mut out = Corpus::default();
        for part in parts {
            out.runs.extend(part.runs);
            out.stats.absorb(part.stats);
        }
        out.runs.sort_by(|a, b| a.key.cmp(&b.key));
        out
    }
}

pub fn parse_corpus(path: &Path, format: Format, metrics: &MetricTable) -> Result<Corpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let label = path.display().to_string();
    let rows = match format {
        Format::Csv => read_csv_rows(file, &label)?,
        Format::Jsonl => read_jsonl_rows(BufReader::new(file), &label)?,
    };
    assemble(rows, metrics)
}

/// Parses several files (concurrently with the `parallel` feature) into one
/// corpus. The format of each file follows its extension.
pub fn parse_files(paths: &[PathBuf], metrics: &MetricTable) -> Result<Corpus> {
    let parts = crate::par::map(paths, |p| parse_corpus(p, Format::from_path(p), metrics));
    Ok(Corpus::merge(
        parts.into_iter().collect::<Result<Vec<_>>>()?,
    ))
}

pub fn parse_csv_reader<R: Read>(reader: R, label: &str, metrics: &MetricTable) -> Result<Corpus> {
    assemble(read_csv_rows(reader, label)?, metrics)
}

pub fn parse_jsonl_reader<R: BufRead>(
    reader: R,
    label: &str,
    metrics: &MetricTable,
) -> Result<Corpus> {
    assemble(read_jsonl_rows(reader, label)?, metrics)
}

fn parse_f64(text: &str, what: &str, source: &str) -> Result<f64> {
    text.trim().parse::<f64>().map_err(|_| {
        Error::schema(format!(
            "{source}: cannot parse {what} '{text}' as a number"
        ))
    })
}

fn parse_opt_u64(text: &str, what: &str, source: &str) -> Result<Option<u64>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(None);
    }
    text.parse::<u64>().map(Some).map_err(|_| {
        Error::schema(format!(
            "{source}: cannot parse {what} '{text}' as an integer"
        ))
    })
}

fn parse_val_text(text: &str, source: &str) -> Result<ValField> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(ValField::Missing);
    }
    if text.contains(';') {
        let folds = text
            .split(';')
            .map(|s| parse_f64(s, "fold score", source))
            .collect::<Result<Vec<_>>>()?;
        return Ok(ValField::Folds(folds));
    }
    parse_f64(text, "val", source).map(ValField::Scalar)
}

fn read_csv_rows<R: Read>(reader: R, label: &str) -> Result<Vec<RawEvaluation>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut index = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        index.insert(h.trim().to_string(), i);
    }
    for col in COLUMNS {
        if !index.contains_key(col) {
            return Err(Error::schema(format!(
                "{label}: missing required column '{col}'"
            )));
        }
    }
    let extra_cols: Vec<(String, usize)> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| !COLUMNS.contains(&h.trim()))
        .map(|(i, h)| (h.trim().to_string(), i))
        .collect();

    let mut rows = Vec::new();
    for (n, record) in rdr.records().enumerate() {
        let record = record?;
        // header is line 1
        let source = format!("{label}:{}", n + 2);
        let get = |col: &str| record.get(index[col]).unwrap_or("");
        let key = RunKey {
            study: get("study").to_string(),
            learner: get("learner").to_string(),
            dataset: get("dataset").to_string(),
            metric_name: get("metric").to_string(),
            resampling: get("resampling").to_string(),
            dataset_size: parse_opt_u64(get("dataset_size"), "dataset_size", &source)?,
            seed: parse_opt_u64(get("seed"), "seed", &source)?,
            fold: parse_opt_u64(get("fold"), "fold", &source)?,
            extra: extra_cols
                .iter()
                .filter_map(|(name, i)| {
                    let v = record.get(*i).unwrap_or("");
                    (!v.is_empty()).then(|| (name.clone(), v.to_string()))
                })
                .collect(),
        };
        let iteration = parse_opt_u64(get("iteration"), "iteration", &source)?
            .ok_or_else(|| Error::schema(format!("{source}: missing iteration")))?;
        let val = parse_val_text(get("val"), &source)?;
        let test_text = get("test").trim();
        let test = if test_text.is_empty() {
            None
        } else {
            Some(parse_f64(test_text, "test", &source)?)
        };
        rows.push(RawEvaluation {
            key,
            iteration,
            val,
            test,
            source,
        });
    }
    Ok(rows)
}

fn json_str(v: Option<&serde_json::Value>, what: &str, source: &str) -> Result<String> {
    match v {
        None | Some(serde_json::Value::Null) => Ok(String::new()),
        Some(serde_json::Value::String(s)) => Ok(s.clone()),
        Some(serde_json::Value::Number(n)) => Ok(n.to_string()),
        Some(serde_json::Value::Bool(b)) => Ok(b.to_string()),
        Some(_) => Err(Error::schema(format!(
            "{source}: field '{what}' must be a scalar"
        ))),
    }
}

fn json_f64(v: &serde_json::Value, what: &str, source: &str) -> Result<f64> {
    match v {
        serde_json::Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::schema(format!("{source}: {what} out of range"))),
        serde_json::Value::String(s) => parse_f64(s, what, source),
        _ => Err(Error::schema(format!("{source}: {what} must be a number"))),
    }
}

fn read_jsonl_rows<R: BufRead>(reader: R, label: &str) -> Result<Vec<RawEvaluation>> {
    let mut rows = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(label, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let source = format!("{label}:{}", n + 1);
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| Error::schema(format!("{source}: invalid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::schema(format!("{source}: expected a JSON object")))?;
        for col in [
            "study",
            "learner",
            "dataset",
            "metric",
            "resampling",
            "iteration",
        ] {
            if !obj.contains_key(col) {
                return Err(Error::schema(format!("{source}: missing field '{col}'")));
            }
        }
        let s = |col: &str| json_str(obj.get(col), col, &source);
        let key = RunKey {
            study: s("study")?,
            learner: s("learner")?,
            dataset: s("dataset")?,
            metric_name: s("metric")?,
            resampling: s("resampling")?,
            dataset_size: parse_opt_u64(&s("dataset_size")?, "dataset_size", &source)?,
            seed: parse_opt_u64(&s("seed")?, "seed", &source)?,
            fold: parse_opt_u64(&s("fold")?, "fold", &source)?,
            extra: obj
                .iter()
                .filter(|(k, v)| !COLUMNS.contains(&k.as_str()) && !v.is_null())
                .map(|(k, v)| Ok((k.clone(), json_str(Some(v), k, &source)?)))
                .collect::<Result<_>>()?,
        };
        let iteration = parse_opt_u64(&s("iteration")?, "iteration", &source)?
            .ok_or_else(|| Error::schema(format!("{source}: missing iteration")))?;
        let val = match obj.get("val") {
            None | Some(serde_json::Value::Null) => ValField::Missing,
            Some(serde_json::Value::Array(items)) => ValField::Folds(
                items
                    .iter()
                    .map(|x| json_f64(x, "fold score", &source))
                    .collect::<Result<_>>()?,
            ),
            Some(v) => ValField::Scalar(json_f64(v, "val", &source)?),
        };
        let test = match obj.get("test") {
            None | Some(serde_json::Value::Null) => None,
            Some(v) => Some(json_f64(v, "test", &source)?),
        };
        rows.push(RawEvaluation {
            key,
            iteration,
            val,
            test,
            source,
        });
    }
    Ok(rows)
}

/// Groups records into runs, checks iteration contiguity, drops unusable
/// rows and normalizes orientation.
fn assemble(rows: Vec<RawEvaluation>, metrics: &MetricTable) -> Result<Corpus> {
    let mut stats = ParseStats {
        rows_read: rows.len(),
        ..ParseStats::default()
    };

    for row in &rows {
        if metrics.get(&row.key.metric_name).is_none() {
            return Err(Error::schema(format!(
                "{}: unknown metric '{}' (not in metric table)",
                row.source, row.key.metric_name
            )));
        }
    }

    // A repeated iteration under the same key starts another run with that
    // key; the validation step reports these as duplicates.
    let mut order: Vec<RunIdentity> = Vec::new();
    // iterations seen so far, rows
    type Occurrence = (HashSet<u64>, Vec<RawEvaluation>);
    let mut groups: HashMap<RunIdentity, Vec<Occurrence>> = HashMap::new();
    for row in rows {
        let id = row.key.identity();
        let runs = groups.entry(id.clone()).or_insert_with(|| {
            order.push(id);
            Vec::new()
        });
        match runs.last_mut() {
            Some((seen, members)) if !seen.contains(&row.iteration) => {
                seen.insert(row.iteration);
                members.push(row);
            }
            _ => runs.push((HashSet::from([row.iteration]), vec![row])),
        }
    }

    let mut runs = Vec::new();
    for id in order {
        for (_, mut group) in groups.remove(&id).unwrap_or_default() {
            group.sort_by_key(|r| r.iteration);
            let key = group[0].key.clone();
            for (expect, row) in (1u64..).zip(&group) {
                if row.iteration != expect {
                    return Err(Error::schema(format!(
                        "run {key}: iterations are not contiguous from 1 (expected {expect}, found {} at {})",
                        row.iteration, row.source
                    )));
                }
            }
            stats.runs_read += 1;
            let spec = metrics.get(&key.metric_name).expect("checked above");
            let source = group[0].source.clone();

            let mut val = Vec::with_capacity(group.len());
            let mut test = Vec::with_capacity(group.len());
            let mut rejected = false;
            let mut dropped = 0usize;
            for row in &group {
                let v = match &row.val {
                    ValField::Missing => None,
                    ValField::Scalar(x) => Some(*x),
                    ValField::Folds(f) => Some(aggregate_folds(f, Aggregator::Mean)?),
                };
                match (v, row.test) {
                    (Some(v), Some(t)) if v.is_finite() && t.is_finite() => {
                        val.push(spec.to_internal(v));
                        test.push(spec.to_internal(t));
                    }
                    _ if row.iteration == 1 => {
                        stats.warn(format!(
                            "{}: run {key} rejected, first iteration has a missing or non-finite score",
                            row.source
                        ));
                        rejected = true;
                        break;
                    }
                    _ => {
                        stats.warn(format!(
                            "{}: row dropped from run {key}, missing or non-finite score",
                            row.source
                        ));
                        dropped += 1;
                    }
                }
            }
            if rejected {
                stats.runs_rejected += 1;
                stats.rows_dropped += group.len();
                continue;
            }
            stats.rows_dropped += dropped;
            stats.rows_kept += val.len();
            runs.push(Run {
                key,
                trajectory: ScoreTrajectory::new(val, test)?,
                source,
            });
        }
    }
    runs.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(Corpus { runs, stats })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub n_runs: usize,
    pub n_duplicates: usize,
    pub length_histogram: BTreeMap<usize, usize>,
    pub runs_per_study: BTreeMap<String, usize>,
}

/// Fails on the first duplicated run identity; otherwise summarizes lengths
/// and per-study counts.
pub fn validate_corpus(runs: &[Run]) -> Result<ValidationReport> {
    let mut first_seen: HashMap<RunIdentity, &Run> = HashMap::new();
    let mut length_histogram = BTreeMap::new();
    let mut runs_per_study = BTreeMap::new();
    for run in runs {
        if let Some(prev) = first_seen.insert(run.key.identity(), run) {
            return Err(Error::DuplicateRun {
                key: run.key.to_string(),
                first: prev.source.clone(),
                second: run.source.clone(),
            });
        }
        *length_histogram.entry(run.trajectory.len()).or_insert(0) += 1;
        *runs_per_study.entry(run.key.study.clone()).or_insert(0) += 1;
    }
    Ok(ValidationReport {
        n_runs: runs.len(),
        n_duplicates: 0,
        length_histogram,
        runs_per_study,
    })
}

/// Writes runs in the CSV schema, restoring each metric's declared
/// orientation. Extra key fields become additional columns.
pub fn write_csv<W: Write>(runs: &[Run], metrics: &MetricTable, writer: W) -> Result<()> {
    let extra_names: Vec<String> = {
        let mut names: Vec<String> = runs
            .iter()
            .flat_map(|r| r.key.extra.keys().cloned())
            .collect();
        names.sort();
        names.dedup();
        names
    };
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = COLUMNS.to_vec();
    header.extend(extra_names.iter().map(String::as_str));
    wtr.write_record(&header)?;
    let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
    for run in runs {
        let spec = metrics.get(&run.key.metric_name).ok_or_else(|| {
            Error::schema(format!(
                "unknown metric '{}' (not in metric table)",
                run.key.metric_name
            ))
        })?;
        let traj = &run.trajectory;
        for (i, (&v, &t)) in traj.val().iter().zip(traj.test()).enumerate() {
            let mut record = vec![
                run.key.study.clone(),
                run.key.learner.clone(),
                run.key.dataset.clone(),
                run.key.metric_name.clone(),
                run.key.resampling.clone(),
                opt(run.key.dataset_size),
                opt(run.key.seed),
                opt(run.key.fold),
                (i + 1).to_string(),
                format_f64(spec.to_internal(v)),
                format_f64(spec.to_internal(t)),
            ];
            for name in &extra_names {
                record.push(run.key.extra.get(name).cloned().unwrap_or_default());
            }
            wtr.write_record(&record)?;
        }
    }
    wtr.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Writes runs as JSON lines, one object per evaluation, restoring each
/// metric's declared orientation.
pub fn write_jsonl<W: Write>(runs: &[Run], metrics: &MetricTable, mut writer: W) -> Result<()> {
    use serde_json::{Map, Value};
    for run in runs {
        let spec = metrics.get(&run.key.metric_name).ok_or_else(|| {
            Error::schema(format!(
                "unknown metric '{}' (not in metric table)",
                run.key.metric_name
            ))
        })?;
        let k = &run.key;
        let mut base = Map::new();
        for (name, value) in [
            ("study", &k.study),
            ("learner", &k.learner),
            ("dataset", &k.dataset),
            ("metric", &k.metric_name),
            ("resampling", &k.resampling),
        ] {
            base.insert(name.into(), Value::String(value.clone()));
        }
        for (name, value) in [
            ("dataset_size", k.dataset_size),
            ("seed", k.seed),
            ("fold", k.fold),
        ] {
            base.insert(name.into(), value.map_or(Value::Null, Value::from));
        }
        for (name, value) in &k.extra {
            base.insert(name.clone(), Value::String(value.clone()));
        }
        let traj = &run.trajectory;
        for (i, (&v, &t)) in traj.val().iter().zip(traj.test()).enumerate() {
            let mut obj = base.clone();
            obj.insert("iteration".into(), Value::from(i as u64 + 1));
            obj.insert("val".into(), Value::from(spec.to_internal(v)));
            obj.insert("test".into(), Value::from(spec.to_internal(t)));
            serde_json::to_writer(&mut writer, &obj)?;
            writeln!(writer).map_err(|e| Error::io("<jsonl output>", e))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "study,learner,dataset,metric,resampling,dataset_size,seed,fold,iteration,val,test\n";

    fn table() -> MetricTable {
        MetricTable::parse("accuracy,maximize\nlogloss,minimize\n").unwrap()
    }

    fn parse(body: &str) -> Result<Corpus> {
        parse_csv_reader(format!("{HEADER}{body}").as_bytes(), "fixture", &table())
    }

    #[test]
    fn maximized_metric_is_negated() {
        let c =
            parse("s,l,d,accuracy,holdout,,1,,1,0.7,0.65\ns,l,d,accuracy,holdout,,1,,2,0.8,0.75\n")
                .unwrap();
        assert_eq!(c.runs.len(), 1);
        assert_eq!(c.runs[0].trajectory.val(), &[-0.7, -0.8]);
        assert_eq!(c.runs[0].trajectory.test(), &[-0.65, -0.75]);
    }

    #[test]
    fn folds_are_averaged() {
        let c = parse("s,l,d,logloss,cv3,,,,1,0.2;0.3;0.4,0.5\n").unwrap();
        let v = c.runs[0].trajectory.val()[0];
        assert!((v - 0.3).abs() < 1e-15);
        assert_eq!(
            aggregate_folds(&[0.2, 0.3, 0.4], Aggregator::Mean).unwrap(),
            v
        );
    }

    #[test]
    fn aggregate_folds_edge_cases() {
        assert_eq!(aggregate_folds(&[0.7], Aggregator::Mean).unwrap(), 0.7);
        assert!(aggregate_folds(&[], Aggregator::Mean).is_err());
    }

    #[test]
    fn rows_are_sorted_by_iteration() {
        let c = parse("s,l,d,logloss,h,,,,2,0.2,0.25\ns,l,d,logloss,h,,,,1,0.3,0.35\n").unwrap();
        assert_eq!(c.runs[0].trajectory.val(), &[0.3, 0.2]);
    }

    #[test]
    fn nan_mid_run_drops_row() {
        let body = "\
a,l,d,logloss,h,,1,,1,0.3,0.3
a,l,d,logloss,h,,1,,2,NaN,0.2
a,l,d,logloss,h,,1,,3,0.1,0.1
b,l,d,logloss,h,,1,,1,0.3,0.3
b,l,d,logloss,h,,1,,2,0.2,0.2
c,l,d,logloss,h,,1,,1,0.3,0.3
";
        let c = parse(body).unwrap();
        assert_eq!(c.runs.len(), 3);
        assert_eq!(c.stats.rows_dropped, 1);
        assert_eq!(c.stats.warnings.len(), 1);
        assert_eq!(c.stats.rows_kept + c.stats.rows_dropped, c.stats.rows_read);
        assert_eq!(c.runs[0].trajectory.len(), 2);
    }

    #[test]
    fn non_finite_first_iteration_rejects_run() {
        let body = "a,l,d,logloss,h,,,,1,inf,0.3\na,l,d,logloss,h,,,,2,0.2,0.2\nb,l,d,logloss,h,,,,1,0.3,0.3\n";
        let c = parse(body).unwrap();
        assert_eq!(c.runs.len(), 1);
        assert_eq!(c.stats.runs_rejected, 1);
        assert_eq!(c.stats.rows_dropped, 2);
        assert_eq!(c.stats.rows_kept + c.stats.rows_dropped, c.stats.rows_read);
    }

    #[test]
    fn missing_test_drops_row() {
        let c = parse("a,l,d,logloss,h,,,,1,0.3,0.3\na,l,d,logloss,h,,,,2,0.2,\n").unwrap();
        assert_eq!(c.runs[0].trajectory.len(), 1);
        assert_eq!(c.stats.rows_dropped, 1);
    }

    #[test]
    fn unknown_metric_names_the_row() {
        let err = parse("a,l,d,rmse,h,,,,1,0.3,0.3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("fixture:2") && msg.contains("rmse"), "{msg}");
    }

    #[test]
    fn gap_in_iterations_is_an_error() {
        let err =
            parse("a,l,d,logloss,h,,7,,1,0.3,0.3\na,l,d,logloss,h,,7,,3,0.2,0.2\n").unwrap_err();
        assert!(err.to_string().contains("seed=7"), "{err}");
    }

    #[test]
    fn duplicate_runs_fail_validation() {
        let body = "a,l,d,logloss,h,,3,,1,0.3,0.3\na,l,d,logloss,h,,3,,1,0.2,0.2\n";
        let c = parse(body).unwrap();
        assert_eq!(c.runs.len(), 2);
        match validate_corpus(&c.runs) {
            Err(Error::DuplicateRun { key, first, second }) => {
                assert!(key.contains("a/l/d") && key.contains("seed=3"));
                assert_eq!(first, "fixture:2");
                assert_eq!(second, "fixture:3");
            }
            other => panic!("expected duplicate error, got {other:?}"),
        }
    }

    #[test]
    fn length_histogram() {
        let mut body = String::new();
        for (study, len) in [("x", 29), ("y", 30), ("z", 500)] {
            for i in 1..=len {
                body.push_str(&format!("{study},l,d,logloss,h,,,,{i},0.5,0.5\n"));
            }
        }
        let report = validate_corpus(&parse(&body).unwrap().runs).unwrap();
        assert_eq!(report.n_runs, 3);
        assert_eq!(
            report.length_histogram,
            BTreeMap::from([(29, 1), (30, 1), (500, 1)])
        );
    }

    #[test]
    fn clean_fixture_of_ten() {
        let body: String = (0..10)
            .map(|s| format!("a,l,d,logloss,h,,{s},,1,0.5,0.5\n"))
            .collect();
        let report = validate_corpus(&parse(&body).unwrap().runs).unwrap();
        assert_eq!(report.n_runs, 10);
        assert_eq!(report.n_duplicates, 0);
        assert_eq!(report.runs_per_study["a"], 10);
    }

    #[test]
    fn jsonl_matches_csv() {
        let jsonl = r#"{"study":"s","learner":"l","dataset":"d","metric":"accuracy","resampling":"cv","seed":1,"iteration":1,"val":[0.6,0.8],"test":0.65,"note":"x"}
{"study":"s","learner":"l","dataset":"d","metric":"accuracy","resampling":"cv","seed":1,"iteration":2,"val":0.8,"test":0.75}
"#;
        let j = parse_jsonl_reader(jsonl.as_bytes(), "j", &table()).unwrap();
        let c = parse("s,l,d,accuracy,cv,,1,,1,0.6;0.8,0.65\ns,l,d,accuracy,cv,,1,,2,0.8,0.75\n")
            .unwrap();
        assert_eq!(j.runs[0].trajectory, c.runs[0].trajectory);
        assert_eq!(
            j.runs[0].key.extra.get("note").map(String::as_str),
            Some("x")
        );

        let mut buf = Vec::new();
        write_jsonl(&c.runs, &table(), &mut buf).unwrap();
        let back = parse_jsonl_reader(buf.as_slice(), "back", &table()).unwrap();
        assert_eq!(back.runs[0].trajectory, c.runs[0].trajectory);
        assert_eq!(back.runs[0].key, c.runs[0].key);
    }

    #[test]
    fn missing_column_is_schema_error() {
        let err = parse_csv_reader("study,val\n".as_bytes(), "f", &table()).unwrap_err();
        assert!(err.to_string().contains("missing required column"));
    }

    #[test]
    fn metric_table_parsing() {
        let t = MetricTable::parse("# comment\n\nauc, maximize, 0 to 1\nmse,minimize\n").unwrap();
        assert_eq!(t.get("auc").unwrap().orientation, Orientation::Maximize);
        assert_eq!(t.get("auc").unwrap().scale_note, "0 to 1");
        assert!(MetricTable::parse("auc,up\n").is_err());
        assert!(MetricTable::parse("auc,maximize\nauc,minimize\n").is_err());
        assert_eq!(MetricTable::parse(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn key_field_lookup() {
        let mut key = RunKey {
            study: "s".into(),
            seed: Some(4),
            ..RunKey::default()
        };
        key.extra.insert("sigma".into(), "0.1".into());
        assert_eq!(key.field("seed").as_deref(), Some("4"));
        assert_eq!(key.field("sigma").as_deref(), Some("0.1"));
        assert_eq!(key.field("nope"), None);
        assert_eq!(key.without_field("seed").unwrap().seed, None);
        assert!(key.without_field("nope").is_err());
    }
}
