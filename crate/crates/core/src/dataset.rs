//! Typed tabular datasets: CSV + schema sidecar loading, imputation and
//! stratified train/test splitting.
//!
//! A schema sidecar has one `name,kind` line per column (`kind` is `numeric`
//! or `categorical`), one `label=<column>,positive=<value>` line, and an
//! optional `missing=<tok>|<tok>` line overriding the default missing-value
//! tokens (`?`). Empty cells are always missing. Lines starting with `#` are
//! ignored.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decimal::Decimal;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV at row {row}, column {column}: {message}")]
    Parse { row: u64, column: usize, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("label column `{column}` has {found} distinct values, expected 2")]
    LabelArity { column: String, found: usize },
    #[error("column `{0}` has no non-missing values")]
    UnusableColumn(String),
    #[error("cannot stratify: class `{class}` has {count} instance(s), need at least 2")]
    Stratification { class: String, count: usize },
    #[error("test fraction {0} must lie strictly between 0 and 1")]
    Fraction(f64),
}

pub type Result<T> = std::result::Result<T, DatasetError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

/// A single cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Num(Decimal),
    Cat(String),
    Missing,
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(d) => write!(f, "{d}"),
            Value::Cat(s) => write!(f, "'{s}'"),
            Value::Missing => write!(f, "?"),
        }
    }
}

/// One row. `values` is aligned with the dataset's column order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub id: usize,
    pub values: Vec<Value>,
}

/// Parsed schema sidecar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaSpec {
    pub columns: Vec<Attribute>,
    pub label: String,
    pub positive: String,
    pub negative: Option<String>,
    pub missing_tokens: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImputationPolicy {
    #[default]
    MedianMode,
    DropRows,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    columns: Vec<Attribute>,
    label: usize,
    positive: String,
    negative: String,
    instances: Vec<Instance>,
}

pub(crate) fn is_predicate_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

fn is_reserved(name: &str) -> bool {
    name == "label"
        || name
            .strip_prefix("ab")
            .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
}

impl SchemaSpec {
    pub fn parse(text: &str) -> Result<SchemaSpec> {
        let mut columns = Vec::new();
        let mut label = None;
        let mut positive = None;
        let mut negative = None;
        let mut missing_tokens = vec!["?".to_string()];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| DatasetError::Schema(format!("line {}: {msg}: `{line}`", lineno + 1));
            if let Some(tokens) = line.strip_prefix("missing=") {
                missing_tokens = tokens.split('|').map(|t| t.trim().to_string()).collect();
                continue;
            }
            if line.contains('=') {
                for part in line.split(',') {
                    let (key, value) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
                    let value = value.trim().to_string();
                    match key.trim() {
                        "label" => label = Some(value),
                        "positive" => positive = Some(value),
                        "negative" => negative = Some(value),
                        other => return Err(bad(&format!("unknown key `{other}`"))),
                    }
                }
                continue;
            }
            let (name, kind) = line.split_once(',').ok_or_else(|| bad("expected `name,kind`"))?;
            let kind = match kind.trim() {
                "numeric" => AttributeKind::Numeric,
                "categorical" => AttributeKind::Categorical,
                other => return Err(bad(&format!("unknown kind `{other}`"))),
            };
            columns.push(Attribute { name: name.trim().to_string(), kind });
        }
        let label = label.ok_or_else(|| DatasetError::Schema("missing `label=` declaration".into()))?;
        let positive =
            positive.ok_or_else(|| DatasetError::Schema("missing `positive=` declaration".into()))?;
        let spec = SchemaSpec { columns, label, positive, negative, missing_tokens };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<SchemaSpec> {
        SchemaSpec::parse(&read_to_string(path.as_ref())?)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for col in &self.columns {
            if !is_predicate_name(&col.name) {
                return Err(DatasetError::Schema(format!(
                    "attribute name `{}` must match [a-z][a-z0-9_]*",
                    col.name
                )));
            }
            if !seen.insert(col.name.as_str()) {
                return Err(DatasetError::Schema(format!("duplicate attribute `{}`", col.name)));
            }
            if col.name != self.label && is_reserved(&col.name) {
                return Err(DatasetError::Schema(format!("attribute name `{}` is reserved", col.name)));
            }
        }
        match self.columns.iter().find(|c| c.name == self.label) {
            None => Err(DatasetError::Schema(format!("label column `{}` not declared", self.label))),
            Some(c) if c.kind != AttributeKind::Categorical => {
                Err(DatasetError::Schema(format!("label column `{}` must be categorical", self.label)))
            }
            Some(_) => Ok(()),
        }
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    let mut text = String::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| DatasetError::Io { path: path.display().to_string(), source })?;
    Ok(text)
}

/// Loads a CSV file against a schema.
pub fn load_csv(path: impl AsRef<Path>, spec: &SchemaSpec) -> Result<Dataset> {
    let text = read_to_string(path.as_ref())?;
    load_csv_str(&text, spec)
}

/// Like [`load_csv`], from in-memory text.
pub fn load_csv_str(text: &str, spec: &SchemaSpec) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let csv_err = |e: csv::Error| {
        let row = e.position().map(|p| p.line()).unwrap_or(0);
        DatasetError::Parse { row, column: 0, message: e.to_string() }
    };
    let header: Vec<String> =
        reader.headers().map_err(csv_err)?.iter().map(|h| h.trim().to_string()).collect();

    let position: HashMap<&str, usize> =
        spec.columns.iter().enumerate().map(|(i, c)| (c.name.as_str(), i)).collect();
    let mut source_of = vec![None; spec.columns.len()];
    for (j, name) in header.iter().enumerate() {
        let &i = position
            .get(name.as_str())
            .ok_or_else(|| DatasetError::Schema(format!("unknown column `{name}` in CSV header")))?;
        source_of[i] = Some(j);
    }
    if let Some(i) = source_of.iter().position(Option::is_none) {
        return Err(DatasetError::Schema(format!(
            "column `{}` declared in schema but absent from CSV header",
            spec.columns[i].name
        )));
    }
    let source_of: Vec<usize> = source_of.into_iter().flatten().collect();

    let mut instances = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        if record.len() != header.len() {
            return Err(DatasetError::Parse {
                row: row as u64 + 2,
                column: record.len().min(header.len()) + 1,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let values = spec
            .columns
            .iter()
            .zip(&source_of)
            .map(|(col, &j)| parse_cell(&record[j], col.kind, &spec.missing_tokens))
            .collect();
        instances.push(Instance { id: row, values });
    }

    let label = position[spec.label.as_str()];
    let observed: BTreeSet<&str> = instances
        .iter()
        .filter_map(|inst| match &inst.values[label] {
            Value::Cat(s) => Some(s.as_str()),
            _ => None,
        })
        .collect();
    if !instances.is_empty() && observed.len() != 2 {
        return Err(DatasetError::LabelArity { column: spec.label.clone(), found: observed.len() });
    }
    if !instances.is_empty() && !observed.contains(spec.positive.as_str()) {
        return Err(DatasetError::Schema(format!(
            "positive class `{}` not among label values {:?}",
            spec.positive, observed
        )));
    }
    let negative = match (&spec.negative, observed.iter().find(|v| **v != spec.positive)) {
        (Some(n), _) => n.clone(),
        (None, Some(n)) => n.to_string(),
        (None, None) => format!("not_{}", spec.positive),
    };
    Ok(Dataset {
        columns: spec.columns.clone(),
        label,
        positive: spec.positive.clone(),
        negative,
        instances,
    })
}

fn parse_cell(raw: &str, kind: AttributeKind, missing: &[String]) -> Value {
    let cell = raw.trim();
    if cell.is_empty() || missing.iter().any(|m| m == cell) {
        return Value::Missing;
    }
    match kind {
        AttributeKind::Numeric => cell.parse().map(Value::Num).unwrap_or(Value::Missing),
        AttributeKind::Categorical => Value::Cat(cell.to_string()),
    }
}

impl Dataset {
    /// Builds a dataset directly. The label column must be categorical and
    /// every instance must have one value per column.
    pub fn new(
        columns: Vec<Attribute>,
        label: &str,
        positive: &str,
        negative: &str,
        instances: Vec<Instance>,
    ) -> Result<Dataset> {
        let label_idx = columns
            .iter()
            .position(|c| c.name == label)
            .ok_or_else(|| DatasetError::Schema(format!("label column `{label}` not declared")))?;
        if let Some(bad) = instances.iter().find(|i| i.values.len() != columns.len()) {
            return Err(DatasetError::Schema(format!(
                "instance {} has {} values, schema has {} columns",
                bad.id,
                bad.values.len(),
                columns.len()
            )));
        }
        Ok(Dataset {
            columns,
            label: label_idx,
            positive: positive.to_string(),
            negative: negative.to_string(),
            instances,
        })
    }

    pub fn columns(&self) -> &[Attribute] {
        &self.columns
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn label_index(&self) -> usize {
        self.label
    }

    pub fn label_name(&self) -> &str {
        &self.columns[self.label].name
    }

    pub fn positive_class(&self) -> &str {
        &self.positive
    }

    pub fn negative_class(&self) -> &str {
        &self.negative
    }

    /// Non-label columns in schema order, with their column indices.
    pub fn features(&self) -> impl Iterator<Item = (usize, &Attribute)> {
        self.columns.iter().enumerate().filter(move |(i, _)| *i != self.label)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn label_of<'a>(&self, inst: &'a Instance) -> Option<&'a str> {
        match &inst.values[self.label] {
            Value::Cat(s) => Some(s.as_str()),
            _ => None,
        }
    }

    pub fn is_positive(&self, inst: &Instance) -> bool {
        self.label_of(inst) == Some(self.positive.as_str())
    }

    pub fn instance(&self, id: usize) -> Option<&Instance> {
        self.instances.iter().find(|i| i.id == id)
    }

    /// Same schema, different rows.
    pub fn with_instances(&self, instances: Vec<Instance>) -> Dataset {
        Dataset { instances, ..self.clone_schema() }
    }

    fn clone_schema(&self) -> Dataset {
        Dataset {
            columns: self.columns.clone(),
            label: self.label,
            positive: self.positive.clone(),
            negative: self.negative.clone(),
            instances: Vec::new(),
        }
    }

    pub fn has_missing(&self) -> bool {
        self.instances.iter().any(|i| i.values.iter().any(Value::is_missing))
    }

    /// Smallest number of fractional digits that writes every numeric value
    /// exactly, but at least `floor`.
    pub fn decimal_digits(&self, floor: u32) -> u32 {
        self.instances
            .iter()
            .flat_map(|i| i.values.iter())
            .filter_map(|v| match v {
                Value::Num(d) => Some(d.significant_scale()),
                _ => None,
            })
            .fold(floor, u32::max)
    }
}

/// Removes missing values.
///
/// Rows with a missing label are always dropped. Median-mode fills numeric
/// gaps with the lower median and categorical gaps with the most frequent
/// value (lexicographically smallest on ties), both computed over `ds`.
pub fn preprocess(ds: &Dataset, policy: ImputationPolicy) -> Result<Dataset> {
    let rows: Vec<Instance> =
        ds.instances.iter().filter(|i| !i.values[ds.label].is_missing()).cloned().collect();
    match policy {
        ImputationPolicy::DropRows => Ok(ds.with_instances(
            rows.into_iter().filter(|i| !i.values.iter().any(Value::is_missing)).collect(),
        )),
        ImputationPolicy::MedianMode => {
            let mut fills = Vec::with_capacity(ds.columns.len());
            for (c, col) in ds.columns.iter().enumerate() {
                if !rows.iter().any(|r| r.values[c].is_missing()) {
                    fills.push(None);
                    continue;
                }
                let fill = match col.kind {
                    AttributeKind::Numeric => {
                        let mut nums: Vec<Decimal> = rows
                            .iter()
                            .filter_map(|r| match r.values[c] {
                                Value::Num(d) => Some(d),
                                _ => None,
                            })
                            .collect();
                        nums.sort();
                        lower_median(&nums).map(Value::Num)
                    }
                    AttributeKind::Categorical => {
                        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
                        for r in &rows {
                            if let Value::Cat(s) = &r.values[c] {
                                *counts.entry(s.as_str()).or_default() += 1;
                            }
                        }
                        mode(&counts).map(|s| Value::Cat(s.to_string()))
                    }
                };
                fills.push(Some(fill.ok_or_else(|| DatasetError::UnusableColumn(col.name.clone()))?));
            }
            let imputed = rows
                .into_iter()
                .map(|mut r| {
                    for (v, fill) in r.values.iter_mut().zip(&fills) {
                        if let (true, Some(f)) = (v.is_missing(), fill) {
                            *v = f.clone();
                        }
                    }
                    r
                })
                .collect();
            Ok(ds.with_instances(imputed))
        }
    }
}

fn lower_median(sorted: &[Decimal]) -> Option<Decimal> {
    if sorted.is_empty() {
        None
    } else {
        Some(sorted[(sorted.len() - 1) / 2])
    }
}

fn mode<'a>(counts: &BTreeMap<&'a str, usize>) -> Option<&'a str> {
    // BTreeMap iterates in ascending key order; keep the first maximum.
    let mut best: Option<(&str, usize)> = None;
    for (&k, &n) in counts {
        if best.is_none_or(|(_, m)| n > m) {
            best = Some((k, n));
        }
    }
    best.map(|(k, _)| k)
}

/// Per-class test-set sizes: `round(n_c × fraction)`, with the difference to
/// `round(n × fraction)` absorbed by the larger class.
pub fn stratified_test_counts(class_sizes: &[usize], test_fraction: f64) -> Vec<usize> {
    let total: usize = class_sizes.iter().sum();
    let target = (total as f64 * test_fraction).round() as i64;
    let mut counts: Vec<i64> =
        class_sizes.iter().map(|&n| (n as f64 * test_fraction).round() as i64).collect();
    let surplus = counts.iter().sum::<i64>() - target;
    if surplus != 0 {
        // Larger class; first one on ties.
        let largest = (0..class_sizes.len()).fold(0, |best, i| {
            if class_sizes[i] > class_sizes[best] {
                i
            } else {
                best
            }
        });
        counts[largest] = (counts[largest] - surplus).clamp(0, class_sizes[largest] as i64);
    }
    counts.into_iter().map(|c| c as usize).collect()
}

/// Splits `ds` into (train, test) preserving class proportions.
/// Both halves keep the original row order.
pub fn stratified_split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DatasetError::Fraction(test_fraction));
    }
    let classes = [ds.positive.as_str(), ds.negative.as_str()];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); 2];
    for (idx, inst) in ds.instances.iter().enumerate() {
        match ds.label_of(inst) {
            Some(l) if l == classes[0] => members[0].push(idx),
            Some(l) if l == classes[1] => members[1].push(idx),
            _ => {
                return Err(DatasetError::Schema(format!(
                    "instance {} has no valid label; preprocess first",
                    inst.id
                )))
            }
        }
    }
    for (class, m) in classes.iter().zip(&members) {
        if m.len() < 2 {
            return Err(DatasetError::Stratification { class: class.to_string(), count: m.len() });
        }
    }
    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let counts = stratified_test_counts(&sizes, test_fraction);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_test = vec![false; ds.instances.len()];
    for (m, &count) in members.iter_mut().zip(&counts) {
        m.shuffle(&mut rng);
        for &idx in m.iter().take(count) {
            in_test[idx] = true;
        }
    }
    let (test, train): (Vec<_>, Vec<_>) =
        ds.instances.iter().cloned().zip(in_test).partition(|(_, t)| *t);
    Ok((
        ds.with_instances(train.into_iter().map(|(i, _)| i).collect()),
        ds.with_instances(test.into_iter().map(|(i, _)| i).collect()),
    ))
}
