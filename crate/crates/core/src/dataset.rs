//! Tabular data model: feature columns, binary labels, CSV ingestion,
//! candidate split enumeration and a synthetic imbalanced-data generator.
//!
//! Rows are addressed by index. Algorithms that work on a node of a chain or
//! tree take the node's rows as an ascending slice of row indices.
//!
//! A missing cell never satisfies a predicate: it is routed to the
//! predicate-false side everywhere (tabulation, training and scoring).

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AcdcError, Result};

/// Default cap on the number of thresholds per numeric column.
pub const DEFAULT_MAX_THRESHOLDS: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureKind::Numeric => f.write_str("numeric"),
            FeatureKind::Categorical => f.write_str("categorical"),
        }
    }
}

/// Name and kind of a feature, as recorded in trained models.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
}

/// Cell storage of a column. Categorical levels are kept sorted, so code
/// order equals lexicographic level order.
#[derive(Clone, Debug, PartialEq)]
pub enum ColumnValues {
    Numeric(Vec<Option<f64>>),
    Categorical {
        levels: Vec<String>,
        codes: Vec<Option<u32>>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureColumn {
    name: String,
    values: ColumnValues,
}

/// Borrowed view of a single cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell<'a> {
    Number(f64),
    Level(&'a str),
    Missing,
}

/// Owned cell value, used for scoring a single feature record.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Number(f64),
    Level(String),
    Missing,
}

impl Value {
    pub fn as_cell(&self) -> Cell<'_> {
        match self {
            Value::Number(v) => Cell::Number(*v),
            Value::Level(s) => Cell::Level(s),
            Value::Missing => Cell::Missing,
        }
    }
}

/// A single row keyed by feature name. Absent features count as missing.
pub type Record = HashMap<String, Value>;

impl FeatureColumn {
    pub fn numeric(name: impl Into<String>, values: Vec<Option<f64>>) -> Result<Self> {
        let name = name.into();
        if let Some(v) = values.iter().flatten().find(|v| !v.is_finite()) {
            return Err(AcdcError::InvalidDataset(format!(
                "column '{name}' holds non-finite value {v}"
            )));
        }
        let values = values
            .into_iter()
            // fold -0.0 into 0.0 so threshold sweeps see one distinct value
            .map(|v| v.map(|x| if x == 0.0 { 0.0 } else { x }))
            .collect();
        Ok(FeatureColumn {
            name,
            values: ColumnValues::Numeric(values),
        })
    }

    pub fn categorical<S: AsRef<str>>(name: impl Into<String>, values: &[Option<S>]) -> Self {
        let levels: Vec<String> = values
            .iter()
            .flatten()
            .map(|s| s.as_ref().to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: HashMap<&str, u32> = levels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i as u32))
            .collect();
        let codes = values
            .iter()
            .map(|v| v.as_ref().map(|s| index[s.as_ref()]))
            .collect();
        FeatureColumn {
            name: name.into(),
            values: ColumnValues::Categorical { levels, codes },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> FeatureKind {
        match self.values {
            ColumnValues::Numeric(_) => FeatureKind::Numeric,
            ColumnValues::Categorical { .. } => FeatureKind::Categorical,
        }
    }

    pub fn values(&self) -> &ColumnValues {
        &self.values
    }

    pub fn len(&self) -> usize {
        match &self.values {
            ColumnValues::Numeric(v) => v.len(),
            ColumnValues::Categorical { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell(&self, row: usize) -> Cell<'_> {
        match &self.values {
            ColumnValues::Numeric(v) => v[row].map_or(Cell::Missing, Cell::Number),
            ColumnValues::Categorical { levels, codes } => {
                codes[row].map_or(Cell::Missing, |c| Cell::Level(&levels[c as usize]))
            }
        }
    }

    fn select(&self, rows: &[usize]) -> FeatureColumn {
        let values = match &self.values {
            ColumnValues::Numeric(v) => ColumnValues::Numeric(rows.iter().map(|&r| v[r]).collect()),
            ColumnValues::Categorical { levels, codes } => ColumnValues::Categorical {
                levels: levels.clone(),
                codes: rows.iter().map(|&r| codes[r]).collect(),
            },
        };
        FeatureColumn {
            name: self.name.clone(),
            values,
        }
    }
}

/// Where the binary labels came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelInfo {
    pub column: String,
    /// Raw value mapped to label 1, when loaded from text.
    pub positive_value: Option<String>,
}

/// Immutable columnar table with an optional binary label vector
/// (0 = majority/negative, 1 = minority/positive).
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    columns: Vec<FeatureColumn>,
    labels: Option<Vec<u8>>,
    label_info: Option<LabelInfo>,
    row_count: usize,
}

impl Dataset {
    pub fn new(columns: Vec<FeatureColumn>, labels: Vec<u8>) -> Result<Self> {
        let row_count = labels.len();
        Self::build(columns, Some(labels), row_count)
    }

    /// Feature table without labels, e.g. for scoring.
    pub fn unlabeled(columns: Vec<FeatureColumn>, row_count: usize) -> Result<Self> {
        Self::build(columns, None, row_count)
    }

    fn build(
        columns: Vec<FeatureColumn>,
        labels: Option<Vec<u8>>,
        row_count: usize,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &columns {
            if c.name.is_empty() {
                return Err(AcdcError::InvalidDataset("empty column name".into()));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(AcdcError::InvalidDataset(format!(
                    "duplicate column name '{}'",
                    c.name
                )));
            }
            if c.len() != row_count {
                return Err(AcdcError::InvalidDataset(format!(
                    "column '{}' has {} values, expected {row_count}",
                    c.name,
                    c.len()
                )));
            }
        }
        if let Some(l) = &labels {
            if let Some(bad) = l.iter().find(|&&y| y > 1) {
                return Err(AcdcError::InvalidDataset(format!(
                    "label value {bad} is not 0/1"
                )));
            }
        }
        Ok(Dataset {
            columns,
            labels,
            label_info: None,
            row_count,
        })
    }

    pub fn with_label_info(mut self, info: LabelInfo) -> Self {
        self.label_info = Some(info);
        self
    }

    pub fn label_info(&self) -> Option<&LabelInfo> {
        self.label_info.as_ref()
    }

    pub fn columns(&self) -> &[FeatureColumn] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&FeatureColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn feature_specs(&self) -> Vec<FeatureSpec> {
        self.columns
            .iter()
            .map(|c| FeatureSpec {
                name: c.name.clone(),
                kind: c.kind(),
            })
            .collect()
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn is_labeled(&self) -> bool {
        self.labels.is_some()
    }

    pub fn labels(&self) -> Result<&[u8]> {
        self.labels.as_deref().ok_or(AcdcError::Unlabeled)
    }

    pub fn positives(&self) -> Result<usize> {
        Ok(self.labels()?.iter().filter(|&&y| y == 1).count())
    }

    pub fn all_rows(&self) -> Vec<usize> {
        (0..self.row_count).collect()
    }

    /// Feature record of one row, keyed by column name.
    pub fn record(&self, row: usize) -> Record {
        self.columns
            .iter()
            .map(|c| {
                let v = match c.cell(row) {
                    Cell::Number(x) => Value::Number(x),
                    Cell::Level(s) => Value::Level(s.to_string()),
                    Cell::Missing => Value::Missing,
                };
                (c.name.clone(), v)
            })
            .collect()
    }

    /// New dataset holding the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| rows.iter().map(|&r| l[r]).collect()),
            label_info: self.label_info.clone(),
            row_count: rows.len(),
        }
    }

    /// Seeded random train/hold-out partition. Row order is preserved
    /// within each part.
    pub fn split_holdout(&self, holdout_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        if !(holdout_fraction > 0.0 && holdout_fraction < 1.0) {
            return Err(AcdcError::InvalidArgument(format!(
                "holdout fraction {holdout_fraction} must lie in (0, 1)"
            )));
        }
        let mut idx = self.all_rows();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        idx.shuffle(&mut rng);
        let n_hold = (self.row_count as f64 * holdout_fraction).round() as usize;
        let (hold, train) = idx.split_at(n_hold);
        let mut hold = hold.to_vec();
        let mut train = train.to_vec();
        hold.sort_unstable();
        train.sort_unstable();
        Ok((self.subset(&train), self.subset(&hold)))
    }
}

// ---------------------------------------------------------------------------
// CSV ingestion

/// Options for [`load_csv_with`].
#[derive(Clone, Debug, Default)]
pub struct CsvOptions {
    /// Label column; `None` loads an unlabeled feature table.
    pub label_column: Option<String>,
    /// Cell text treated as missing (after trimming). Empty cells are
    /// always missing.
    pub missing_token: String,
    /// Raw label value to map to 1. Defaults to the rarer value.
    pub positive_label: Option<String>,
    /// Forced column kinds; other columns are inferred.
    pub kinds: HashMap<String, FeatureKind>,
}

impl CsvOptions {
    pub fn labeled(label_column: impl Into<String>) -> Self {
        CsvOptions {
            label_column: Some(label_column.into()),
            ..Default::default()
        }
    }
}

/// Loads a labeled CSV file with a header row.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    missing_token: &str,
) -> Result<Dataset> {
    let opts = CsvOptions {
        label_column: Some(label_column.to_string()),
        missing_token: missing_token.to_string(),
        ..Default::default()
    };
    load_csv_with(path, &opts)
}

pub fn load_csv_with(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| AcdcError::io(path, e))?;
    read_csv(file, opts)
}

pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(AcdcError::EmptyDataset);
    }
    let label_idx = match &opts.label_column {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| AcdcError::MissingLabelColumn(name.clone()))?,
        ),
        None => None,
    };

    let mut raw: Vec<Vec<Option<String>>> = vec![Vec::new(); header.len()];
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != header.len() {
            let line = rec.position().map_or(0, |p| p.line());
            return Err(AcdcError::MalformedRow {
                line,
                expected: header.len(),
                found: rec.len(),
            });
        }
        for (j, cell) in rec.iter().enumerate() {
            let missing = cell.is_empty() || cell == opts.missing_token;
            raw[j].push((!missing).then(|| cell.to_string()));
        }
    }
    let row_count = raw.first().map_or(0, Vec::len);
    if row_count == 0 {
        return Err(AcdcError::EmptyDataset);
    }

    let mut columns = Vec::with_capacity(header.len());
    let mut label_cells = None;
    for (j, (name, cells)) in header.into_iter().zip(raw).enumerate() {
        if Some(j) == label_idx {
            label_cells = Some(cells);
            continue;
        }
        let forced = opts.kinds.get(&name).copied();
        columns.push(build_column(name, &cells, forced)?);
    }

    match (label_cells, &opts.label_column) {
        (Some(cells), Some(label_name)) => {
            let (labels, positive) = map_labels(&cells, opts.positive_label.as_deref())?;
            Ok(Dataset::new(columns, labels)?.with_label_info(LabelInfo {
                column: label_name.clone(),
                positive_value: Some(positive),
            }))
        }
        _ => Dataset::unlabeled(columns, row_count),
    }
}

fn build_column(
    name: String,
    cells: &[Option<String>],
    forced: Option<FeatureKind>,
) -> Result<FeatureColumn> {
    let parsed: Option<Vec<Option<f64>>> = cells
        .iter()
        .map(|c| match c {
            None => Some(None),
            Some(s) => s.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some),
        })
        .collect();
    match (forced, parsed) {
        (Some(FeatureKind::Categorical), _) | (None, None) => {
            Ok(FeatureColumn::categorical(name, cells))
        }
        (Some(FeatureKind::Numeric) | None, Some(values)) => FeatureColumn::numeric(name, values),
        (Some(FeatureKind::Numeric), None) => Err(AcdcError::KindMismatch {
            feature: name,
            expected: FeatureKind::Numeric.to_string(),
            found: FeatureKind::Categorical.to_string(),
        }),
    }
}

/// Maps raw label text to 0/1. Returns the labels and the raw value that
/// became 1.
fn map_labels(cells: &[Option<String>], positive: Option<&str>) -> Result<(Vec<u8>, String)> {
    let mut counts: Vec<(String, usize)> = Vec::new();
    for c in cells {
        let Some(v) = c else {
            return Err(AcdcError::UnmappableLabel {
                value: String::new(),
                reason: "missing label".into(),
            });
        };
        match counts.iter_mut().find(|(k, _)| k == v) {
            Some((_, n)) => *n += 1,
            None => counts.push((v.clone(), 1)),
        }
    }
    if counts.len() > 2 {
        return Err(AcdcError::LabelCardinality(counts.len()));
    }
    let positive_value = match positive {
        Some(p) => {
            if counts.len() == 2 && !counts.iter().any(|(k, _)| k == p) {
                return Err(AcdcError::UnmappableLabel {
                    value: p.to_string(),
                    reason: "positive label does not occur in the label column".into(),
                });
            }
            p.to_string()
        }
        None if counts.len() == 2 => {
            // rarer value is the positive class; equal counts: greater value
            let (a, b) = (&counts[0], &counts[1]);
            let pick = match a.1.cmp(&b.1) {
                std::cmp::Ordering::Less => a,
                std::cmp::Ordering::Greater => b,
                std::cmp::Ordering::Equal => {
                    if a.0 > b.0 {
                        a
                    } else {
                        b
                    }
                }
            };
            pick.0.clone()
        }
        None => {
            let only = &counts[0].0;
            if matches!(
                only.to_ascii_lowercase().as_str(),
                "1" | "true" | "yes" | "positive"
            ) {
                only.clone()
            } else {
                format!("not {only}")
            }
        }
    };
    let labels = cells
        .iter()
        .map(|c| u8::from(c.as_deref() == Some(positive_value.as_str())))
        .collect();
    Ok((labels, positive_value))
}

// ---------------------------------------------------------------------------
// Predicates and contingency counts

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "relation", rename_all = "snake_case")]
pub enum Relation {
    /// `value <= threshold` on a numeric feature.
    LessEq { threshold: f64 },
    /// `value = level` on a categorical feature.
    Equals { level: String },
}

/// A binary test on one feature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitPredicate {
    pub feature: String,
    #[serde(flatten)]
    pub relation: Relation,
}

impl SplitPredicate {
    pub fn less_eq(feature: impl Into<String>, threshold: f64) -> Self {
        SplitPredicate {
            feature: feature.into(),
            relation: Relation::LessEq { threshold },
        }
    }

    pub fn equals(feature: impl Into<String>, level: impl Into<String>) -> Self {
        SplitPredicate {
            feature: feature.into(),
            relation: Relation::Equals {
                level: level.into(),
            },
        }
    }

    pub fn kind(&self) -> FeatureKind {
        match self.relation {
            Relation::LessEq { .. } => FeatureKind::Numeric,
            Relation::Equals { .. } => FeatureKind::Categorical,
        }
    }

    /// Evaluates a cell; missing cells and kind mismatches are false.
    pub fn eval_cell(&self, cell: Cell<'_>) -> bool {
        match (&self.relation, cell) {
            (Relation::LessEq { threshold }, Cell::Number(v)) => v <= *threshold,
            (Relation::Equals { level }, Cell::Level(s)) => s == level,
            _ => false,
        }
    }

    pub fn eval_record(&self, record: &Record) -> bool {
        record
            .get(&self.feature)
            .is_some_and(|v| self.eval_cell(v.as_cell()))
    }

    /// Resolves the predicate against a dataset's columns.
    pub fn bind(&self, dataset: &Dataset) -> Result<BoundPredicate> {
        let column = dataset
            .column_index(&self.feature)
            .ok_or_else(|| AcdcError::UnknownFeature(self.feature.clone()))?;
        let col = &dataset.columns[column];
        let test = match (&self.relation, col.values()) {
            (Relation::LessEq { threshold }, ColumnValues::Numeric(_)) => {
                BoundTest::LessEq(*threshold)
            }
            (Relation::Equals { level }, ColumnValues::Categorical { levels, .. }) => {
                BoundTest::Code(levels.binary_search(level).ok().map(|i| i as u32))
            }
            _ => {
                return Err(AcdcError::KindMismatch {
                    feature: self.feature.clone(),
                    expected: self.kind().to_string(),
                    found: col.kind().to_string(),
                })
            }
        };
        Ok(BoundPredicate { column, test })
    }
}

impl fmt::Display for SplitPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.relation {
            Relation::LessEq { threshold } => write!(f, "{} <= {}", self.feature, threshold),
            Relation::Equals { level } => write!(f, "{} = {}", self.feature, level),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum BoundTest {
    LessEq(f64),
    Code(Option<u32>),
}

/// A predicate resolved to a column index of a particular dataset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundPredicate {
    column: usize,
    test: BoundTest,
}

impl BoundPredicate {
    pub fn eval(&self, dataset: &Dataset, row: usize) -> bool {
        match (&self.test, dataset.columns[self.column].values()) {
            (BoundTest::LessEq(t), ColumnValues::Numeric(v)) => v[row].is_some_and(|x| x <= *t),
            (BoundTest::Code(Some(code)), ColumnValues::Categorical { codes, .. }) => {
                codes[row] == Some(*code)
            }
            _ => false,
        }
    }
}

/// 2x2 contingency counts of a predicate against the label.
/// `nxy` counts rows with predicate outcome `x` and label `y`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SplitStats {
    pub n11: u64,
    pub n10: u64,
    pub n01: u64,
    pub n00: u64,
}

impl SplitStats {
    pub fn new(n11: u64, n10: u64, n01: u64, n00: u64) -> Self {
        SplitStats { n11, n10, n01, n00 }
    }

    pub fn total(&self) -> u64 {
        self.n11 + self.n10 + self.n01 + self.n00
    }

    pub fn n_true(&self) -> u64 {
        self.n11 + self.n10
    }

    pub fn n_false(&self) -> u64 {
        self.n01 + self.n00
    }

    pub fn positives(&self) -> u64 {
        self.n11 + self.n01
    }

    /// True when one side of the predicate is empty.
    pub fn is_degenerate(&self) -> bool {
        self.n_true() == 0 || self.n_false() == 0
    }

    /// P(X = 1).
    pub fn p_true(&self) -> Option<f64> {
        let n = self.total();
        (n > 0).then(|| self.n_true() as f64 / n as f64)
    }

    /// P(Y = 1 | X = 1).
    pub fn ppv(&self) -> Option<f64> {
        let m = self.n_true();
        (m > 0).then(|| self.n11 as f64 / m as f64)
    }

    /// P(Y = 0 | X = 0).
    pub fn npv(&self) -> Option<f64> {
        let m = self.n_false();
        (m > 0).then(|| self.n00 as f64 / m as f64)
    }

    /// (positives, count) on the given predicate side.
    pub fn side(&self, outcome: bool) -> (u64, u64) {
        if outcome {
            (self.n11, self.n_true())
        } else {
            (self.n01, self.n_false())
        }
    }
}

/// Literal row-by-row tabulation of a predicate over the given rows.
pub fn tabulate(
    dataset: &Dataset,
    rows: &[usize],
    predicate: &SplitPredicate,
) -> Result<SplitStats> {
    if rows.is_empty() {
        return Err(AcdcError::InvalidArgument("row selection is empty".into()));
    }
    let labels = dataset.labels()?;
    let bound = predicate.bind(dataset)?;
    let mut s = SplitStats::default();
    for &r in rows {
        match (bound.eval(dataset, r), labels[r]) {
            (true, 1) => s.n11 += 1,
            (true, _) => s.n10 += 1,
            (false, 1) => s.n01 += 1,
            (false, _) => s.n00 += 1,
        }
    }
    Ok(s)
}

/// Candidate predicates for the given rows, in column order and then
/// ascending threshold / level order.
pub fn candidate_splits(
    dataset: &Dataset,
    rows: &[usize],
    max_thresholds: usize,
) -> Result<Vec<SplitPredicate>> {
    Ok(tabulate_candidates(dataset, rows, max_thresholds)?
        .into_iter()
        .map(|(p, _)| p)
        .collect())
}

/// Enumerates candidate predicates and their contingency counts in one pass
/// per column. Columns are processed in parallel; output order matches
/// [`candidate_splits`].
pub fn tabulate_candidates(
    dataset: &Dataset,
    rows: &[usize],
    max_thresholds: usize,
) -> Result<Vec<(SplitPredicate, SplitStats)>> {
    if rows.is_empty() {
        return Err(AcdcError::InvalidArgument("row selection is empty".into()));
    }
    if max_thresholds == 0 {
        return Err(AcdcError::InvalidArgument(
            "max_thresholds must be positive".into(),
        ));
    }
    let labels = dataset.labels()?;
    let per_column: Vec<Vec<(SplitPredicate, SplitStats)>> = dataset
        .columns
        .par_iter()
        .map(|col| match col.values() {
            ColumnValues::Numeric(v) => {
                numeric_candidates(&col.name, v, labels, rows, max_thresholds)
            }
            ColumnValues::Categorical { levels, codes } => {
                categorical_candidates(&col.name, levels, codes, labels, rows)
            }
        })
        .collect();
    Ok(per_column.into_iter().flatten().collect())
}

fn numeric_candidates(
    name: &str,
    values: &[Option<f64>],
    labels: &[u8],
    rows: &[usize],
    max_thresholds: usize,
) -> Vec<(SplitPredicate, SplitStats)> {
    let mut obs: Vec<(f64, u8)> = Vec::with_capacity(rows.len());
    let (mut miss_pos, mut miss_neg) = (0u64, 0u64);
    for &r in rows {
        match values[r] {
            Some(v) => obs.push((v, labels[r])),
            None if labels[r] == 1 => miss_pos += 1,
            None => miss_neg += 1,
        }
    }
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // distinct values with cumulative (positives, negatives) up to and
    // including each value
    let mut distinct: Vec<(f64, u64, u64)> = Vec::new();
    let (mut cp, mut cn) = (0u64, 0u64);
    for (v, y) in obs {
        if y == 1 {
            cp += 1;
        } else {
            cn += 1;
        }
        match distinct.last_mut() {
            Some(last) if last.0 == v => {
                last.1 = cp;
                last.2 = cn;
            }
            _ => distinct.push((v, cp, cn)),
        }
    }
    let gaps = distinct.len().saturating_sub(1);
    if gaps == 0 {
        return Vec::new();
    }
    let chosen: Vec<usize> = if gaps <= max_thresholds {
        (0..gaps).collect()
    } else {
        let step = gaps as f64 / max_thresholds as f64;
        (0..max_thresholds)
            .map(|j| ((j as f64 + 0.5) * step).floor() as usize)
            .collect()
    };
    let (tot_pos, tot_neg) = (cp + miss_pos, cn + miss_neg);
    chosen
        .into_iter()
        .map(|k| {
            let (lo, p, n) = distinct[k];
            let hi = distinct[k + 1].0;
            let stats = SplitStats {
                n11: p,
                n10: n,
                n01: tot_pos - p,
                n00: tot_neg - n,
            };
            (SplitPredicate::less_eq(name, midpoint(lo, hi)), stats)
        })
        .collect()
}

/// Midpoint that is guaranteed to satisfy `lo <= t < hi`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let t = lo / 2.0 + hi / 2.0;
    if t >= hi || t < lo {
        lo
    } else {
        t
    }
}

fn categorical_candidates(
    name: &str,
    levels: &[String],
    codes: &[Option<u32>],
    labels: &[u8],
    rows: &[usize],
) -> Vec<(SplitPredicate, SplitStats)> {
    let mut counts = vec![(0u64, 0u64); levels.len()];
    let (mut tot_pos, mut tot_neg) = (0u64, 0u64);
    for &r in rows {
        let pos = labels[r] == 1;
        if pos {
            tot_pos += 1;
        } else {
            tot_neg += 1;
        }
        if let Some(c) = codes[r] {
            let e = &mut counts[c as usize];
            if pos {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    let observed: Vec<usize> = (0..levels.len())
        .filter(|&i| counts[i].0 + counts[i].1 > 0)
        .collect();
    if observed.len() < 2 {
        return Vec::new();
    }
    observed
        .into_iter()
        .map(|i| {
            let (p, n) = counts[i];
            let stats = SplitStats {
                n11: p,
                n10: n,
                n01: tot_pos - p,
                n00: tot_neg - n,
            };
            (SplitPredicate::equals(name, levels[i].clone()), stats)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Synthetic data

/// Class-conditional mean shift of informative feature `j`.
pub fn informative_shift(j: usize) -> f64 {
    1.2 / (1.0 + 0.25 * j as f64)
}

/// Generates an imbalanced binary dataset.
///
/// Exactly `round(n_rows * positive_rate)` rows are positive. Informative
/// features `inf_j` are standard normal plus a shift of
/// [`informative_shift`]`(j)` on positive rows; noise features `noise_j`
/// are standard normal regardless of the label.
pub fn generate_synthetic(
    n_rows: usize,
    n_informative: usize,
    n_noise: usize,
    positive_rate: f64,
    seed: u64,
) -> Result<Dataset> {
    if n_rows == 0 {
        return Err(AcdcError::InvalidArgument("n_rows must be positive".into()));
    }
    if !(positive_rate > 0.0 && positive_rate < 1.0) {
        return Err(AcdcError::InvalidArgument(format!(
            "positive_rate {positive_rate} must lie in (0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_pos = (n_rows as f64 * positive_rate).round() as usize;
    let mut labels: Vec<u8> = (0..n_rows).map(|i| u8::from(i < n_pos)).collect();
    labels.shuffle(&mut rng);

    let mut columns = Vec::with_capacity(n_informative + n_noise);
    for j in 0..n_informative {
        let shift = informative_shift(j);
        let values = labels
            .iter()
            .map(|&y| {
                let z: f64 = StandardNormal.sample(&mut rng);
                Some(z + shift * f64::from(y))
            })
            .collect();
        columns.push(FeatureColumn::numeric(format!("inf_{j}"), values)?);
    }
    for j in 0..n_noise {
        let values = (0..n_rows)
            .map(|_| Some(StandardNormal.sample(&mut rng)))
            .collect();
        columns.push(FeatureColumn::numeric(format!("noise_{j}"), values)?);
    }
    Ok(Dataset::new(columns, labels)?.with_label_info(LabelInfo {
        column: "label".into(),
        positive_value: Some("1".into()),
    }))
}

/// Writes a dataset as CSV with the label (if any) as the last column.
pub fn write_csv<W: std::io::Write>(
    dataset: &Dataset,
    writer: W,
    missing_token: &str,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let label_name = dataset
        .label_info()
        .map_or_else(|| "label".to_string(), |l| l.column.clone());
    let mut header: Vec<&str> = dataset.columns.iter().map(|c| c.name.as_str()).collect();
    if dataset.is_labeled() {
        header.push(&label_name);
    }
    w.write_record(&header)?;
    let labels = dataset.labels.as_deref();
    let mut row = Vec::with_capacity(header.len());
    for r in 0..dataset.row_count {
        row.clear();
        for c in &dataset.columns {
            row.push(match c.cell(r) {
                Cell::Number(v) => v.to_string(),
                Cell::Level(s) => s.to_string(),
                Cell::Missing => missing_token.to_string(),
            });
        }
        if let Some(l) = labels {
            row.push(l[r].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| AcdcError::io("<csv writer>", e))?;
    Ok(())
}
