//! CSV ingestion: numeric feature columns plus one group column.
//!
//! The feature columns are the columns (other than the group column) whose
//! first data row parses as a number; every later cell in them must parse
//! too. Group labels are mapped to ids in order of first appearance.

use std::collections::HashMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use fairkc::streaming::StreamPoint;
use fairkc::Dataset;

use crate::error::{HarnessError, Result};

/// Column layout of a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    pub feature_names: Vec<String>,
    feature_cols: Vec<usize>,
    group_col: usize,
}

/// A CSV file's contents as a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub dataset: Dataset<f64>,
    pub schema: CsvSchema,
    /// Original label of each group id.
    pub group_labels: Vec<String>,
}

/// One pass of statistics, enough to set up a stream over the file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSummary {
    pub schema: CsvSchema,
    pub n: usize,
    pub group_labels: Vec<String>,
    pub group_sizes: Vec<usize>,
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl CsvSummary {
    /// Min-max scaling of a raw row; constant columns map to 0.
    pub fn normalize(&self, row: &mut [f64]) {
        for (j, x) in row.iter_mut().enumerate() {
            let span = self.maxs[j] - self.mins[j];
            *x = if span > 0.0 { (*x - self.mins[j]) / span } else { 0.0 };
        }
    }
}

fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::Parse(format!("{}: {e}", path.display()))
}

/// Rows of a CSV file as `(features, group label)`, read one at a time.
pub struct CsvRows {
    path: PathBuf,
    records: csv::StringRecordsIntoIter<File>,
    schema: CsvSchema,
    row: usize,
}

impl CsvRows {
    pub fn open(path: impl AsRef<Path>, group_col: &str) -> Result<Self> {
        let path = path.as_ref();
        let mut probe = open(path)?;
        let headers = probe.headers().map_err(|e| csv_error(path, e))?.clone();
        let group = headers
            .iter()
            .position(|h| h == group_col)
            .ok_or_else(|| HarnessError::Parse(format!("{}: no column named {group_col:?}", path.display())))?;
        let first = probe.records().next().transpose().map_err(|e| csv_error(path, e))?;
        let mut feature_cols = Vec::new();
        if let Some(first) = first {
            for (j, cell) in first.iter().enumerate() {
                if j != group && cell.parse::<f64>().is_ok() {
                    feature_cols.push(j);
                }
            }
        }
        let schema = CsvSchema {
            feature_names: feature_cols.iter().map(|&j| headers[j].to_string()).collect(),
            feature_cols,
            group_col: group,
        };
        Ok(Self {
            path: path.to_path_buf(),
            records: open(path)?.into_records(),
            schema,
            row: 0,
        })
    }

    pub fn schema(&self) -> &CsvSchema {
        &self.schema
    }
}

impl Iterator for CsvRows {
    type Item = Result<(Vec<f64>, String)>;

    fn next(&mut self) -> Option<Self::Item> {
        let rec = match self.records.next()? {
            Ok(r) => r,
            Err(e) => return Some(Err(csv_error(&self.path, e))),
        };
        self.row += 1;
        let row = self.row;
        let cell = |j: usize| {
            rec.get(j).ok_or_else(|| HarnessError::Cell {
                path: self.path.clone(),
                row,
                col: j.to_string(),
                message: "missing cell".into(),
            })
        };
        let mut features = Vec::with_capacity(self.schema.feature_cols.len());
        for (&j, name) in self.schema.feature_cols.iter().zip(&self.schema.feature_names) {
            let raw = match cell(j) {
                Ok(c) => c,
                Err(e) => return Some(Err(e)),
            };
            match raw.parse::<f64>() {
                Ok(x) if x.is_finite() => features.push(x),
                _ => {
                    return Some(Err(HarnessError::Cell {
                        path: self.path.clone(),
                        row,
                        col: name.clone(),
                        message: format!("non-numeric value {raw:?}"),
                    }))
                }
            }
        }
        Some(cell(self.schema.group_col).map(|g| (features, g.to_string())))
    }
}

#[derive(Default)]
struct Labels {
    ids: HashMap<String, usize>,
    names: Vec<String>,
}

impl Labels {
    fn id(&mut self, label: String) -> usize {
        let next = self.names.len();
        *self.ids.entry(label).or_insert_with_key(|l| {
            self.names.push(l.clone());
            next
        })
    }
}

/// Reads the whole file into a dataset, optionally min-max normalizing
/// every feature to `[0, 1]`.
pub fn ingest_csv(path: impl AsRef<Path>, group_col: &str, normalize: bool) -> Result<Ingested> {
    let path = path.as_ref();
    let rows = CsvRows::open(path, group_col)?;
    let schema = rows.schema().clone();
    if schema.feature_cols.is_empty() {
        return Err(HarnessError::Parse(format!(
            "{}: no numeric feature columns",
            path.display()
        )));
    }
    let d = schema.feature_cols.len();
    let mut labels = Labels::default();
    let mut coords = Vec::new();
    let mut groups = Vec::new();
    for row in rows {
        let (features, label) = row?;
        coords.extend(features);
        groups.push(labels.id(label));
    }
    if groups.is_empty() {
        return Err(HarnessError::Solver(fairkc::Error::EmptyDataset));
    }
    if normalize {
        for j in 0..d {
            let col = coords.iter().skip(j).step_by(d);
            let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
            let span = hi - lo;
            for x in coords.iter_mut().skip(j).step_by(d) {
                *x = if span > 0.0 { (*x - lo) / span } else { 0.0 };
            }
        }
    }
    let m = labels.names.len();
    Ok(Ingested {
        dataset: Dataset::new(d, coords, groups, m)?,
        schema,
        group_labels: labels.names,
    })
}

/// Counting pass: group sizes and per-feature ranges, nothing stored.
pub fn scan_csv(path: impl AsRef<Path>, group_col: &str) -> Result<CsvSummary> {
    let rows = CsvRows::open(path, group_col)?;
    let schema = rows.schema().clone();
    let d = schema.feature_cols.len();
    let mut labels = Labels::default();
    let mut sizes: Vec<usize> = Vec::new();
    let mut mins = vec![f64::INFINITY; d];
    let mut maxs = vec![f64::NEG_INFINITY; d];
    let mut n = 0;
    for row in rows {
        let (features, label) = row?;
        let g = labels.id(label);
        if g == sizes.len() {
            sizes.push(0);
        }
        sizes[g] += 1;
        for (j, x) in features.into_iter().enumerate() {
            mins[j] = mins[j].min(x);
            maxs[j] = maxs[j].max(x);
        }
        n += 1;
    }
    Ok(CsvSummary {
        schema,
        n,
        group_labels: labels.names,
        group_sizes: sizes,
        mins,
        maxs,
    })
}

/// Streams a CSV file as points, using group ids and ranges from a prior
/// [`scan_csv`] of the same file.
pub fn stream_csv<'a>(
    path: impl AsRef<Path>,
    group_col: &str,
    summary: &'a CsvSummary,
    normalize: bool,
) -> Result<impl Iterator<Item = Result<StreamPoint<f64>>> + 'a> {
    let ids: HashMap<String, usize> = summary
        .group_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), i))
        .collect();
    let rows = CsvRows::open(path, group_col)?;
    Ok(rows.map(move |row| {
        let (mut features, label) = row?;
        if normalize {
            summary.normalize(&mut features);
        }
        let group = *ids
            .get(&label)
            .ok_or_else(|| HarnessError::Parse(format!("group label {label:?} absent from the scan")))?;
        Ok(StreamPoint::new(features, group))
    }))
}
