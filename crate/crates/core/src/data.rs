//! CSV ingestion, standardization and train/test split rules.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Scales below this are treated as a constant column.
const MIN_SCALE: f64 = 1e-12;

/// Which CSV column holds the label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Last,
    Index(usize),
    Name(String),
}

impl FromStr for LabelColumn {
    type Err = Error;

    /// Numbers are column indices; anything else is a header name.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) if s == "last" => LabelColumn::Last,
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Last => f.write_str("last"),
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Name(n) => f.write_str(n),
        }
    }
}

/// A loaded table: the dataset plus feature column names (header names, or
/// `x0, x1, …` when the file has no header).
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub dataset: Dataset,
    pub feature_names: Vec<String>,
    pub label_name: String,
}

/// Loads a numeric CSV file, moving the label column out of the features.
pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn, header: bool) -> Result<Dataset> {
    load_csv_table(path, label, header).map(|t| t.dataset)
}

pub fn load_csv_table(path: impl AsRef<Path>, label: &LabelColumn, header: bool) -> Result<CsvTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let (names, rows) = read_rows(file, path, header)?;
    let width = names.len();

    let label_idx = match label {
        LabelColumn::Last => width.checked_sub(1),
        LabelColumn::Index(i) => (*i < width).then_some(*i),
        LabelColumn::Name(n) => names.iter().position(|h| h == n),
    }
    .ok_or_else(|| Error::MissingLabelColumn(label.to_string()))?;
    if width < 2 {
        return Err(Error::dims("CSV columns (features + label)", 2, width));
    }

    let features = DMatrix::from_fn(rows.len(), width - 1, |i, j| {
        rows[i][if j < label_idx { j } else { j + 1 }]
    });
    let labels = DVector::from_iterator(rows.len(), rows.iter().map(|r| r[label_idx]));
    let mut feature_names = names;
    let label_name = feature_names.remove(label_idx);
    Ok(CsvTable {
        dataset: Dataset::new(features, labels)?,
        feature_names,
        label_name,
    })
}

/// Reads a numeric CSV without a label split. Rows are 1-based in errors,
/// counting the header line.
pub fn read_matrix(path: impl AsRef<Path>, header: bool) -> Result<(Vec<String>, DMatrix<f64>)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let (names, rows) = read_rows(file, path, header)?;
    let m = DMatrix::from_fn(rows.len(), names.len(), |i, j| rows[i][j]);
    Ok((names, m))
}

fn read_rows(reader: impl std::io::Read, path: &Path, header: bool) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut names: Option<Vec<String>> = if header {
        let h = rdr.headers().map_err(|e| csv_error(path, e))?;
        Some(h.iter().map(str::to_string).collect())
    } else {
        None
    };
    let first_data_row = if header { 2 } else { 1 };

    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let row_no = first_data_row + i;
        let width = names
            .get_or_insert_with(|| (0..record.len()).map(|j| format!("x{j}")).collect())
            .len();
        if record.len() != width {
            return Err(Error::Parse {
                row: row_no,
                column: record.len().min(width) + 1,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        row: row_no,
                        column: j + 1,
                        message: format!("non-numeric cell {cell:?}"),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    Ok((names.unwrap_or_default(), rows))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            row,
            column: 0,
            message: format!("{other:?}"),
        },
    }
}

/// Writes features followed by the label column, with a header row.
pub fn write_csv(path: impl AsRef<Path>, data: &Dataset, feature_names: &[String], label_name: &str) -> Result<()> {
    let path = path.as_ref();
    if feature_names.len() != data.n_features() {
        return Err(Error::dims("feature names", data.n_features(), feature_names.len()));
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header: Vec<&str> = feature_names.iter().map(String::as_str).collect();
    header.push(label_name);
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for i in 0..data.n_samples() {
        let mut rec: Vec<String> = data.features().row(i).iter().map(|v| format!("{v:e}")).collect();
        rec.push(format!("{:e}", data.label(i)));
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Per-column affine scaling fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub feature_means: Vec<f64>,
    pub feature_scales: Vec<f64>,
    pub label_mean: f64,
    pub label_scale: f64,
}

impl Standardizer {
    pub fn identity(n_features: usize) -> Self {
        Self {
            feature_means: vec![0.0; n_features],
            feature_scales: vec![1.0; n_features],
            label_mean: 0.0,
            label_scale: 1.0,
        }
    }

    /// Keeps the feature scaling but leaves labels untouched.
    pub fn without_label_scaling(mut self) -> Self {
        self.label_mean = 0.0;
        self.label_scale = 1.0;
        self
    }

    pub fn unscale_label(&self, y: f64) -> f64 {
        y * self.label_scale + self.label_mean
    }

    /// Maps standardized data back to original units.
    pub fn invert(&self, data: &Dataset) -> Result<Dataset> {
        self.check(data)?;
        let x = DMatrix::from_fn(data.n_samples(), data.n_features(), |i, j| {
            data.features()[(i, j)] * self.feature_scales[j] + self.feature_means[j]
        });
        let y = data.labels().map(|v| self.unscale_label(v));
        Dataset::new(x, y)
    }

    fn check(&self, data: &Dataset) -> Result<()> {
        if data.n_features() != self.feature_means.len() {
            return Err(Error::dims("standardizer columns", self.feature_means.len(), data.n_features()));
        }
        Ok(())
    }
}

/// Column means and population standard deviations; near-constant columns
/// get scale 1.
pub fn fit_standardizer(data: &Dataset) -> Result<Standardizer> {
    let n = data.n_samples();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let (feature_means, feature_scales) = data
        .features()
        .column_iter()
        .map(|c| mean_and_scale(c.iter().copied(), n))
        .unzip();
    let (label_mean, label_scale) = mean_and_scale(data.labels().iter().copied(), n);
    Ok(Standardizer {
        feature_means,
        feature_scales,
        label_mean,
        label_scale,
    })
}

fn mean_and_scale(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let sd = var.sqrt();
    (mean, if sd < MIN_SCALE { 1.0 } else { sd })
}

pub fn apply_standardizer(s: &Standardizer, data: &Dataset) -> Result<Dataset> {
    s.check(data)?;
    let x = DMatrix::from_fn(data.n_samples(), data.n_features(), |i, j| {
        (data.features()[(i, j)] - s.feature_means[j]) / s.feature_scales[j]
    });
    let y = data.labels().map(|v| (v - s.label_mean) / s.label_scale);
    Dataset::new(x, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainSide {
    /// Train on `value < threshold`, test on `value ≥ threshold`.
    Below,
    /// Train on `value ≥ threshold`, test on `value < threshold`.
    AboveOrEqual,
}

impl FromStr for TrainSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "below" => Ok(TrainSide::Below),
            "above_or_equal" | "above" => Ok(TrainSide::AboveOrEqual),
            other => Err(Error::InvalidParameter(format!("unknown train side {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitRule {
    Random {
        test_fraction: f64,
    },
    FeatureThreshold {
        feature_index: usize,
        threshold: f64,
        train_side: TrainSide,
    },
}

impl SplitRule {
    pub fn random(test_fraction: f64) -> Result<Self> {
        if !(test_fraction > 0.0 && test_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "test fraction must lie in (0, 1), got {test_fraction}"
            )));
        }
        Ok(SplitRule::Random { test_fraction })
    }

    pub fn threshold(feature_index: usize, threshold: f64, train_side: TrainSide) -> Result<Self> {
        if !threshold.is_finite() {
            return Err(Error::InvalidParameter(format!("threshold must be finite, got {threshold}")));
        }
        Ok(SplitRule::FeatureThreshold {
            feature_index,
            threshold,
            train_side,
        })
    }

    /// Whether repeated splits with different seeds differ.
    pub fn is_random(&self) -> bool {
        matches!(self, SplitRule::Random { .. })
    }
}

/// Row indices of the train and test sides, each in ascending order.
pub fn split_indices(data: &Dataset, rule: &SplitRule, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = data.n_samples();
    let (mut train, mut test): (Vec<usize>, Vec<usize>) = match *rule {
        SplitRule::Random { test_fraction } => {
            if n < 2 {
                return Err(Error::InsufficientData { needed: 2, got: n });
            }
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let n_test = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);
            let test = idx.split_off(n - n_test);
            (idx, test)
        }
        SplitRule::FeatureThreshold {
            feature_index,
            threshold,
            train_side,
        } => {
            if feature_index >= data.n_features() {
                return Err(Error::dims("split feature index", data.n_features(), feature_index));
            }
            let col = data.features().column(feature_index);
            (0..n).partition(|&i| match train_side {
                TrainSide::Below => col[i] < threshold,
                TrainSide::AboveOrEqual => col[i] >= threshold,
            })
        }
    };
    if train.is_empty() {
        return Err(Error::EmptySide("train"));
    }
    if test.is_empty() {
        return Err(Error::EmptySide("test"));
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(data: &Dataset, rule: &SplitRule, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(data, rule, seed)?;
    Ok((data.select_rows(&train)?, data.select_rows(&test)?))
}
