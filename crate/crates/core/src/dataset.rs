//! The training corpus: a design matrix with one sample per row and its labels.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Design matrix `X_N` (N×M, rows are samples) paired with the label vector `Y_N`.
///
/// Construction validates shape and finiteness, so every `Dataset` in
/// circulation has `N ≥ 1`, `M ≥ 1` and only finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    labels: DVector<f64>,
}

impl Dataset {
    pub fn new(features: DMatrix<f64>, labels: DVector<f64>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::dims("dataset rows", features.nrows(), labels.len()));
        }
        if features.nrows() == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if features.ncols() == 0 {
            return Err(Error::dims("dataset features", 1, 0));
        }
        if features.iter().chain(labels.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "dataset contains non-finite entries".into(),
            ));
        }
        Ok(Self { features, labels })
    }

    /// Builds a dataset from row slices. All rows must have the same length.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[f64]) -> Result<Self> {
        let n_features = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_features) {
            return Err(Error::dims("dataset row length", n_features, bad.len()));
        }
        let features = DMatrix::from_fn(rows.len(), n_features, |i, j| rows[i][j]);
        Self::new(features, DVector::from_column_slice(labels))
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &DVector<f64> {
        &self.labels
    }

    /// Feature vector `x_n` of sample `index`.
    pub fn sample(&self, index: usize) -> DVector<f64> {
        self.features.row(index).transpose()
    }

    pub fn label(&self, index: usize) -> f64 {
        self.labels[index]
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let features = self.features.select_rows(indices);
        let labels = DVector::from_iterator(indices.len(), indices.iter().map(|&i| self.labels[i]));
        Self::new(features, labels)
    }

    /// Dataset with sample `index` removed (one leave-one-out fold).
    pub fn without_sample(&self, index: usize) -> Result<Self> {
        let keep: Vec<usize> = (0..self.n_samples()).filter(|&i| i != index).collect();
        self.select_rows(&keep)
    }

    /// Dataset with one extra sample appended.
    pub fn with_sample(&self, x: &DVector<f64>, y: f64) -> Result<Self> {
        if x.len() != self.n_features() {
            return Err(Error::dims("appended sample", self.n_features(), x.len()));
        }
        let n = self.n_samples();
        let mut features = self.features.clone().insert_row(n, 0.0);
        features.row_mut(n).copy_from(&x.transpose());
        let labels = self.labels.clone().push(y);
        Self::new(features, labels)
    }

    /// Prepends a constant column of ones.
    pub fn with_intercept(&self) -> Self {
        let features = self.features.clone().insert_column(0, 1.0);
        Self {
            features,
            labels: self.labels.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mismatched_rows() {
        let err = Dataset::new(DMatrix::zeros(3, 2), DVector::zeros(2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(Dataset::new(DMatrix::zeros(0, 2), DVector::zeros(0)).is_err());
        assert!(Dataset::new(DMatrix::zeros(2, 0), DVector::zeros(2)).is_err());
        let mut x = DMatrix::zeros(2, 2);
        x[(1, 1)] = f64::NAN;
        assert!(Dataset::new(x, DVector::zeros(2)).is_err());
    }

    #[test]
    fn row_helpers() {
        let d = Dataset::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]], &[1.0, 2.0, 3.0])
            .unwrap();
        let loo = d.without_sample(1).unwrap();
        assert_eq!(loo.n_samples(), 2);
        assert_eq!(loo.sample(1).as_slice(), &[5.0, 6.0]);
        let aug = d.with_sample(&DVector::from_vec(vec![7.0, 8.0]), 4.0).unwrap();
        assert_eq!(aug.n_samples(), 4);
        assert_eq!(aug.sample(3).as_slice(), &[7.0, 8.0]);
        assert_eq!(aug.label(3), 4.0);
        let icpt = d.with_intercept();
        assert_eq!(icpt.sample(0).as_slice(), &[1.0, 1.0, 2.0]);
    }
}
