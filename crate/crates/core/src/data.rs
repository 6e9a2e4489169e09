//! Dataset representation, CSV ingestion, FIR lag matrices, auto-scaling,
//! segmentation and collinearity diagnostics.

use crate::scalar::Real;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv parse failure: {0}")]
    Csv(#[from] csv::Error),
    #[error("column {name:?} is not mapped to a role")]
    UnmappedColumn { name: String },
    #[error("non-numeric cell at row {row}, column {column:?}: {value:?}")]
    BadCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("ragged row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("dataset has zero data rows")]
    ZeroRows,
    #[error("dataset has no process-variable columns")]
    NoProcessVariables,
    #[error("dataset has no target columns")]
    NoTargets,
    #[error("lag order {lag} must be smaller than the number of rows {rows}")]
    LagTooLarge { lag: usize, rows: usize },
    #[error("target index {index} out of range (m = {targets})")]
    TargetOutOfRange { index: usize, targets: usize },
    #[error("segmentation needs {required} rows but the dataset has {available}")]
    InsufficientData { required: usize, available: usize },
    #[error("all predictor columns have zero variance")]
    AllColumnsConstant,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Role of a CSV column, assigned by the experiment configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRole {
    Process,
    Target,
    Ignore,
}

/// Time-ordered matrix of process variables plus response variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Dataset<T: Real> {
    /// N x r process-variable matrix, rows in strict time order.
    pub values: DMatrix<T>,
    /// N x m response matrix aligned with `values`.
    pub targets: DMatrix<T>,
    pub var_names: Vec<String>,
    pub target_names: Vec<String>,
    /// Sampling period, metadata only.
    pub sample_period: Option<f64>,
}

impl<T: Real> Dataset<T> {
    pub fn new(
        values: DMatrix<T>,
        targets: DMatrix<T>,
        var_names: Vec<String>,
        target_names: Vec<String>,
    ) -> Result<Self, DataError> {
        if values.nrows() == 0 {
            return Err(DataError::ZeroRows);
        }
        if values.ncols() == 0 {
            return Err(DataError::NoProcessVariables);
        }
        if targets.ncols() == 0 {
            return Err(DataError::NoTargets);
        }
        if targets.nrows() != values.nrows() {
            return Err(DataError::DimensionMismatch {
                expected: values.nrows(),
                found: targets.nrows(),
            });
        }
        Ok(Self {
            values,
            targets,
            var_names,
            target_names,
            sample_period: None,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_vars(&self) -> usize {
        self.values.ncols()
    }

    pub fn n_targets(&self) -> usize {
        self.targets.ncols()
    }

    /// Contiguous row slice as a new dataset.
    pub fn slice_rows(&self, range: std::ops::Range<usize>) -> Dataset<T> {
        Dataset {
            values: self.values.rows(range.start, range.len()).into_owned(),
            targets: self.targets.rows(range.start, range.len()).into_owned(),
            var_names: self.var_names.clone(),
            target_names: self.target_names.clone(),
            sample_period: self.sample_period,
        }
    }

    /// Keep only the process-variable columns listed in `keep` (in the given order).
    pub fn select_vars(&self, keep: &[usize]) -> Dataset<T> {
        let mut values = DMatrix::zeros(self.n_rows(), keep.len());
        let mut names = Vec::with_capacity(keep.len());
        for (out, &j) in keep.iter().enumerate() {
            values.set_column(out, &self.values.column(j));
            names.push(self.var_names[j].clone());
        }
        Dataset {
            values,
            targets: self.targets.clone(),
            var_names: names,
            target_names: self.target_names.clone(),
            sample_period: self.sample_period,
        }
    }
}

/// Load a dataset from a delimited text file with a header row.
///
/// Every header name must be mapped to a role in `schema`; parsing stops at
/// the first missing file, ragged row or non-numeric cell. Row numbers in
/// errors are 1-based data rows (the header is row 0).
pub fn load_dataset<T: Real>(
    path: &Path,
    schema: &HashMap<String, ColumnRole>,
    delimiter: u8,
) -> Result<Dataset<T>, DataError> {
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(file);

    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut roles = Vec::with_capacity(headers.len());
    for name in &headers {
        let role = schema
            .get(name)
            .copied()
            .ok_or_else(|| DataError::UnmappedColumn { name: name.clone() })?;
        roles.push(role);
    }

    let mut var_names = Vec::new();
    let mut target_names = Vec::new();
    for (name, role) in headers.iter().zip(&roles) {
        match role {
            ColumnRole::Process => var_names.push(name.clone()),
            ColumnRole::Target => target_names.push(name.clone()),
            ColumnRole::Ignore => {}
        }
    }
    if var_names.is_empty() {
        return Err(DataError::NoProcessVariables);
    }
    if target_names.is_empty() {
        return Err(DataError::NoTargets);
    }

    let mut value_rows: Vec<T> = Vec::new();
    let mut target_rows: Vec<T> = Vec::new();
    let mut n = 0usize;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.len() != headers.len() {
            return Err(DataError::RaggedRow {
                row,
                expected: headers.len(),
                found: record.len(),
            });
        }
        for ((cell, name), role) in record.iter().zip(&headers).zip(&roles) {
            if *role == ColumnRole::Ignore {
                continue;
            }
            let parsed: f64 = cell.trim().parse().map_err(|_| DataError::BadCell {
                row,
                column: name.clone(),
                value: cell.to_string(),
            })?;
            if !parsed.is_finite() {
                return Err(DataError::BadCell {
                    row,
                    column: name.clone(),
                    value: cell.to_string(),
                });
            }
            match role {
                ColumnRole::Process => value_rows.push(T::of(parsed)),
                ColumnRole::Target => target_rows.push(T::of(parsed)),
                ColumnRole::Ignore => unreachable!(),
            }
        }
        n += 1;
    }
    if n == 0 {
        return Err(DataError::ZeroRows);
    }

    let values = DMatrix::from_row_slice(n, var_names.len(), &value_rows);
    let targets = DMatrix::from_row_slice(n, target_names.len(), &target_rows);
    Dataset::new(values, targets, var_names, target_names)
}

/// FIR-lagged predictor matrix aligned to a single response vector.
///
/// Column `j` holds variable `j mod r` at lag `j / r`, i.e. lag blocks are
/// variable-major: row `t` is `[z(t), z(t-1), ..., z(t-n)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DesignMatrix<T: Real> {
    pub x: DMatrix<T>,
    pub y: DVector<T>,
    pub lag_order: usize,
    /// Index of the first usable original row (= lag order).
    pub row_offset: usize,
}

impl<T: Real> DesignMatrix<T> {
    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.x.ncols()
    }
}

/// Build the FIR design matrix for one target at lag order `n`.
pub fn build_fir_matrix<T: Real>(
    ds: &Dataset<T>,
    target_index: usize,
    n: usize,
) -> Result<DesignMatrix<T>, DataError> {
    let rows = ds.n_rows();
    let r = ds.n_vars();
    if n >= rows {
        return Err(DataError::LagTooLarge { lag: n, rows });
    }
    if target_index >= ds.n_targets() {
        return Err(DataError::TargetOutOfRange {
            index: target_index,
            targets: ds.n_targets(),
        });
    }
    let n_out = rows - n;
    let p = (n + 1) * r;
    let mut x = DMatrix::zeros(n_out, p);
    let mut y = DVector::zeros(n_out);
    for t in n..rows {
        let out = t - n;
        for lag in 0..=n {
            for var in 0..r {
                x[(out, lag * r + var)] = ds.values[(t - lag, var)];
            }
        }
        y[out] = ds.targets[(t, target_index)];
    }
    Ok(DesignMatrix {
        x,
        y,
        lag_order: n,
        row_offset: n,
    })
}

/// Column/target standardization statistics estimated from training data.
///
/// Standard deviations use the (N-1) denominator. Zero-variance columns are
/// flagged as not retained and map to zero under `apply`, so the column count
/// and coefficient indexing stay stable across windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Scaler<T: Real> {
    pub means: DVector<T>,
    pub stds: DVector<T>,
    pub y_mean: T,
    pub y_std: T,
    pub retained: Vec<bool>,
}

const STD_FLOOR: f64 = 1e-12;

impl<T: Real> Scaler<T> {
    /// Estimate standardization statistics from `(x, y)`.
    pub fn fit(x: &DMatrix<T>, y: &DVector<T>) -> Result<Self, DataError> {
        let n = x.nrows();
        if n == 0 {
            return Err(DataError::ZeroRows);
        }
        let nf = T::from_count(n);
        let denom = if n > 1 { T::from_count(n - 1) } else { T::one() };
        let p = x.ncols();
        let mut means = DVector::zeros(p);
        let mut stds = DVector::zeros(p);
        let mut retained = vec![false; p];
        let mut any = false;
        for j in 0..p {
            let col = x.column(j);
            let mean = col.iter().copied().sum::<T>() / nf;
            let mut ss = T::zero();
            for v in col.iter() {
                let d = *v - mean;
                ss += d * d;
            }
            let std = (ss / denom).sqrt();
            means[j] = mean;
            stds[j] = std;
            if std > T::of(STD_FLOOR) {
                retained[j] = true;
                any = true;
            }
        }
        if !any {
            return Err(DataError::AllColumnsConstant);
        }
        let y_mean = y.iter().copied().sum::<T>() / nf;
        let mut ss = T::zero();
        for v in y.iter() {
            let d = *v - y_mean;
            ss += d * d;
        }
        let mut y_std = (ss / denom).sqrt();
        if y_std <= T::of(STD_FLOOR) {
            // constant target: leave it centered but unscaled
            y_std = T::one();
        }
        Ok(Self {
            means,
            stds,
            y_mean,
            y_std,
            retained,
        })
    }

    /// Standardize with the stored statistics (never re-fit on test data).
    pub fn apply(&self, x: &DMatrix<T>, y: &DVector<T>) -> (DMatrix<T>, DVector<T>) {
        let mut xs = DMatrix::zeros(x.nrows(), x.ncols());
        for j in 0..x.ncols() {
            if !self.retained[j] {
                continue;
            }
            for i in 0..x.nrows() {
                xs[(i, j)] = (x[(i, j)] - self.means[j]) / self.stds[j];
            }
        }
        let ys = y.map(|v| (v - self.y_mean) / self.y_std);
        (xs, ys)
    }

    pub fn apply_row(&self, x: &DVector<T>) -> DVector<T> {
        let mut out = DVector::zeros(x.len());
        for j in 0..x.len() {
            if self.retained[j] {
                out[j] = (x[j] - self.means[j]) / self.stds[j];
            }
        }
        out
    }

    /// Inverse transform of a standardized predictor matrix and target.
    pub fn invert(&self, xs: &DMatrix<T>, ys: &DVector<T>) -> (DMatrix<T>, DVector<T>) {
        let mut x = DMatrix::zeros(xs.nrows(), xs.ncols());
        for j in 0..xs.ncols() {
            for i in 0..xs.nrows() {
                x[(i, j)] = if self.retained[j] {
                    xs[(i, j)] * self.stds[j] + self.means[j]
                } else {
                    self.means[j]
                };
            }
        }
        let y = ys.map(|v| v * self.y_std + self.y_mean);
        (x, y)
    }

    pub fn invert_y(&self, ys: T) -> T {
        ys * self.y_std + self.y_mean
    }

    pub fn n_cols(&self) -> usize {
        self.means.len()
    }
}

/// One contiguous train/test split inside a segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub train: std::ops::Range<usize>,
    pub test: std::ops::Range<usize>,
}

/// Divide the dataset into `k` successive regions of equal length, each split
/// into a leading training part and an immediately following test part.
pub fn segment<T: Real>(
    ds: &Dataset<T>,
    k: usize,
    train_size: usize,
    test_size: usize,
) -> Result<Vec<Segment>, DataError> {
    let n = ds.n_rows();
    let required = k * (train_size + test_size);
    if k == 0 || required > n {
        return Err(DataError::InsufficientData {
            required: required.max(1),
            available: n,
        });
    }
    let region = n / k;
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let start = i * region;
        out.push(Segment {
            train: start..start + train_size,
            test: start + train_size..start + train_size + test_size,
        });
    }
    Ok(out)
}

/// Variance inflation factors: `VIF_j = 1 / (1 - R^2_j)` where `R^2_j` comes
/// from regressing column `j` on all other columns (with intercept).
/// Rank-deficient or constant columns report +inf.
pub fn vif<T: Real>(x: &DMatrix<T>) -> Vec<T> {
    let n = x.nrows();
    let p = x.ncols();
    let nf = T::from_count(n);
    // center all columns once
    let mut centered = x.clone();
    for j in 0..p {
        let mean = centered.column(j).iter().copied().sum::<T>() / nf;
        for i in 0..n {
            centered[(i, j)] -= mean;
        }
    }
    let mut out = Vec::with_capacity(p);
    for j in 0..p {
        let target = centered.column(j).into_owned();
        let tss = target.iter().map(|v| *v * *v).sum::<T>();
        if tss <= T::of(STD_FLOOR) {
            out.push(T::infinity());
            continue;
        }
        let mut others = DMatrix::zeros(n, p - 1);
        let mut col = 0;
        for o in 0..p {
            if o != j {
                others.set_column(col, &centered.column(o));
                col += 1;
            }
        }
        let svd = others.clone().svd(true, true);
        let eps = T::of(1e-10) * svd.singular_values.max();
        let coeffs = svd
            .solve(&target, eps)
            .expect("svd solve with computed u/v");
        let residual = &target - others * coeffs;
        let rss = residual.iter().map(|v| *v * *v).sum::<T>();
        let one_minus_r2 = rss / tss;
        if one_minus_r2 <= T::of(1e-12) {
            out.push(T::infinity());
        } else {
            out.push(T::one() / one_minus_r2);
        }
    }
    out
}
