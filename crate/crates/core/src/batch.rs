use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `n` observations of a `d`-dimensional variable, stored column-wise (`d x n`).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    data: DMatrix<f64>,
}

impl SampleBatch {
    /// Takes a `d x n` matrix, one observation per column.
    pub fn from_columns(data: DMatrix<f64>) -> Result<Self> {
        if data.ncols() == 0 {
            return Err(Error::EmptyBatch);
        }
        if data.nrows() == 0 {
            return Err(Error::ZeroDimension);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sample"));
        }
        Ok(Self { data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyBatch)?.as_ref().len();
        for (index, row) in rows.iter().enumerate() {
            let got = row.as_ref().len();
            if got != first {
                return Err(Error::RaggedBatch {
                    index,
                    expected: first,
                    got,
                });
            }
        }
        let data = DMatrix::from_fn(first, rows.len(), |i, j| rows[j].as_ref()[i]);
        Self::from_columns(data)
    }

    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::from_columns(DMatrix::from_row_slice(1, xs.len(), xs))
    }

    pub fn from_vectors(xs: &[DVector<f64>]) -> Result<Self> {
        let rows: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
        Self::from_rows(&rows)
    }

    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn observation(&self, l: usize) -> DVector<f64> {
        self.data.column(l).into_owned()
    }

    pub fn observations(&self) -> impl Iterator<Item = DVector<f64>> + '_ {
        self.data.column_iter().map(|c| c.into_owned())
    }

    /// First coordinate of every observation; the natural view of a `d = 1` batch.
    pub fn scalars(&self) -> Vec<f64> {
        self.data.row(0).iter().copied().collect()
    }

    /// Sample mean `X-bar`.
    pub fn mean(&self) -> DVector<f64> {
        self.data.column_mean()
    }

    /// Entrywise `(1/n) sum_l X_il X_jl`.
    pub fn second_moment(&self) -> DMatrix<f64> {
        let n = self.len() as f64;
        let m = &self.data * self.data.transpose() / n;
        (&m + m.transpose()) * 0.5
    }

    pub fn translated(&self, shift: &DVector<f64>) -> Self {
        let mut data = self.data.clone();
        for mut col in data.column_iter_mut() {
            col += shift;
        }
        Self { data }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            data: &self.data * factor,
        }
    }
}
