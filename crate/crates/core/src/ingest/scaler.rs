use std::ops::Range;

use crate::autodiff::Matrix;
use crate::error::{Error, Result};

/// Per-station Min-Max scaling fitted on training hours.
#[derive(Clone, Debug, PartialEq)]
pub struct Scaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Scaler {
    /// Fits on columns `train` of a stations × hours matrix.
    pub fn fit(series: &Matrix, train: Range<usize>) -> Result<Self> {
        if train.is_empty() || train.end > series.cols() {
            return Err(Error::Validation(format!(
                "scaler training range {train:?} is empty or exceeds {} hours",
                series.cols()
            )));
        }
        let mut min = Vec::with_capacity(series.rows());
        let mut max = Vec::with_capacity(series.rows());
        for i in 0..series.rows() {
            let row = &series.row(i)[train.clone()];
            min.push(row.iter().copied().fold(f64::INFINITY, f64::min));
            max.push(row.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
        Ok(Self { min, max })
    }

    pub fn n(&self) -> usize {
        self.min.len()
    }

    fn range(&self, i: usize) -> f64 {
        self.max[i] - self.min[i]
    }

    pub fn transform_value(&self, station: usize, x: f64) -> f64 {
        let r = self.range(station);
        if r > 0.0 {
            (x - self.min[station]) / r
        } else {
            0.0
        }
    }

    pub fn inverse_value(&self, station: usize, z: f64) -> f64 {
        let r = self.range(station);
        if r > 0.0 {
            z * r + self.min[station]
        } else {
            self.min[station]
        }
    }

    fn check(&self, m: &Matrix) -> Result<()> {
        if m.rows() != self.n() {
            return Err(Error::dim("scaler", (self.n(), 1), m.shape()));
        }
        Ok(())
    }

    /// Row `i` of `m` is station `i`.
    pub fn transform(&self, m: &Matrix) -> Result<Matrix> {
        self.check(m)?;
        Ok(Matrix::from_fn(m.rows(), m.cols(), |i, j| {
            self.transform_value(i, m[(i, j)])
        }))
    }

    pub fn inverse_transform(&self, m: &Matrix) -> Result<Matrix> {
        self.check(m)?;
        Ok(Matrix::from_fn(m.rows(), m.cols(), |i, j| {
            self.inverse_value(i, m[(i, j)])
        }))
    }
}
