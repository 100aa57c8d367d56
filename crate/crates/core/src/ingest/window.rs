use std::ops::Range;
use std::sync::Arc;

use chrono::{Datelike, Duration, NaiveDateTime, Timelike};

use crate::autodiff::Matrix;
use crate::error::{Error, Result};
use crate::ingest::{DatasetSplit, DemandSeries, Scaler};

/// Supervised samples `(X_i, y_{i+1})` over one split's hours.
///
/// A view over shared series: sample `k` takes input hours
/// `start + k .. start + k + c0` and targets hour `start + k + c0`.
#[derive(Clone, Debug)]
pub struct WindowedDataset {
    normalized: Arc<Matrix>,
    raw: Arc<Matrix>,
    t0: NaiveDateTime,
    hours: Range<usize>,
    c0: usize,
}

impl WindowedDataset {
    /// `normalized` and `raw` are stations × hours; column 0 is the hour starting at `t0`.
    pub fn new(
        normalized: Arc<Matrix>,
        raw: Arc<Matrix>,
        t0: NaiveDateTime,
        hours: Range<usize>,
        c0: usize,
    ) -> Result<Self> {
        if normalized.shape() != raw.shape() {
            return Err(Error::dim("make_windows", normalized.shape(), raw.shape()));
        }
        if c0 == 0 {
            return Err(Error::Validation("window length must be at least 1".into()));
        }
        if hours.end > raw.cols() || hours.len() <= c0 {
            return Err(Error::Validation(format!(
                "split of {} hours is too short for windows of {c0}",
                hours.len()
            )));
        }
        Ok(Self {
            normalized,
            raw,
            t0,
            hours,
            c0,
        })
    }

    pub fn len(&self) -> usize {
        self.hours.len() - self.c0
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_stations(&self) -> usize {
        self.raw.rows()
    }

    pub fn window(&self) -> usize {
        self.c0
    }

    pub fn hour_range(&self) -> Range<usize> {
        self.hours.clone()
    }

    /// Absolute hour index of sample `k`'s target.
    pub fn target_hour(&self, k: usize) -> usize {
        self.hours.start + k + self.c0
    }

    pub fn timestamp(&self, hour: usize) -> NaiveDateTime {
        self.t0 + Duration::hours(hour as i64)
    }

    pub fn target_hour_of_day(&self, k: usize) -> u32 {
        self.timestamp(self.target_hour(k)).hour()
    }

    /// 0..168, Monday 00:00 first.
    pub fn target_hour_of_week(&self, k: usize) -> u32 {
        let t = self.timestamp(self.target_hour(k));
        t.weekday().num_days_from_monday() * 24 + t.hour()
    }

    pub fn t0(&self) -> NaiveDateTime {
        self.t0
    }

    /// Normalized input value for `station` at lag column `j` (0 = oldest).
    pub fn input_value(&self, k: usize, station: usize, j: usize) -> f64 {
        self.normalized[(station, self.hours.start + k + j)]
    }

    /// Normalized N×C⁰ input of sample `k`.
    pub fn input(&self, k: usize) -> Matrix {
        let start = self.hours.start + k;
        Matrix::from_fn(self.n_stations(), self.c0, |i, j| self.normalized[(i, start + j)])
    }

    pub fn target(&self, k: usize) -> Vec<f64> {
        self.normalized.col(self.target_hour(k))
    }

    pub fn raw_target(&self, k: usize) -> Vec<f64> {
        self.raw.col(self.target_hour(k))
    }

    pub fn raw_series(&self) -> &Matrix {
        &self.raw
    }

    pub fn normalized_series(&self) -> &Matrix {
        &self.normalized
    }
}

/// A scaler fitted on the training hours and windowed views of each split.
#[derive(Clone, Debug)]
pub struct PreparedData {
    pub scaler: Scaler,
    pub train: WindowedDataset,
    pub validation: WindowedDataset,
    pub test: WindowedDataset,
}

pub fn prepare_windows(series: &DemandSeries, split: &DatasetSplit, c0: usize) -> Result<PreparedData> {
    let raw = series.to_matrix();
    let scaler = Scaler::fit(&raw, split.train.clone())?;
    let normalized = Arc::new(scaler.transform(&raw)?);
    let raw = Arc::new(raw);
    let view = |hours: Range<usize>| WindowedDataset::new(normalized.clone(), raw.clone(), series.t0, hours, c0);
    Ok(PreparedData {
        train: view(split.train.clone())?,
        validation: view(split.validation.clone())?,
        test: view(split.test.clone())?,
        scaler,
    })
}
