use crate::autodiff::Matrix;
use crate::error::{Error, Result};
use crate::ingest::WindowedDataset;

/// Grouping used by the historical average.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotKind {
    HourOfDay,
    HourOfWeek,
}

impl SlotKind {
    pub fn slots(self) -> usize {
        match self {
            SlotKind::HourOfDay => 24,
            SlotKind::HourOfWeek => 168,
        }
    }

    pub fn label(self, data: &WindowedDataset, k: usize) -> u32 {
        match self {
            SlotKind::HourOfDay => data.target_hour_of_day(k),
            SlotKind::HourOfWeek => data.target_hour_of_week(k),
        }
    }
}

/// Per-station mean demand of each time slot over the training hours.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoricalAverage {
    pub kind: SlotKind,
    /// N × slots, original units.
    pub means: Matrix,
}

impl HistoricalAverage {
    /// `series` is stations × hours in original units; `labels[t]` is hour `t`'s slot.
    pub fn fit(series: &Matrix, labels: &[u32], kind: SlotKind) -> Result<Self> {
        if labels.len() != series.cols() {
            return Err(Error::dim("ha_fit", series.shape(), (1, labels.len())));
        }
        let slots = kind.slots();
        let mut sums = Matrix::zeros(series.rows(), slots);
        let mut counts = vec![0usize; slots];
        for (t, &s) in labels.iter().enumerate() {
            let s = s as usize;
            if s >= slots {
                return Err(Error::Validation(format!("slot label {s} out of range")));
            }
            counts[s] += 1;
            for i in 0..series.rows() {
                sums[(i, s)] += series[(i, t)];
            }
        }
        if let Some(s) = counts.iter().position(|&c| c == 0) {
            return Err(Error::Validation(format!(
                "training hours contain no observation for slot {s}"
            )));
        }
        let means = Matrix::from_fn(series.rows(), slots, |i, s| sums[(i, s)] / counts[s] as f64);
        Ok(Self { kind, means })
    }

    /// Fits on the training hours of a windowed dataset's raw series.
    pub fn fit_hours(data: &WindowedDataset, kind: SlotKind) -> Result<Self> {
        let range = data.hour_range();
        let raw = data.raw_series();
        let series = Matrix::from_fn(raw.rows(), range.len(), |i, t| raw[(i, range.start + t)]);
        let labels: Vec<u32> = range
            .map(|t| {
                let ts = data.timestamp(t);
                match kind {
                    SlotKind::HourOfDay => chrono::Timelike::hour(&ts),
                    SlotKind::HourOfWeek => {
                        chrono::Datelike::weekday(&ts).num_days_from_monday() * 24 + chrono::Timelike::hour(&ts)
                    }
                }
            })
            .collect();
        Self::fit(&series, &labels, kind)
    }

    pub fn n(&self) -> usize {
        self.means.rows()
    }

    pub fn predict(&self, slot: u32) -> Vec<f64> {
        self.means.col(slot as usize)
    }

    /// N×M predictions in original units for every sample of `data`.
    pub fn predict_dataset(&self, data: &WindowedDataset) -> Matrix {
        let mut out = Matrix::zeros(self.n(), data.len());
        for k in 0..data.len() {
            let s = self.kind.label(data, k) as usize;
            for i in 0..self.n() {
                out[(i, k)] = self.means[(i, s)];
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LassoOptions {
    /// Stop when no coefficient moves by more than this in a full sweep.
    pub tolerance: f64,
    pub max_sweeps: usize,
    pub intercept: bool,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_sweeps: 10_000,
            intercept: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LassoFit {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub sweeps: usize,
}

impl LassoFit {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept + x.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>()
    }
}

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Cyclic coordinate descent on `½‖y − Xw‖²/m + λ‖w‖₁`.
///
/// With `intercept` set, columns and `y` are centred first and the intercept
/// is recovered afterwards, so it is never penalized.
pub fn lasso_fit(x: &Matrix, y: &[f64], lambda: f64, opts: LassoOptions) -> Result<LassoFit> {
    let (m, p) = x.shape();
    if y.len() != m {
        return Err(Error::dim("lasso_fit", x.shape(), (y.len(), 1)));
    }
    if !(lambda >= 0.0) {
        return Err(Error::Validation(format!("LASSO penalty must be ≥ 0, got {lambda}")));
    }
    let mf = m as f64;
    let (x_mean, y_mean) = if opts.intercept {
        let col_means: Vec<f64> = (0..p).map(|j| (0..m).map(|i| x[(i, j)]).sum::<f64>() / mf).collect();
        (col_means, y.iter().sum::<f64>() / mf)
    } else {
        (vec![0.0; p], 0.0)
    };
    // Column-major centred copy; coordinate descent walks columns.
    let cols: Vec<Vec<f64>> = (0..p)
        .map(|j| (0..m).map(|i| x[(i, j)] - x_mean[j]).collect())
        .collect();
    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>() / mf).collect();
    let mut resid: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let mut w = vec![0.0; p];

    for sweep in 1..=opts.max_sweeps {
        let mut largest = 0.0f64;
        for j in 0..p {
            if norms[j] == 0.0 {
                continue;
            }
            let col = &cols[j];
            let rho = col.iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() / mf + norms[j] * w[j];
            let next = soft_threshold(rho, lambda) / norms[j];
            let delta = next - w[j];
            if delta != 0.0 {
                for (r, a) in resid.iter_mut().zip(col) {
                    *r -= a * delta;
                }
                w[j] = next;
                largest = largest.max(delta.abs());
            }
        }
        if largest <= opts.tolerance {
            let intercept = y_mean - x_mean.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
            return Ok(LassoFit {
                weights: w,
                intercept,
                sweeps: sweep,
            });
        }
        if sweep == opts.max_sweeps {
            return Err(Error::Convergence {
                sweeps: sweep,
                residual: largest,
            });
        }
    }
    Err(Error::Convergence {
        sweeps: 0,
        residual: f64::INFINITY,
    })
}

/// One LASSO model per station on that station's own normalized window.
#[derive(Clone, Debug, PartialEq)]
pub struct LassoEnsemble {
    pub window: usize,
    pub lambda: f64,
    pub models: Vec<LassoFit>,
}

impl LassoEnsemble {
    pub fn fit(data: &WindowedDataset, lambda: f64, opts: LassoOptions) -> Result<Self> {
        let c = data.window();
        let models = (0..data.n_stations())
            .map(|i| {
                let x = Matrix::from_fn(data.len(), c, |k, j| data.input_value(k, i, j));
                let y: Vec<f64> = (0..data.len())
                    .map(|k| data.normalized_series()[(i, data.target_hour(k))])
                    .collect();
                lasso_fit(&x, &y, lambda, opts)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            window: c,
            lambda,
            models,
        })
    }

    pub fn n(&self) -> usize {
        self.models.len()
    }

    pub fn predict_normalized(&self, data: &WindowedDataset) -> Result<Matrix> {
        if data.window() != self.window || data.n_stations() != self.n() {
            return Err(Error::dim(
                "lasso_predict",
                (data.n_stations(), data.window()),
                (self.n(), self.window),
            ));
        }
        let mut out = Matrix::zeros(self.n(), data.len());
        let mut x = vec![0.0; self.window];
        for (i, model) in self.models.iter().enumerate() {
            for k in 0..data.len() {
                for (j, v) in x.iter_mut().enumerate() {
                    *v = data.input_value(k, i, j);
                }
                out[(i, k)] = model.predict(&x);
            }
        }
        Ok(out)
    }

    /// `N × (C⁰ + 1)`: weights then intercept.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.n().max(1), self.window + 1, |i, j| {
            let m = &self.models[i];
            if j < self.window {
                m.weights[j]
            } else {
                m.intercept
            }
        })
    }

    pub fn from_matrix(m: &Matrix, lambda: f64) -> Self {
        let window = m.cols() - 1;
        let models = (0..m.rows())
            .map(|i| LassoFit {
                weights: m.row(i)[..window].to_vec(),
                intercept: m[(i, window)],
                sweeps: 0,
            })
            .collect();
        Self { window, lambda, models }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ha_mean_of_slot() {
        // one day of ones, plus a second reading at 08:00
        let mut values = vec![1.0; 24];
        let mut labels: Vec<u32> = (0..24).collect();
        values[8] = 2.0;
        values.push(4.0);
        labels.push(8);
        let series = Matrix::from_vec(1, values.len(), values).unwrap();
        let ha = HistoricalAverage::fit(&series, &labels, SlotKind::HourOfDay).unwrap();
        assert_eq!(ha.predict(8), vec![3.0]);
        assert_eq!(ha.predict(9), vec![1.0]);
    }

    #[test]
    fn ha_needs_every_slot() {
        let series = Matrix::from_rows(&[[1.0, 2.0]]);
        assert!(HistoricalAverage::fit(&series, &[0, 1], SlotKind::HourOfDay).is_err());
    }

    #[test]
    fn full_shrinkage() {
        let x = Matrix::from_rows(&[[1.0, 0.5], [2.0, -1.0], [0.0, 1.5], [-1.0, 0.3]]);
        let y = [1.0, 2.0, -0.5, 0.7];
        let opts = LassoOptions {
            intercept: false,
            ..Default::default()
        };
        let m = 4.0;
        let max_corr = (0..2)
            .map(|j| ((0..4).map(|i| x[(i, j)] * y[i]).sum::<f64>() / m).abs())
            .fold(0.0, f64::max);
        let fit = lasso_fit(&x, &y, max_corr, opts).unwrap();
        assert!(fit.weights.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn scalar_soft_threshold() {
        let x = Matrix::from_rows(&[[1.0], [2.0], [3.0]]);
        let y = [1.0, 3.0, 2.0];
        let lambda = 0.5;
        let opts = LassoOptions {
            intercept: false,
            ..Default::default()
        };
        let fit = lasso_fit(&x, &y, lambda, opts).unwrap();
        let xy = (1.0 + 6.0 + 6.0) / 3.0;
        let xx = (1.0 + 4.0 + 9.0) / 3.0;
        assert!((fit.weights[0] - (xy - lambda) / xx).abs() < 1e-12);
    }
}
