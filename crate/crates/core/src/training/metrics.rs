use std::ops::Range;

use crate::autodiff::Matrix;
use crate::error::{Error, Result};
use crate::ingest::WindowedDataset;

/// Hours of day counted as daytime, by bucket start: 07:00 through the 20:00 bucket.
pub const DAYTIME_HOURS: Range<u32> = 7..21;

/// Error summary in original demand units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub rmse: f64,
    pub rmse_daytime: f64,
    pub mae: f64,
    /// NaN when the targets have zero variance.
    pub r_squared: f64,
}

impl Metrics {
    pub const CSV_HEADER: &'static str = "rmse,rmse_daytime,mae,r_squared";

    pub fn csv_fields(&self) -> String {
        format!("{},{},{},{}", self.rmse, self.rmse_daytime, self.mae, self.r_squared)
    }
}

/// `pred` and `target` are samples × stations; `hour_of_day` labels each row.
pub fn evaluate(pred: &Matrix, target: &Matrix, hour_of_day: &[u32]) -> Result<Metrics> {
    if pred.shape() != target.shape() {
        return Err(Error::dim("evaluate", pred.shape(), target.shape()));
    }
    if hour_of_day.len() != pred.rows() {
        return Err(Error::dim("evaluate", pred.shape(), (hour_of_day.len(), pred.cols())));
    }
    let count = pred.len() as f64;
    let mean = target.sum() / count;
    let (mut sse, mut sae, mut sst) = (0.0, 0.0, 0.0);
    let (mut day_sse, mut day_count) = (0.0, 0usize);
    for r in 0..pred.rows() {
        let daytime = DAYTIME_HOURS.contains(&hour_of_day[r]);
        for (p, y) in pred.row(r).iter().zip(target.row(r)) {
            let e = y - p;
            sse += e * e;
            sae += e.abs();
            sst += (y - mean) * (y - mean);
            if daytime {
                day_sse += e * e;
                day_count += 1;
            }
        }
    }
    let r_squared = if sst > 0.0 {
        1.0 - sse / sst
    } else {
        log::warn!("target variance is zero; R² is undefined");
        f64::NAN
    };
    Ok(Metrics {
        rmse: (sse / count).sqrt(),
        rmse_daytime: if day_count > 0 {
            (day_sse / day_count as f64).sqrt()
        } else {
            f64::NAN
        },
        mae: sae / count,
        r_squared,
    })
}

/// Metrics of stations × samples predictions against a dataset's raw targets.
pub fn evaluate_dataset(pred: &Matrix, data: &WindowedDataset) -> Result<Metrics> {
    if pred.shape() != (data.n_stations(), data.len()) {
        return Err(Error::dim("evaluate", pred.shape(), (data.n_stations(), data.len())));
    }
    let raw = data.raw_series();
    let target = Matrix::from_fn(data.len(), data.n_stations(), |k, i| raw[(i, data.target_hour(k))]);
    let hours: Vec<u32> = (0..data.len()).map(|k| data.target_hour_of_day(k)).collect();
    evaluate(&pred.transpose(), &target, &hours)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit() {
        let y = Matrix::from_rows(&[[1.0, 2.0], [3.0, 5.0]]);
        let m = evaluate(&y, &y, &[8, 9]).unwrap();
        assert_eq!((m.rmse, m.mae, m.r_squared), (0.0, 0.0, 1.0));
    }

    #[test]
    fn mean_predictor() {
        let y = Matrix::from_rows(&[[1.0, 2.0], [3.0, 6.0]]);
        let p = Matrix::filled(2, 2, 3.0);
        assert_eq!(evaluate(&p, &y, &[0, 1]).unwrap().r_squared, 0.0);
    }

    #[test]
    fn daytime_rows_only() {
        let y = Matrix::from_rows(&[[0.0], [0.0], [0.0]]);
        let p = Matrix::from_rows(&[[2.0], [4.0], [100.0]]);
        let m = evaluate(&p, &y, &[7, 20, 21]).unwrap();
        assert_eq!(m.rmse_daytime, 10.0f64.sqrt());
        assert!(m.r_squared.is_nan());
    }
}
