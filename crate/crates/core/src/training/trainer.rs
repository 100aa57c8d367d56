use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::Tape;
use crate::error::{Error, Result};
use crate::ingest::{Scaler, WindowedDataset};
use crate::models::{batch_targets, predict_normalized, Forecaster};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Non-improving epochs tolerated before stopping.
    pub patience: usize,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.005,
            batch_size: 100,
            patience: 20,
            max_epochs: 500,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Validation(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 || self.patience == 0 || self.max_epochs == 0 {
            return Err(Error::Validation(
                "batch size, patience and max epochs must all be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Patience,
    MaxEpochs,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Patience => "patience",
            StopReason::MaxEpochs => "max_epochs",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean normalized-space MSE over the epoch's batches, weighted by batch size.
    pub train_loss: f64,
    /// Original units.
    pub val_rmse: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// 1-based.
    pub best_epoch: usize,
    pub best_val_rmse: f64,
    pub stop: StopReason,
    pub wall_time: Duration,
}

impl TrainReport {
    /// Per-epoch CSV. Wall time stays out so identical runs give identical files.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_rmse,best\n");
        for e in &self.epochs {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                e.epoch,
                e.train_loss,
                e.val_rmse,
                u8::from(e.epoch == self.best_epoch)
            );
        }
        out
    }
}

/// Validation RMSE in original units over the model's output stations.
pub fn validation_rmse<F: Forecaster + ?Sized>(model: &F, data: &WindowedDataset, scaler: &Scaler) -> Result<f64> {
    let stations = model.output_stations(data.n_stations());
    let pred = predict_normalized(model, data)?;
    let raw = data.raw_series();
    let mut sse = 0.0;
    for (r, s) in stations.clone().enumerate() {
        for k in 0..data.len() {
            let e = scaler.inverse_value(s, pred[(r, k)]) - raw[(s, data.target_hour(k))];
            sse += e * e;
        }
    }
    Ok((sse / (stations.len() * data.len()) as f64).sqrt())
}

/// Mini-batch SGD with early stopping; leaves `model` at its best validation epoch.
pub fn train<F: Forecaster + ?Sized>(
    model: &mut F,
    train: &WindowedDataset,
    validation: &WindowedDataset,
    scaler: &Scaler,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    if train.is_empty() || validation.is_empty() {
        return Err(Error::Validation(
            "training and validation splits must be non-empty".into(),
        ));
    }
    let started = Instant::now();
    let stations = model.output_stations(train.n_stations());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut epochs = Vec::new();
    let mut best = (f64::INFINITY, 0usize, model.params().snapshot());
    let mut stale = 0;
    let mut stop = StopReason::MaxEpochs;

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let params = model.params_mut();
            params.zero_grad();
            let mut tape = Tape::new();
            let pred = model.forward(&mut tape, train, batch)?;
            let target = batch_targets(train, stations.clone(), batch);
            let loss = tape.mse_loss(pred, &target)?;
            let value = tape.value(loss)[(0, 0)];
            if !value.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: b });
            }
            loss_sum += value * batch.len() as f64;
            tape.backward(loss, model.params_mut())?;
            model.params_mut().sgd_step(cfg.learning_rate)?;
        }
        let val_rmse = validation_rmse(model, validation, scaler)?;
        if !val_rmse.is_finite() {
            // reported against the batch after the last one
            return Err(Error::NonFiniteLoss {
                epoch,
                batch: order.len().div_ceil(cfg.batch_size),
            });
        }
        epochs.push(EpochRecord {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            val_rmse,
        });
        log::debug!("epoch {epoch}: validation RMSE {val_rmse:.6}");
        if val_rmse < best.0 {
            best = (val_rmse, epoch, model.params().snapshot());
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                stop = StopReason::Patience;
                break;
            }
        }
    }
    model.params_mut().restore(&best.2);
    Ok(TrainReport {
        epochs,
        best_epoch: best.1,
        best_val_rmse: best.0,
        stop,
        wall_time: started.elapsed(),
    })
}
