//! SGD training with early stopping, grid search, metrics and checkpoints.

mod checkpoint;
mod grid;
mod metrics;
mod trainer;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use grid::{derive_seed, grid_search, GridOutcome, GridPoint, GridRange, GridRun, GridSpec, GRID_ORDER};
pub use metrics::{evaluate, evaluate_dataset, Metrics, DAYTIME_HOURS};
pub use trainer::{train, validation_rmse, EpochRecord, StopReason, TrainConfig, TrainReport};

use rayon::prelude::*;

use crate::error::Result;
use crate::graph::GraphFilter;
use crate::ingest::{Scaler, WindowedDataset};
use crate::models::{Architecture, HistoricalAverage, LassoEnsemble, LassoOptions, ModelKind, SlotKind, TrainedModel};

/// A fitted model with its training history.
#[derive(Clone, Debug)]
pub struct Fit {
    pub model: TrainedModel,
    /// One report per SGD run: one for graph models, one per station for the MLP.
    pub reports: Vec<TrainReport>,
    /// Original units, over all stations.
    pub val_rmse: f64,
}

/// Fits any model family: SGD for neural kinds, closed form for HA and LASSO.
pub fn fit_model(
    arch: &Architecture,
    filter: Option<&GraphFilter>,
    train_data: &WindowedDataset,
    validation: &WindowedDataset,
    scaler: &Scaler,
    cfg: &TrainConfig,
) -> Result<Fit> {
    let (model, reports) = match arch.kind {
        ModelKind::Ha => {
            let kind = if arch.weekly {
                SlotKind::HourOfWeek
            } else {
                SlotKind::HourOfDay
            };
            (
                TrainedModel::Ha(HistoricalAverage::fit_hours(train_data, kind)?),
                Vec::new(),
            )
        }
        ModelKind::Lasso => (
            TrainedModel::Lasso(LassoEnsemble::fit(train_data, arch.lambda, LassoOptions::default())?),
            Vec::new(),
        ),
        _ => {
            let mut model = TrainedModel::init(arch, filter, cfg.seed)?;
            let reports = match &mut model {
                TrainedModel::Gcnn(m) => vec![train(m, train_data, validation, scaler, cfg)?],
                TrainedModel::Recurrent(m) => vec![train(m, train_data, validation, scaler, cfg)?],
                TrainedModel::Mlp(e) => e
                    .models
                    .par_iter_mut()
                    .map(|m| {
                        let station_cfg = TrainConfig {
                            seed: derive_seed(cfg.seed, m.station()),
                            ..*cfg
                        };
                        train(m, train_data, validation, scaler, &station_cfg)
                    })
                    .collect::<Result<_>>()?,
                _ => unreachable!(),
            };
            (model, reports)
        }
    };
    let pred = model.predict_raw(validation, scaler)?;
    let val_rmse = evaluate_dataset(&pred, validation)?.rmse;
    Ok(Fit {
        model,
        reports,
        val_rmse,
    })
}
