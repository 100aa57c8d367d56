//! Train GCNN_reg-DDGF on synthetic planted-group demand and score it on the
//! test split.
//!
//! ```text
//! cargo run --release --example train_forecaster -- [seed]
//! ```

use stationcast::ingest::{prepare_windows, split};
use stationcast::models::{Architecture, ModelKind};
use stationcast::synthetic::{planted_groups, SyntheticSpec};
use stationcast::training::{evaluate_dataset, fit_model, TrainConfig};

fn main() -> stationcast::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let demand = planted_groups(&SyntheticSpec {
        hours: 1500,
        seed,
        ..Default::default()
    })?;
    let split = split(&demand.series, 1200, 150, 150)?;
    let window = 12;
    let data = prepare_windows(&demand.series, &split, window)?;
    let arch = Architecture {
        kind: ModelKind::GcnnRegDdgf,
        n: demand.series.n_stations(),
        window,
        hidden1: 32,
        hidden2: 0,
        units: 0,
        weekly: false,
        lambda: 0.0,
    };
    let cfg = TrainConfig {
        learning_rate: 0.05,
        batch_size: 32,
        patience: 10,
        max_epochs: 100,
        seed,
    };
    let fit = fit_model(&arch, None, &data.train, &data.validation, &data.scaler, &cfg)?;
    let report = &fit.reports[0];
    println!(
        "{} epochs ({:?}), best at epoch {} with validation RMSE {:.4}",
        report.epochs.len(),
        report.stop,
        report.best_epoch,
        fit.val_rmse
    );
    let pred = fit.model.predict_raw(&data.test, &data.scaler)?;
    let m = evaluate_dataset(&pred, &data.test)?;
    println!(
        "test RMSE {:.4}, daytime RMSE {:.4}, MAE {:.4}, R² {:.4}",
        m.rmse, m.rmse_daytime, m.mae, m.r_squared
    );
    Ok(())
}
