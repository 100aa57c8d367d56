//! Search hidden width and learning rate for GCNN_reg-DDGF, one derived seed
//! per grid point.
//!
//! ```text
//! cargo run --release --example grid_search -- [jobs]
//! ```

use stationcast::ingest::{prepare_windows, split};
use stationcast::models::{Architecture, ModelKind};
use stationcast::synthetic::{planted_groups, SyntheticSpec};
use stationcast::training::{fit_model, grid_search, GridRange, GridSpec, TrainConfig};

fn main() -> stationcast::Result<()> {
    let jobs: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let demand = planted_groups(&SyntheticSpec {
        hours: 800,
        ..Default::default()
    })?;
    let split = split(&demand.series, 600, 100, 100)?;
    let data = prepare_windows(&demand.series, &split, 6)?;

    let mut spec = GridSpec::new();
    spec.set("c1", "{8:8:24}".parse::<GridRange>()?)?;
    spec.set("alpha", "{0.02:0.03:0.08}".parse::<GridRange>()?)?;
    let points = spec.expand();
    println!("{} grid points", points.len());

    let outcome = grid_search(&points, None, 11, jobs, |_, point, seed| {
        let get = |name: &str| point.iter().find(|(k, _)| k == name).map(|(_, v)| *v).unwrap();
        let arch = Architecture {
            kind: ModelKind::GcnnRegDdgf,
            n: demand.series.n_stations(),
            window: 6,
            hidden1: get("c1") as usize,
            hidden2: 0,
            units: 0,
            weekly: false,
            lambda: 0.0,
        };
        let cfg = TrainConfig {
            learning_rate: get("alpha"),
            batch_size: 32,
            patience: 5,
            max_epochs: 40,
            seed,
        };
        let fit = fit_model(&arch, None, &data.train, &data.validation, &data.scaler, &cfg)?;
        Ok((fit.val_rmse, ()))
    })?;
    for run in &outcome.ranked {
        let point: Vec<String> = points[run.index].iter().map(|(k, v)| format!("{k}={v}")).collect();
        match &run.outcome {
            Ok((rmse, _)) => println!(
                "  {:<20} seed {:>20}  validation RMSE {rmse:.4}",
                point.join(" "),
                run.seed
            ),
            Err(e) => println!("  {:<20} failed: {e}", point.join(" ")),
        }
    }
    Ok(())
}
