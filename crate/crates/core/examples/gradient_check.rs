//! Compare analytic gradients of a small GCNN_rec-DDGF against central differences.
//!
//! ```text
//! cargo run --example gradient_check
//! ```

use std::sync::Arc;

use rand::Rng;
use stationcast::autodiff::gradcheck::check_gradients;
use stationcast::autodiff::{Matrix, ParamStore, Tape};
use stationcast::ingest::{parse_timestamp, WindowedDataset};
use stationcast::models::{batch_targets, model_rng, Forecaster, GcnnRec, GcnnRecConfig};

fn main() -> stationcast::Result<()> {
    let (n, steps, hidden) = (4, 3, 5);
    let mut rng = model_rng(1);
    let series = Arc::new(Matrix::from_fn(n, 12, |_, _| rng.gen_range(0.0..1.0)));
    let t0 = parse_timestamp("2016-01-04 00:00:00").unwrap();
    let data = WindowedDataset::new(series.clone(), series, t0, 0..12, steps)?;

    let model = GcnnRec::new(
        GcnnRecConfig {
            n,
            steps,
            hidden,
            ddgf: true,
        },
        7,
    )?;
    let batch: Vec<usize> = (0..data.len()).collect();
    let target = batch_targets(&data, 0..n, &batch);
    let mut store = model.params().clone();
    let mut scratch = model.clone();
    let report = check_gradients(
        &mut store,
        |tape: &mut Tape, store: &ParamStore| {
            *scratch.params_mut() = store.clone();
            let pred = scratch.forward(tape, &data, &batch)?;
            tape.mse_loss(pred, &target)
        },
        1e-5,
    )?;
    println!("checked {} entries", report.checked);
    println!(
        "worst relative error {:.2e} at {}[{}]: analytic {:.6e}, numeric {:.6e}",
        report.worst, report.worst_param, report.worst_entry, report.analytic, report.numeric
    );
    Ok(())
}
