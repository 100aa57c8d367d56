//! RMSE, daytime RMSE, MAE and R² against direct formulas.

mod common;

use common::oracles::direct_metrics;
use common::rng;
use proptest::prelude::*;
use rand::Rng;
use stationcast::autodiff::Matrix;
use stationcast::training::{evaluate, evaluate_dataset};

fn instance(rows: usize, cols: usize, seed: u64) -> (Matrix, Matrix, Vec<u32>) {
    let mut r = rng(seed);
    let target = Matrix::from_fn(rows, cols, |_, _| r.gen_range(0..20) as f64);
    let pred = Matrix::from_fn(rows, cols, |_, _| r.gen_range(-2.0..22.0));
    let hours = (0..rows).map(|k| ((k + r.gen_range(0..24)) % 24) as u32).collect();
    (pred, target, hours)
}

#[test]
fn random_instances_match_direct_formulas() {
    let mut r = rng(60);
    for seed in 0..200 {
        let (pred, target, mut hours) = instance(r.gen_range(2..60), r.gen_range(1..12), seed);
        hours[0] = 12;
        let m = evaluate(&pred, &target, &hours).unwrap();
        let d = direct_metrics(&pred, &target, &hours);
        assert!((m.rmse - d.rmse).abs() < 1e-12);
        assert!((m.rmse_daytime - d.rmse_daytime).abs() < 1e-12);
        assert!((m.mae - d.mae).abs() < 1e-12);
        assert!((m.r_squared - d.r_squared).abs() < 1e-12);
    }
}

#[test]
fn perfect_predictions() {
    let (_, target, hours) = instance(30, 5, 61);
    let m = evaluate(&target, &target, &hours).unwrap();
    assert_eq!((m.rmse, m.mae, m.r_squared), (0.0, 0.0, 1.0));
}

#[test]
fn grand_mean_predictor_has_zero_r_squared() {
    let (_, target, hours) = instance(30, 5, 62);
    let mean = target.sum() / target.len() as f64;
    let m = evaluate(&Matrix::filled(30, 5, mean), &target, &hours).unwrap();
    assert!(m.r_squared.abs() < 1e-12);
}

#[test]
fn daytime_is_seven_through_the_eight_pm_hour() {
    let target = Matrix::from_rows(&[[0.0], [0.0], [0.0], [0.0]]);
    let pred = Matrix::from_rows(&[[1.0], [2.0], [3.0], [4.0]]);
    let m = evaluate(&pred, &target, &[6, 7, 20, 21]).unwrap();
    assert!((m.rmse_daytime - (6.5f64).sqrt()).abs() < 1e-15);
}

#[test]
fn constant_targets_give_nan_r_squared() {
    let target = Matrix::filled(4, 2, 3.0);
    let m = evaluate(&Matrix::filled(4, 2, 2.0), &target, &[0, 1, 2, 3]).unwrap();
    assert!(m.r_squared.is_nan());
    assert_eq!(m.rmse, 1.0);
}

#[test]
fn shape_mismatch_is_rejected() {
    let a = Matrix::zeros(3, 2);
    assert!(evaluate(&a, &Matrix::zeros(2, 3), &[0, 1, 2]).is_err());
    assert!(evaluate(&a, &a, &[0, 1]).is_err());
}

#[test]
fn dataset_targets_follow_the_window() {
    let data = common::toy_dataset(3, 20, 4, 63);
    let raw = data.raw_series().clone();
    let pred = Matrix::from_fn(3, data.len(), |i, k| raw[(i, k + 4)]);
    let m = evaluate_dataset(&pred, &data).unwrap();
    assert_eq!(m.rmse, 0.0);
}

proptest! {
    #[test]
    fn rmse_bounds(rows in 1usize..30, cols in 1usize..6, seed: u64) {
        let (pred, target, hours) = instance(rows, cols, seed);
        let m = evaluate(&pred, &target, &hours).unwrap();
        // MAE ≤ RMSE ≤ max |error|
        let worst = pred.sub(&target).unwrap().max_abs();
        prop_assert!(m.mae <= m.rmse + 1e-12);
        prop_assert!(m.rmse <= worst + 1e-12);
        prop_assert!(m.r_squared.is_nan() || m.r_squared <= 1.0);
    }
}
