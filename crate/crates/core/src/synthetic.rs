//! Synthetic station demand with planted groups.
//!
//! Each group shares one latent hourly intensity: a daily cycle plus a few
//! slow damped oscillators driven by Gaussian noise. A station's counts are
//! Poisson draws around its own scale times its group's intensity, so
//! stations in a group co-move and stations in different groups do not.

use std::f64::consts::PI;

use chrono::NaiveDateTime;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::autodiff::Matrix;
use crate::error::{Error, Result};
use crate::graph::StationMeta;
use crate::ingest::{parse_timestamp, prepare_windows, split, DemandSeries};
use crate::models::{model_rng, Architecture, ModelKind};
use crate::training::{derive_seed, evaluate_dataset, fit_model, TrainConfig};

#[derive(Clone, Debug)]
pub struct SyntheticSpec {
    pub groups: usize,
    pub per_group: usize,
    pub hours: usize,
    /// Mean hourly count of a station at unit intensity.
    pub base_rate: f64,
    /// Periods in hours of the group oscillators.
    pub periods: Vec<f64>,
    /// Pole radius of each oscillator; closer to 1 means longer memory.
    pub damping: f64,
    /// Scale of the oscillator sum relative to the daily cycle.
    pub amplitude: f64,
    pub seed: u64,
    pub t0: NaiveDateTime,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            groups: 4,
            per_group: 5,
            hours: 3000,
            base_rate: 25.0,
            periods: vec![4.0, 6.0, 9.0, 14.0],
            damping: 0.99,
            amplitude: 0.5,
            seed: 0,
            t0: parse_timestamp("2016-01-04 00:00:00").unwrap(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticDemand {
    pub series: DemandSeries,
    /// Planted group of each station.
    pub groups: Vec<usize>,
    /// Latent intensity, groups × hours.
    pub latent: Vec<Vec<f64>>,
}

/// Second-order autoregression with complex poles `damping·e^{±2πi/period}`,
/// scaled to unit sample standard deviation.
fn oscillator(rng: &mut impl Rng, hours: usize, period: f64, damping: f64) -> Vec<f64> {
    let a1 = 2.0 * damping * (2.0 * PI / period).cos();
    let a2 = -damping * damping;
    let noise = Normal::new(0.0, 1.0).unwrap();
    let burn = 500;
    let mut x = vec![0.0; hours + burn];
    for t in 2..x.len() {
        x[t] = a1 * x[t - 1] + a2 * x[t - 2] + noise.sample(rng);
    }
    let x = x.split_off(burn);
    let mean = x.iter().sum::<f64>() / hours as f64;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / hours as f64).sqrt();
    x.into_iter().map(|v| (v - mean) / sd.max(1e-12)).collect()
}

pub fn planted_groups(spec: &SyntheticSpec) -> Result<SyntheticDemand> {
    if spec.groups == 0 || spec.per_group == 0 || spec.hours == 0 {
        return Err(Error::Validation(
            "synthetic demand needs groups, stations and hours".into(),
        ));
    }
    if !(spec.base_rate > 0.0) {
        return Err(Error::Validation("synthetic base rate must be positive".into()));
    }
    let mut rng = model_rng(spec.seed);
    let k = spec.periods.len().max(1) as f64;
    let latent: Vec<Vec<f64>> = (0..spec.groups)
        .map(|g| {
            let phase = 2.0 * PI * g as f64 / spec.groups as f64;
            let osc: Vec<Vec<f64>> = spec
                .periods
                .iter()
                .map(|&p| oscillator(&mut rng, spec.hours, p, spec.damping))
                .collect();
            (0..spec.hours)
                .map(|t| {
                    let daily = 1.0 + 0.5 * (2.0 * PI * t as f64 / 24.0 + phase).sin();
                    let wave: f64 = osc.iter().map(|o| o[t]).sum::<f64>() / k.sqrt();
                    (daily + spec.amplitude * wave).max(0.05)
                })
                .collect()
        })
        .collect();

    let n = spec.groups * spec.per_group;
    let mut stations = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    let mut scales = Vec::with_capacity(n);
    for g in 0..spec.groups {
        // groups sit on a ring of neighbourhoods about two miles apart
        let angle = 2.0 * PI * g as f64 / spec.groups as f64;
        let (clat, clon) = (40.75 + 0.03 * angle.sin(), -73.98 + 0.04 * angle.cos());
        for s in 0..spec.per_group {
            let i = stations.len();
            stations.push(StationMeta::new(
                (i + 1).to_string(),
                format!("Group {g} Station {s}"),
                clat + rng.gen_range(-0.004..0.004),
                clon + rng.gen_range(-0.005..0.005),
            ));
            groups.push(g);
            scales.push(spec.base_rate * rng.gen_range(0.6..1.4));
        }
    }

    let mut counts = Vec::with_capacity(n * spec.hours);
    for i in 0..n {
        for t in 0..spec.hours {
            let rate = scales[i] * latent[groups[i]][t];
            let draw: f64 = Poisson::new(rate)
                .map_err(|e| Error::Validation(format!("Poisson rate {rate}: {e}")))?
                .sample(&mut rng);
            counts.push(draw as u32);
        }
    }
    Ok(SyntheticDemand {
        series: DemandSeries::new(stations, spec.t0, spec.hours, counts)?,
        groups,
        latent,
    })
}

/// Shared settings for comparing model families on planted-group demand.
#[derive(Clone, Debug)]
pub struct BenchmarkSettings {
    pub data: SyntheticSpec,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    /// Input window for the feedforward models.
    pub window: usize,
    /// Time steps for the recurrent models.
    pub steps: usize,
    pub hidden: usize,
    pub units: usize,
    pub train: TrainConfig,
    /// SGD settings for GCNN_rec-DDGF and the LSTM, shared by both.
    pub recurrent_train: TrainConfig,
}

impl Default for BenchmarkSettings {
    fn default() -> Self {
        Self {
            data: SyntheticSpec::default(),
            n_train: 2400,
            n_val: 300,
            n_test: 300,
            window: 12,
            steps: 12,
            hidden: 32,
            units: 32,
            train: TrainConfig {
                learning_rate: 0.05,
                batch_size: 32,
                patience: 10,
                max_epochs: 150,
                seed: 0,
            },
            recurrent_train: TrainConfig {
                learning_rate: 0.5,
                batch_size: 32,
                patience: 10,
                max_epochs: 60,
                seed: 0,
            },
        }
    }
}

/// Test-split RMSE per model family, with the learned filters.
#[derive(Clone, Debug)]
pub struct BenchmarkResult {
    pub demand: SyntheticDemand,
    pub test_rmse: Vec<(ModelKind, f64)>,
    /// Wall time of each fit.
    pub seconds: Vec<(ModelKind, f64)>,
    pub reg_filter: Matrix,
    pub rec_filter: Matrix,
}

impl BenchmarkResult {
    pub fn rmse(&self, kind: ModelKind) -> f64 {
        self.test_rmse
            .iter()
            .find(|(k, _)| *k == kind)
            .map(|(_, v)| *v)
            .unwrap_or(f64::NAN)
    }
}

/// Fits HA, per-station MLP, GCNN_reg-DDGF, GCNN_rec-DDGF and the plain LSTM
/// and reports their test RMSE. The feedforward models share one set of SGD
/// settings and the two recurrent models share another. `seed` drives both
/// the data and the initial weights.
pub fn run_benchmark(settings: &BenchmarkSettings, seed: u64) -> Result<BenchmarkResult> {
    let demand = planted_groups(&SyntheticSpec {
        seed,
        ..settings.data.clone()
    })?;
    let split = split(&demand.series, settings.n_train, settings.n_val, settings.n_test)?;
    let n = demand.series.n_stations();
    let mut test_rmse = Vec::new();
    let mut seconds = Vec::new();
    let mut reg_filter = None;
    let mut rec_filter = None;
    for kind in [
        ModelKind::Ha,
        ModelKind::Mlp,
        ModelKind::GcnnRegDdgf,
        ModelKind::GcnnRecDdgf,
        ModelKind::Lstm,
    ] {
        let window = if kind.is_recurrent() {
            settings.steps
        } else {
            settings.window
        };
        let arch = Architecture {
            kind,
            n,
            window,
            hidden1: settings.hidden,
            hidden2: 0,
            units: settings.units,
            weekly: false,
            lambda: 0.0,
        };
        let data = prepare_windows(&demand.series, &split, window)?;
        let base = if kind.is_recurrent() {
            settings.recurrent_train
        } else {
            settings.train
        };
        let cfg = TrainConfig {
            seed: derive_seed(seed, 1),
            ..base
        };
        let started = std::time::Instant::now();
        let fit = fit_model(&arch, None, &data.train, &data.validation, &data.scaler, &cfg)?;
        let pred = fit.model.predict_raw(&data.test, &data.scaler)?;
        test_rmse.push((kind, evaluate_dataset(&pred, &data.test)?.rmse));
        seconds.push((kind, started.elapsed().as_secs_f64()));
        match kind {
            ModelKind::GcnnRegDdgf => reg_filter = fit.model.learned_filter(),
            ModelKind::GcnnRecDdgf => rec_filter = fit.model.learned_filter(),
            _ => {}
        }
    }
    Ok(BenchmarkResult {
        demand,
        test_rmse,
        seconds,
        reg_filter: reg_filter.expect("DDGF model has a filter"),
        rec_filter: rec_filter.expect("DDGF model has a filter"),
    })
}

/// Mean normalized weight of off-diagonal pairs inside and across groups,
/// after min-max normalization and thresholding at `tau`.
pub fn group_contrast(filter: &Matrix, groups: &[usize], tau: f64) -> (f64, f64) {
    let span = filter.max_value() - filter.min_value();
    let lo = filter.min_value();
    let (mut intra, mut ni, mut inter, mut nx) = (0.0, 0usize, 0.0, 0usize);
    for i in 0..filter.rows() {
        for j in 0..filter.cols() {
            if i == j {
                continue;
            }
            let w = if span > 0.0 { (filter[(i, j)] - lo) / span } else { 0.0 };
            let w = if w >= tau { w } else { 0.0 };
            if groups[i] == groups[j] {
                intra += w;
                ni += 1;
            } else {
                inter += w;
                nx += 1;
            }
        }
    }
    (intra / ni.max(1) as f64, inter / nx.max(1) as f64)
}
