use std::ops::Range;

use crate::autodiff::{Matrix, ParamId, ParamStore, Tape, Var};
use crate::error::{Error, Result};
use crate::ingest::WindowedDataset;
use crate::models::init::{glorot_uniform, model_rng};
use crate::models::Forecaster;

/// Feedforward network over one station's own window, with biases.
#[derive(Clone, Debug)]
pub struct StationMlp {
    station: usize,
    store: ParamStore,
    layers: Vec<(ParamId, ParamId)>,
    window: usize,
}

impl StationMlp {
    /// `hidden` lists the hidden widths; zero entries are dropped.
    pub fn new(station: usize, window: usize, hidden: &[usize], seed: u64) -> Result<Self> {
        if window == 0 {
            return Err(Error::Validation("MLP window must be at least 1".into()));
        }
        let mut widths = vec![window];
        widths.extend(hidden.iter().copied().filter(|&h| h > 0));
        widths.push(1);
        let mut rng = model_rng(seed);
        let mut store = ParamStore::new();
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(l, w)| {
                let wid = store.add(format!("w{}", l + 1), glorot_uniform(w[1], w[0], &mut rng), true);
                let bid = store.add(format!("b{}", l + 1), Matrix::zeros(w[1], 1), true);
                (wid, bid)
            })
            .collect();
        Ok(Self {
            station,
            store,
            layers,
            window,
        })
    }

    pub fn station(&self) -> usize {
        self.station
    }

    pub fn layer_ids(&self) -> &[(ParamId, ParamId)] {
        &self.layers
    }

    /// `x` is `C⁰ × B`, one sample per column; returns `1 × B`.
    pub fn forward_columns(&self, tape: &mut Tape, x: &Matrix) -> Result<Var> {
        if x.rows() != self.window {
            return Err(Error::dim("mlp_forward", x.shape(), (self.window, x.cols())));
        }
        let ones = tape.constant(Matrix::filled(1, x.cols(), 1.0));
        let mut h = tape.constant(x.clone());
        for (l, &(w, b)) in self.layers.iter().enumerate() {
            let wv = tape.param(&self.store, w);
            let bv = tape.param(&self.store, b);
            let z = tape.matmul(wv, h)?;
            let bb = tape.matmul(bv, ones)?;
            h = tape.add(z, bb)?;
            if l + 1 < self.layers.len() {
                h = tape.relu(h);
            }
        }
        Ok(h)
    }
}

impl Forecaster for StationMlp {
    fn params(&self) -> &ParamStore {
        &self.store
    }

    fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn output_stations(&self, _n: usize) -> Range<usize> {
        self.station..self.station + 1
    }

    fn forward(&self, tape: &mut Tape, data: &WindowedDataset, batch: &[usize]) -> Result<Var> {
        if self.station >= data.n_stations() || data.window() != self.window {
            return Err(Error::dim(
                "mlp_forward",
                (data.n_stations(), data.window()),
                (self.station + 1, self.window),
            ));
        }
        let x = Matrix::from_fn(self.window, batch.len(), |j, b| {
            data.input_value(batch[b], self.station, j)
        });
        self.forward_columns(tape, &x)
    }
}

/// One independent [`StationMlp`] per station.
#[derive(Clone, Debug)]
pub struct MlpEnsemble {
    pub models: Vec<StationMlp>,
}

impl MlpEnsemble {
    /// Station `i` is seeded with `seed + i`.
    pub fn new(n: usize, window: usize, hidden: &[usize], seed: u64) -> Result<Self> {
        let models = (0..n)
            .map(|i| StationMlp::new(i, window, hidden, seed.wrapping_add(i as u64)))
            .collect::<Result<_>>()?;
        Ok(Self { models })
    }

    pub fn n(&self) -> usize {
        self.models.len()
    }

    /// Normalized N×M predictions for every sample.
    pub fn predict_normalized(&self, data: &WindowedDataset) -> Result<Matrix> {
        let mut out = Matrix::zeros(self.n(), data.len());
        for m in &self.models {
            let p = crate::models::predict_normalized(m, data)?;
            out.row_mut(m.station).copy_from_slice(p.row(0));
        }
        Ok(out)
    }
}
