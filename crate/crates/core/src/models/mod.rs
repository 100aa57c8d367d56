//! Forecasting models built on the autodiff tape, plus the closed-form baselines.

mod baselines;
mod gcnn;
mod init;
mod mlp;
mod recurrent;
mod trained;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

pub use baselines::{lasso_fit, HistoricalAverage, LassoEnsemble, LassoFit, LassoOptions, SlotKind};
pub use gcnn::{FilterSource, GcnnReg, GcnnRegConfig};
pub use init::{glorot_limit, glorot_uniform, model_rng};
pub use mlp::{MlpEnsemble, StationMlp};
pub use recurrent::{lstm_cell_step, GcnnRec, GcnnRecConfig, LstmCellParams};
pub use trained::{Architecture, TrainedModel};

use crate::autodiff::{Matrix, ParamStore, Tape, Var};
use crate::error::{Error, Result};
use crate::graph::MatrixKind;
use crate::ingest::WindowedDataset;

/// A model trained by gradient descent on windowed samples.
pub trait Forecaster {
    fn params(&self) -> &ParamStore;
    fn params_mut(&mut self) -> &mut ParamStore;

    /// Series rows this model predicts, given the dataset's station count.
    fn output_stations(&self, n: usize) -> Range<usize> {
        0..n
    }

    /// Normalized predictions for `batch`, one column per sample.
    fn forward(&self, tape: &mut Tape, data: &WindowedDataset, batch: &[usize]) -> Result<Var>;
}

/// Normalized targets for `batch` over `stations`, one column per sample.
pub fn batch_targets(data: &WindowedDataset, stations: Range<usize>, batch: &[usize]) -> Matrix {
    let rows = stations.len();
    let mut m = Matrix::zeros(rows, batch.len());
    for (b, &k) in batch.iter().enumerate() {
        let t = data.target_hour(k);
        for (r, i) in stations.clone().enumerate() {
            m[(r, b)] = data.normalized_series()[(i, t)];
        }
    }
    m
}

/// Normalized predictions for every sample, evaluated in chunks.
pub fn predict_normalized<F: Forecaster + ?Sized>(model: &F, data: &WindowedDataset) -> Result<Matrix> {
    const CHUNK: usize = 256;
    let rows = model.output_stations(data.n_stations()).len();
    let mut out = Matrix::zeros(rows, data.len());
    let all: Vec<usize> = (0..data.len()).collect();
    for chunk in all.chunks(CHUNK) {
        let mut tape = Tape::new();
        let v = model.forward(&mut tape, data, chunk)?;
        let p = tape.value(v);
        for (b, &k) in chunk.iter().enumerate() {
            for r in 0..rows {
                out[(r, k)] = p[(r, b)];
            }
        }
    }
    Ok(out)
}

/// Model families selectable from a run configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    GcnnSd,
    GcnnDe,
    GcnnAtd,
    GcnnDc,
    GcnnRegDdgf,
    GcnnRecDdgf,
    Ha,
    Lasso,
    Mlp,
    Lstm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 10] = [
        ModelKind::GcnnSd,
        ModelKind::GcnnDe,
        ModelKind::GcnnAtd,
        ModelKind::GcnnDc,
        ModelKind::GcnnRegDdgf,
        ModelKind::GcnnRecDdgf,
        ModelKind::Ha,
        ModelKind::Lasso,
        ModelKind::Mlp,
        ModelKind::Lstm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::GcnnSd => "gcnn-sd",
            ModelKind::GcnnDe => "gcnn-de",
            ModelKind::GcnnAtd => "gcnn-atd",
            ModelKind::GcnnDc => "gcnn-dc",
            ModelKind::GcnnRegDdgf => "gcnn-reg-ddgf",
            ModelKind::GcnnRecDdgf => "gcnn-rec-ddgf",
            ModelKind::Ha => "ha",
            ModelKind::Lasso => "lasso",
            ModelKind::Mlp => "mlp",
            ModelKind::Lstm => "lstm",
        }
    }

    /// The pairwise matrix behind a fixed-filter GCNN.
    pub fn graph_kind(self) -> Option<MatrixKind> {
        match self {
            ModelKind::GcnnSd => Some(MatrixKind::SpatialDistance),
            ModelKind::GcnnDe => Some(MatrixKind::Demand),
            ModelKind::GcnnAtd => Some(MatrixKind::AverageTripDuration),
            ModelKind::GcnnDc => Some(MatrixKind::DemandCorrelation),
            _ => None,
        }
    }

    /// Trained by SGD rather than in closed form.
    pub fn is_neural(self) -> bool {
        !matches!(self, ModelKind::Ha | ModelKind::Lasso)
    }

    pub fn is_recurrent(self) -> bool {
        matches!(self, ModelKind::GcnnRecDdgf | ModelKind::Lstm)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::Usage(format!(
                "unknown model kind `{s}` (expected one of {})",
                ModelKind::ALL.map(|k| k.name()).join(", ")
            ))
        })
    }
}
