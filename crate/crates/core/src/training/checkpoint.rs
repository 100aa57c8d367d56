use crate::autodiff::Matrix;
use crate::container::Container;
use crate::error::{Error, Result};
use crate::graph::StationMeta;
use crate::ingest::Scaler;
use crate::models::{Architecture, TrainedModel};

const TENSOR_PREFIX: &str = "tensor/";

/// A model with everything needed to predict in original units.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub architecture: Architecture,
    pub model: TrainedModel,
    pub scaler: Scaler,
    pub stations: Vec<StationMeta>,
    pub seed: u64,
    /// Canonical run configuration text.
    pub config: String,
}

pub fn save_checkpoint(ck: &Checkpoint) -> Container {
    let mut c = Container::new();
    c.push_text("config", ck.config.clone())
        .push_text("architecture", ck.architecture.to_text())
        .push_text("seed", ck.seed.to_string())
        .push_stations("stations", ck.stations.clone());
    let n = ck.scaler.n().max(1);
    let scaler = Matrix::from_fn(2, n, |r, i| {
        let v = if r == 0 { &ck.scaler.min } else { &ck.scaler.max };
        v.get(i).copied().unwrap_or(0.0)
    });
    c.push_matrix("scaler", scaler);
    for (name, m) in ck.model.tensors() {
        c.push_matrix(format!("{TENSOR_PREFIX}{name}"), m);
    }
    c
}

pub fn load_checkpoint(c: &Container) -> Result<Checkpoint> {
    let architecture = Architecture::from_text(c.text("architecture")?)?;
    let seed = c
        .text("seed")?
        .trim()
        .parse()
        .map_err(|_| Error::Container("checkpoint seed is not an integer".into()))?;
    let stations = c.stations("stations")?.to_vec();
    let s = c.matrix("scaler")?;
    if s.rows() != 2 || s.cols() != stations.len() {
        return Err(Error::Container(format!(
            "scaler is {:?} but the checkpoint lists {} stations",
            s.shape(),
            stations.len()
        )));
    }
    let scaler = Scaler {
        min: s.row(0).to_vec(),
        max: s.row(1).to_vec(),
    };
    let tensors = c.matrices_with_prefix(TENSOR_PREFIX);
    let model = TrainedModel::from_tensors(&architecture, &tensors)?;
    Ok(Checkpoint {
        architecture,
        model,
        scaler,
        stations,
        seed,
        config: c.text("config")?.to_string(),
    })
}
