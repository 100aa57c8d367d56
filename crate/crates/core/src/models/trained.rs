use std::collections::BTreeMap;

use crate::autodiff::{Matrix, ParamStore};
use crate::error::{Error, Result};
use crate::graph::GraphFilter;
use crate::ingest::{Scaler, WindowedDataset};
use crate::models::{
    predict_normalized, FilterSource, Forecaster, GcnnRec, GcnnRecConfig, GcnnReg, GcnnRegConfig, HistoricalAverage,
    LassoEnsemble, MlpEnsemble, ModelKind, SlotKind,
};

/// Everything needed to rebuild an untrained model of the right shape.
#[derive(Clone, Debug, PartialEq)]
pub struct Architecture {
    pub kind: ModelKind,
    pub n: usize,
    /// C⁰ for feedforward models, T for recurrent ones.
    pub window: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    /// LSTM units d.
    pub units: usize,
    pub weekly: bool,
    pub lambda: f64,
}

impl Architecture {
    pub fn to_text(&self) -> String {
        format!(
            "kind = {}\nn = {}\nwindow = {}\nhidden1 = {}\nhidden2 = {}\nunits = {}\nweekly = {}\nlambda = {:?}\n",
            self.kind, self.n, self.window, self.hidden1, self.hidden2, self.units, self.weekly, self.lambda
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Container(format!("bad architecture line `{line}`")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        fn get<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T> {
            map.get(key)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Container(format!("architecture is missing `{key}`")))
        }
        Ok(Self {
            kind: map
                .get("kind")
                .ok_or_else(|| Error::Container("architecture is missing `kind`".into()))?
                .parse()
                .map_err(|e: Error| Error::Container(e.to_string()))?,
            n: get(&map, "n")?,
            window: get(&map, "window")?,
            hidden1: get(&map, "hidden1")?,
            hidden2: get(&map, "hidden2")?,
            units: get(&map, "units")?,
            weekly: get(&map, "weekly")?,
            lambda: get(&map, "lambda")?,
        })
    }

    fn slot_kind(&self) -> SlotKind {
        if self.weekly {
            SlotKind::HourOfWeek
        } else {
            SlotKind::HourOfDay
        }
    }
}

/// A model of any family, trained or freshly initialized.
#[derive(Clone, Debug)]
pub enum TrainedModel {
    Gcnn(GcnnReg),
    Recurrent(GcnnRec),
    Mlp(MlpEnsemble),
    Ha(HistoricalAverage),
    Lasso(LassoEnsemble),
}

impl TrainedModel {
    /// Fresh parameters for a neural family. Fixed-filter GCNNs need `filter`.
    pub fn init(arch: &Architecture, filter: Option<&GraphFilter>, seed: u64) -> Result<Self> {
        let hidden_layers = [arch.hidden1, arch.hidden2];
        Ok(match arch.kind {
            ModelKind::GcnnRegDdgf => TrainedModel::Gcnn(GcnnReg::new(&gcnn_config(arch, FilterSource::Ddgf), seed)?),
            k if k.graph_kind().is_some() => {
                let f = filter.ok_or_else(|| Error::Usage(format!("model kind {k} needs a graph filter")))?;
                TrainedModel::Gcnn(GcnnReg::new(&gcnn_config(arch, FilterSource::Fixed(f.clone())), seed)?)
            }
            ModelKind::GcnnRecDdgf | ModelKind::Lstm => TrainedModel::Recurrent(GcnnRec::new(
                GcnnRecConfig {
                    n: arch.n,
                    steps: arch.window,
                    hidden: arch.units,
                    ddgf: arch.kind == ModelKind::GcnnRecDdgf,
                },
                seed,
            )?),
            ModelKind::Mlp => TrainedModel::Mlp(MlpEnsemble::new(arch.n, arch.window, &hidden_layers, seed)?),
            ModelKind::Ha | ModelKind::Lasso => {
                return Err(Error::Contract(format!("{} is fitted in closed form", arch.kind)))
            }
            _ => unreachable!(),
        })
    }

    /// Named tensors in a stable order.
    pub fn tensors(&self) -> Vec<(String, Matrix)> {
        match self {
            TrainedModel::Gcnn(m) => m.params().named_values(),
            TrainedModel::Recurrent(m) => m.params().named_values(),
            TrainedModel::Mlp(e) => e
                .models
                .iter()
                .flat_map(|m| {
                    let s = m.station();
                    m.params()
                        .named_values()
                        .into_iter()
                        .map(move |(n, v)| (format!("s{s}/{n}"), v))
                })
                .collect(),
            TrainedModel::Ha(h) => vec![("means".into(), h.means.clone())],
            TrainedModel::Lasso(l) => vec![("coefficients".into(), l.to_matrix())],
        }
    }

    /// Rebuilds a model from [`TrainedModel::tensors`] output.
    pub fn from_tensors(arch: &Architecture, tensors: &[(String, Matrix)]) -> Result<Self> {
        let find = |name: &str| {
            tensors
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, m)| m.clone())
                .ok_or_else(|| Error::Container(format!("checkpoint has no tensor `{name}`")))
        };
        let load = |store: &mut ParamStore, named: &[(String, Matrix)]| {
            store.load_named(named).map_err(|e| Error::Container(e.to_string()))
        };
        let mut model = match arch.kind {
            ModelKind::Ha => {
                return Ok(TrainedModel::Ha(HistoricalAverage {
                    kind: arch.slot_kind(),
                    means: find("means")?,
                }))
            }
            ModelKind::Lasso => {
                return Ok(TrainedModel::Lasso(LassoEnsemble::from_matrix(
                    &find("coefficients")?,
                    arch.lambda,
                )))
            }
            k if k.graph_kind().is_some() => Self::init(arch, Some(&GraphFilter::identity(arch.n)), 0)?,
            _ => Self::init(arch, None, 0)?,
        };
        match &mut model {
            TrainedModel::Gcnn(m) => load(m.params_mut(), tensors)?,
            TrainedModel::Recurrent(m) => load(m.params_mut(), tensors)?,
            TrainedModel::Mlp(e) => {
                for m in &mut e.models {
                    let prefix = format!("s{}/", m.station());
                    let own: Vec<(String, Matrix)> = tensors
                        .iter()
                        .filter_map(|(n, v)| n.strip_prefix(&prefix).map(|r| (r.to_string(), v.clone())))
                        .collect();
                    load(m.params_mut(), &own)?;
                }
            }
            _ => unreachable!(),
        }
        Ok(model)
    }

    /// N×M predictions in original units.
    pub fn predict_raw(&self, data: &WindowedDataset, scaler: &Scaler) -> Result<Matrix> {
        let normalized = match self {
            TrainedModel::Ha(h) => return Ok(h.predict_dataset(data)),
            TrainedModel::Gcnn(m) => predict_normalized(m, data)?,
            TrainedModel::Recurrent(m) => predict_normalized(m, data)?,
            TrainedModel::Mlp(e) => e.predict_normalized(data)?,
            TrainedModel::Lasso(l) => l.predict_normalized(data)?,
        };
        scaler.inverse_transform(&normalized)
    }

    /// The symmetric learned filter, for DDGF models.
    pub fn learned_filter(&self) -> Option<Matrix> {
        match self {
            TrainedModel::Gcnn(m) if m.is_ddgf() => Some(m.filter_matrix()),
            TrainedModel::Recurrent(m) => m.filter_matrix(),
            _ => None,
        }
    }
}

fn gcnn_config(arch: &Architecture, filter: FilterSource) -> GcnnRegConfig {
    GcnnRegConfig {
        n: arch.n,
        window: arch.window,
        hidden1: arch.hidden1,
        hidden2: arch.hidden2,
        filter,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn architecture_text_round_trip() {
        let a = Architecture {
            kind: ModelKind::GcnnRecDdgf,
            n: 4,
            window: 3,
            hidden1: 0,
            hidden2: 0,
            units: 5,
            weekly: false,
            lambda: 0.1,
        };
        assert_eq!(Architecture::from_text(&a.to_text()).unwrap(), a);
    }
}
