use crate::autodiff::{symmetric_part, Matrix, ParamId, ParamStore, Tape, Var};
use crate::error::{Error, Result};
use crate::ingest::WindowedDataset;
use crate::models::init::{glorot_uniform, model_rng, near_identity};
use crate::models::Forecaster;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GcnnRecConfig {
    pub n: usize,
    /// Recurrent steps T, equal to the input window.
    pub steps: usize,
    /// Hidden units d per cell.
    pub hidden: usize,
    /// `false` gives the plain LSTM baseline with no graph convolution.
    pub ddgf: bool,
}

impl GcnnRecConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.steps == 0 || self.hidden == 0 {
            return Err(Error::Validation(format!(
                "recurrent model needs N, T and d of at least 1 (got {}, {}, {})",
                self.n, self.steps, self.hidden
            )));
        }
        Ok(())
    }
}

/// Gate parameters in the order input, forget, output, candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LstmCellParams {
    /// `d × n` input weights.
    pub w: [ParamId; 4],
    /// `d × d` recurrent weights.
    pub u: [ParamId; 4],
    /// `d × 1` biases.
    pub b: [ParamId; 4],
}

const GATES: [&str; 4] = ["i", "f", "o", "g"];

impl LstmCellParams {
    /// Glorot weights, zero biases except the forget gate at 1.
    pub fn init(store: &mut ParamStore, n: usize, d: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Self {
        let w = GATES.map(|g| store.add(format!("lstm/w_{g}"), glorot_uniform(d, n, rng), true));
        let u = GATES.map(|g| store.add(format!("lstm/u_{g}"), glorot_uniform(d, d, rng), true));
        let b = GATES.map(|g| {
            let v = if g == "f" { 1.0 } else { 0.0 };
            store.add(format!("lstm/b_{g}"), Matrix::filled(d, 1, v), true)
        });
        Self { w, u, b }
    }
}

/// One LSTM step on a batch laid out column-wise.
///
/// `x` is `n × B`, `h_prev` and `c_prev` are `d × B`, and `ones` is the
/// `1 × B` row used to broadcast biases. Returns `(h, c)`.
pub fn lstm_cell_step(
    tape: &mut Tape,
    store: &ParamStore,
    cell: &LstmCellParams,
    x: Var,
    h_prev: Var,
    c_prev: Var,
    ones: Var,
) -> Result<(Var, Var)> {
    let mut pre = [x; 4];
    for k in 0..4 {
        let w = tape.param(store, cell.w[k]);
        let u = tape.param(store, cell.u[k]);
        let b = tape.param(store, cell.b[k]);
        let wx = tape.matmul(w, x)?;
        let uh = tape.matmul(u, h_prev)?;
        let bb = tape.matmul(b, ones)?;
        let s = tape.add(wx, uh)?;
        pre[k] = tape.add(s, bb)?;
    }
    let i = tape.sigmoid(pre[0]);
    let f = tape.sigmoid(pre[1]);
    let o = tape.sigmoid(pre[2]);
    let g = tape.tanh(pre[3]);
    let carry = tape.hadamard(f, c_prev)?;
    let write = tape.hadamard(i, g)?;
    let c = tape.add(carry, write)?;
    let tc = tape.tanh(c);
    let h = tape.hadamard(o, tc)?;
    Ok((h, c))
}

/// Graph convolution feeding a shared LSTM chain, then a linear `d → N` map.
#[derive(Clone, Debug)]
pub struct GcnnRec {
    store: ParamStore,
    config: GcnnRecConfig,
    cell: LstmCellParams,
    out_w: ParamId,
    out_b: ParamId,
    ddgf: Option<ParamId>,
}

impl GcnnRec {
    /// Parameter draws happen in a fixed order with the DDGF last, so a model
    /// and its LSTM baseline from the same seed share every LSTM weight.
    pub fn new(config: GcnnRecConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let GcnnRecConfig { n, hidden: d, .. } = config;
        let mut rng = model_rng(seed);
        let mut store = ParamStore::new();
        let cell = LstmCellParams::init(&mut store, n, d, &mut rng);
        let out_w = store.add("out/w", glorot_uniform(n, d, &mut rng), true);
        let out_b = store.add("out/b", Matrix::zeros(n, 1), true);
        let ddgf = config.ddgf.then(|| store.add("ddgf", near_identity(n, &mut rng), true));
        Ok(Self {
            store,
            config,
            cell,
            out_w,
            out_b,
            ddgf,
        })
    }

    pub fn lstm_baseline(n: usize, steps: usize, hidden: usize, seed: u64) -> Result<Self> {
        Self::new(
            GcnnRecConfig {
                n,
                steps,
                hidden,
                ddgf: false,
            },
            seed,
        )
    }

    pub fn config(&self) -> GcnnRecConfig {
        self.config
    }

    pub fn cell(&self) -> LstmCellParams {
        self.cell
    }

    pub fn output_ids(&self) -> (ParamId, ParamId) {
        (self.out_w, self.out_b)
    }

    pub fn ddgf_id(&self) -> Option<ParamId> {
        self.ddgf
    }

    pub fn filter_matrix(&self) -> Option<Matrix> {
        self.ddgf
            .map(|p| symmetric_part(self.store.value(p)).expect("square DDGF"))
    }

    /// Prediction from `steps` explicit inputs, each `N × B`, oldest first.
    pub fn forward_steps(&self, tape: &mut Tape, inputs: &[Matrix]) -> Result<Var> {
        let GcnnRecConfig {
            n, steps, hidden: d, ..
        } = self.config;
        if inputs.len() != steps {
            return Err(Error::Validation(format!(
                "recurrent model expects {steps} steps, got {}",
                inputs.len()
            )));
        }
        let batch = inputs[0].cols();
        if let Some(bad) = inputs.iter().find(|x| x.shape() != (n, batch)) {
            return Err(Error::dim("gcnn_rec_forward", bad.shape(), (n, batch)));
        }
        let a = match self.ddgf {
            Some(p) => {
                let raw = tape.param(&self.store, p);
                Some(tape.symmetrize(raw)?)
            }
            None => None,
        };
        let ones = tape.constant(Matrix::filled(1, batch, 1.0));
        let mut h = tape.constant(Matrix::zeros(d, batch));
        let mut c = tape.constant(Matrix::zeros(d, batch));
        for x in inputs {
            let xv = tape.constant(x.clone());
            let u = match a {
                Some(a) => tape.matmul(a, xv)?,
                None => xv,
            };
            (h, c) = lstm_cell_step(tape, &self.store, &self.cell, u, h, c, ones)?;
        }
        let w = tape.param(&self.store, self.out_w);
        let b = tape.param(&self.store, self.out_b);
        let wh = tape.matmul(w, h)?;
        let bb = tape.matmul(b, ones)?;
        tape.add(wh, bb)
    }
}

impl Forecaster for GcnnRec {
    fn params(&self) -> &ParamStore {
        &self.store
    }

    fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn forward(&self, tape: &mut Tape, data: &WindowedDataset, batch: &[usize]) -> Result<Var> {
        let n = self.config.n;
        if data.n_stations() != n || data.window() != self.config.steps {
            return Err(Error::dim(
                "gcnn_rec_forward",
                (data.n_stations(), data.window()),
                (n, self.config.steps),
            ));
        }
        let inputs: Vec<Matrix> = (0..self.config.steps)
            .map(|e| Matrix::from_fn(n, batch.len(), |i, b| data.input_value(batch[b], i, e)))
            .collect();
        self.forward_steps(tape, &inputs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cell_gives_zero_state() {
        let mut store = ParamStore::new();
        let mut rng = model_rng(0);
        let cell = LstmCellParams::init(&mut store, 3, 2, &mut rng);
        let ids: Vec<_> = store.iter().map(|(id, _)| id).collect();
        for id in ids {
            store.get_mut(id).value.fill(0.0);
        }
        let mut tape = Tape::new();
        let x = tape.constant(Matrix::filled(3, 1, 0.7));
        let h0 = tape.constant(Matrix::zeros(2, 1));
        let c0 = tape.constant(Matrix::zeros(2, 1));
        let ones = tape.constant(Matrix::filled(1, 1, 1.0));
        let (h, c) = lstm_cell_step(&mut tape, &store, &cell, x, h0, c0, ones).unwrap();
        assert_eq!(tape.value(h).max_abs(), 0.0);
        assert_eq!(tape.value(c).max_abs(), 0.0);
    }

    #[test]
    fn saturated_gates_carry_memory() {
        let mut store = ParamStore::new();
        let mut rng = model_rng(1);
        let cell = LstmCellParams::init(&mut store, 2, 2, &mut rng);
        store.get_mut(cell.b[0]).value.fill(-1e3);
        store.get_mut(cell.b[1]).value.fill(1e3);
        let mut tape = Tape::new();
        let x = tape.constant(Matrix::column(&[0.1, -0.2]));
        let h0 = tape.constant(Matrix::column(&[0.05, 0.02]));
        let c_prev = Matrix::column(&[0.3, -0.4]);
        let c0 = tape.constant(c_prev.clone());
        let ones = tape.constant(Matrix::filled(1, 1, 1.0));
        let (_, c) = lstm_cell_step(&mut tape, &store, &cell, x, h0, c0, ones).unwrap();
        assert_eq!(tape.value(c), &c_prev);
    }

    #[test]
    fn full_network_output_length() {
        let m = GcnnRec::new(
            GcnnRecConfig {
                n: 272,
                steps: 24,
                hidden: 100,
                ddgf: true,
            },
            0,
        )
        .unwrap();
        let inputs = vec![Matrix::filled(272, 1, 0.2); 24];
        let mut tape = Tape::new();
        let y = m.forward_steps(&mut tape, &inputs).unwrap();
        assert_eq!(tape.value(y).shape(), (272, 1));
        assert!(m.forward_steps(&mut Tape::new(), &inputs[..23]).is_err());
    }

    #[test]
    fn bias_only_output_is_constant() {
        let mut m = GcnnRec::new(
            GcnnRecConfig {
                n: 3,
                steps: 2,
                hidden: 4,
                ddgf: true,
            },
            5,
        )
        .unwrap();
        let (w, b) = m.output_ids();
        m.params_mut().get_mut(w).value.fill(0.0);
        m.params_mut().get_mut(b).value = Matrix::column(&[1.5, -2.0, 0.25]);
        for scale in [0.0, 0.3, 1.0] {
            let inputs = vec![Matrix::filled(3, 1, scale); 2];
            let mut tape = Tape::new();
            let y = m.forward_steps(&mut tape, &inputs).unwrap();
            assert_eq!(tape.value(y).col(0), vec![1.5, -2.0, 0.25]);
        }
    }
}
