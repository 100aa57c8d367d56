use crate::autodiff::{symmetric_part, Matrix, ParamId, ParamStore, Tape, Var};
use crate::error::{Error, Result};
use crate::graph::GraphFilter;
use crate::ingest::WindowedDataset;
use crate::models::init::{glorot_uniform, model_rng, near_identity};
use crate::models::Forecaster;

/// Where the propagation matrix comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum FilterSource {
    Fixed(GraphFilter),
    /// Learned `Â = (P + Pᵀ)/2`.
    Ddgf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GcnnRegConfig {
    pub n: usize,
    /// Input window C⁰.
    pub window: usize,
    /// Hidden widths C¹ and C²; `0` for C² means a single hidden layer.
    pub hidden1: usize,
    pub hidden2: usize,
    pub filter: FilterSource,
}

impl GcnnRegConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.window == 0 || self.hidden1 == 0 {
            return Err(Error::Validation(format!(
                "GCNN needs N, C⁰ and C¹ of at least 1 (got {}, {}, {})",
                self.n, self.window, self.hidden1
            )));
        }
        if let FilterSource::Fixed(f) = &self.filter {
            if f.n() != self.n {
                return Err(Error::dim("gcnn filter", f.matrix.shape(), (self.n, self.n)));
            }
        }
        Ok(())
    }

    /// Layer widths from input to the single output column.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.window, self.hidden1];
        if self.hidden2 > 0 {
            w.push(self.hidden2);
        }
        w.push(1);
        w
    }
}

/// Feedforward graph convolution `H^l = σ(Â H^{l−1} W^l)` with a linear output layer.
#[derive(Clone, Debug)]
pub struct GcnnReg {
    store: ParamStore,
    filter: ParamId,
    learned: bool,
    layers: Vec<ParamId>,
    n: usize,
    window: usize,
}

impl GcnnReg {
    pub fn new(config: &GcnnRegConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        Self::with_widths(config.n, &config.widths(), &config.filter, seed)
    }

    /// Arbitrary layer widths `[C⁰, …, 1]`, including no hidden layer at all.
    pub fn with_widths(n: usize, widths: &[usize], filter: &FilterSource, seed: u64) -> Result<Self> {
        if widths.len() < 2 || widths.iter().any(|&w| w == 0) || *widths.last().unwrap() != 1 {
            return Err(Error::Validation(format!("invalid GCNN widths {widths:?}")));
        }
        let mut rng = model_rng(seed);
        let mut store = ParamStore::new();
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(l, w)| store.add(format!("w{}", l + 1), glorot_uniform(w[0], w[1], &mut rng), true))
            .collect();
        let (filter, learned) = match filter {
            FilterSource::Fixed(f) => {
                if f.n() != n {
                    return Err(Error::dim("gcnn filter", f.matrix.shape(), (n, n)));
                }
                (store.add("filter", f.matrix.clone(), false), false)
            }
            FilterSource::Ddgf => (store.add("ddgf", near_identity(n, &mut rng), true), true),
        };
        Ok(Self {
            store,
            filter,
            learned,
            layers,
            n,
            window: widths[0],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn is_ddgf(&self) -> bool {
        self.learned
    }

    pub fn layer_ids(&self) -> &[ParamId] {
        &self.layers
    }

    /// The propagation matrix currently in use.
    pub fn filter_matrix(&self) -> Matrix {
        let v = self.store.value(self.filter);
        if self.learned {
            symmetric_part(v).expect("square DDGF")
        } else {
            v.clone()
        }
    }

    pub fn filter_id(&self) -> ParamId {
        self.filter
    }

    /// Forward pass on one explicit N×C⁰ input.
    pub fn forward_single(&self, tape: &mut Tape, x: &Matrix) -> Result<Var> {
        if x.shape() != (self.n, self.window) {
            return Err(Error::dim("gcnn_reg_forward", x.shape(), (self.n, self.window)));
        }
        let h = tape.constant(x.clone());
        self.propagate(tape, h, 1)
    }

    /// `packed` is N×(B·C⁰) with sample `b` in columns `b·C⁰..(b+1)·C⁰`.
    fn propagate(&self, tape: &mut Tape, packed: Var, blocks: usize) -> Result<Var> {
        let raw = tape.param(&self.store, self.filter);
        let a = if self.learned { tape.symmetrize(raw)? } else { raw };
        let mut h = packed;
        for (l, &w) in self.layers.iter().enumerate() {
            let z = tape.matmul(a, h)?;
            let wv = tape.param(&self.store, w);
            h = tape.block_matmul(z, wv, blocks)?;
            if l + 1 < self.layers.len() {
                h = tape.relu(h);
            }
        }
        Ok(h)
    }
}

impl Forecaster for GcnnReg {
    fn params(&self) -> &ParamStore {
        &self.store
    }

    fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn forward(&self, tape: &mut Tape, data: &WindowedDataset, batch: &[usize]) -> Result<Var> {
        if data.n_stations() != self.n || data.window() != self.window {
            return Err(Error::dim(
                "gcnn_reg_forward",
                (data.n_stations(), data.window()),
                (self.n, self.window),
            ));
        }
        let c = self.window;
        let b_count = batch.len();
        let mut packed = Matrix::zeros(self.n, b_count * c);
        for (b, &k) in batch.iter().enumerate() {
            for i in 0..self.n {
                for j in 0..c {
                    packed[(i, b * c + j)] = data.input_value(k, i, j);
                }
            }
        }
        let x = tape.constant(packed);
        self.propagate(tape, x, b_count)
    }
}
