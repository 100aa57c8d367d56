use crate::autodiff::matrix::gemm_acc;
use crate::autodiff::{Matrix, ParamId, ParamStore};
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Constant,
    Param(ParamId),
    MatMul(Var, Var),
    BlockMatMul { packed: Var, weight: Var, blocks: usize },
    Add(Var, Var),
    Relu(Var),
    Sigmoid(Var),
    Tanh(Var),
    Hadamard(Var, Var),
    Symmetrize(Var),
    MseLoss { pred: Var, target: Matrix },
}

#[derive(Debug)]
struct Node {
    op: Op,
    value: Matrix,
    /// Whether any trainable parameter feeds this node.
    live: bool,
}

/// Records a forward computation so it can be differentiated in reverse.
///
/// Operations are appended in evaluation order, so every input precedes the
/// node that consumes it. [`Tape::backward`] walks the nodes in exact reverse.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op, value: Matrix) -> Var {
        let l = |v: &Var| self.nodes[v.0].live;
        let live = match &op {
            Op::Constant | Op::Param(_) => false,
            Op::MatMul(a, b) | Op::Add(a, b) | Op::Hadamard(a, b) => l(a) || l(b),
            Op::BlockMatMul { packed, weight, .. } => l(packed) || l(weight),
            Op::Relu(a) | Op::Sigmoid(a) | Op::Tanh(a) | Op::Symmetrize(a) => l(a),
            Op::MseLoss { pred, .. } => l(pred),
        };
        self.nodes.push(Node { op, value, live });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    /// A value that receives no gradient.
    pub fn constant(&mut self, value: Matrix) -> Var {
        self.push(Op::Constant, value)
    }

    /// Reads the current value of a parameter onto the tape.
    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> Var {
        let v = self.push(Op::Param(id), store.value(id).clone());
        self.nodes[v.0].live = store.get(id).trainable;
        v
    }

    fn live(&self, v: Var) -> bool {
        self.nodes[v.0].live
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).matmul(self.value(b))?;
        Ok(self.push(Op::MatMul(a, b), out))
    }

    /// Multiplies each of `blocks` side-by-side column blocks of `packed` by `weight`.
    ///
    /// `packed` is `n × (blocks·c)`, `weight` is `c × f`, the result is
    /// `n × (blocks·f)`. This is the feedforward step applied to a batch of
    /// per-sample feature matrices laid out next to each other.
    pub fn block_matmul(&mut self, packed: Var, weight: Var, blocks: usize) -> Result<Var> {
        let (n, width) = self.shape(packed);
        let (c, f) = self.shape(weight);
        if blocks == 0 || width != blocks * c {
            return Err(Error::dim("block_matmul", (n, width), (c, f)));
        }
        let p = self.value(packed);
        let w = self.value(weight);
        let mut out = Matrix::zeros(n, blocks * f);
        {
            let pd = p.data();
            let wd = w.data();
            let od = out.data_mut();
            for i in 0..n {
                for b in 0..blocks {
                    let orow = &mut od[i * blocks * f + b * f..i * blocks * f + (b + 1) * f];
                    for k in 0..c {
                        let pv = pd[i * width + b * c + k];
                        if pv == 0.0 {
                            continue;
                        }
                        for (o, &wv) in orow.iter_mut().zip(&wd[k * f..(k + 1) * f]) {
                            *o += pv * wv;
                        }
                    }
                }
            }
        }
        Ok(self.push(Op::BlockMatMul { packed, weight, blocks }, out))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).add(self.value(b))?;
        Ok(self.push(Op::Add(a, b), out))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let out = self.value(a).map(|v| if v > 0.0 { v } else { 0.0 });
        self.push(Op::Relu(a), out)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out = self.value(a).map(sigmoid);
        self.push(Op::Sigmoid(a), out)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = self.value(a).map(f64::tanh);
        self.push(Op::Tanh(a), out)
    }

    pub fn hadamard(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).hadamard(self.value(b))?;
        Ok(self.push(Op::Hadamard(a, b), out))
    }

    /// `(P + Pᵀ) / 2`. Entry `(i, j)` and `(j, i)` are computed from the same
    /// sum, so the output is exactly symmetric.
    pub fn symmetrize(&mut self, p: Var) -> Result<Var> {
        let out =
            symmetric_part(self.value(p)).ok_or_else(|| Error::dim("symmetrize", self.shape(p), self.shape(p)))?;
        Ok(self.push(Op::Symmetrize(p), out))
    }

    /// Mean squared error over all entries, as a `1 × 1` node.
    pub fn mse_loss(&mut self, pred: Var, target: &Matrix) -> Result<Var> {
        let p = self.value(pred);
        if p.shape() != target.shape() {
            return Err(Error::dim("mse_loss", p.shape(), target.shape()));
        }
        let n = p.len() as f64;
        let sse: f64 = p.data().iter().zip(target.data()).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok(self.push(
            Op::MseLoss {
                pred,
                target: target.clone(),
            },
            Matrix::filled(1, 1, sse / n),
        ))
    }

    /// Reverse pass from a scalar node, accumulating into trainable parameter gradients.
    pub fn backward(&self, loss: Var, store: &mut ParamStore) -> Result<()> {
        if self.shape(loss) != (1, 1) {
            return Err(Error::Contract(format!(
                "backward needs a 1x1 loss, got {:?}",
                self.shape(loss)
            )));
        }
        let mut grads: Vec<Option<Matrix>> = (0..=loss.0).map(|_| None).collect();
        grads[loss.0] = Some(Matrix::filled(1, 1, 1.0));

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            if !node.live {
                continue;
            }
            match &node.op {
                Op::Constant => {}
                Op::Param(id) => store.accumulate(*id, &g),
                Op::MatMul(a, b) => {
                    let av = self.value(*a);
                    let bv = self.value(*b);
                    if self.live(*a) {
                        let mut da = Matrix::zeros(av.rows(), av.cols());
                        gemm_acc(&g, &bv.transpose(), &mut da);
                        accumulate(&mut grads, *a, da);
                    }
                    if self.live(*b) {
                        let mut db = Matrix::zeros(bv.rows(), bv.cols());
                        gemm_acc(&av.transpose(), &g, &mut db);
                        accumulate(&mut grads, *b, db);
                    }
                }
                Op::BlockMatMul { packed, weight, blocks } => {
                    let (dp, dw) = block_matmul_backward(self.value(*packed), self.value(*weight), &g, *blocks);
                    accumulate(&mut grads, *packed, dp);
                    accumulate(&mut grads, *weight, dw);
                }
                Op::Add(a, b) => {
                    if self.live(*a) {
                        accumulate(&mut grads, *a, g.clone());
                    }
                    if self.live(*b) {
                        accumulate(&mut grads, *b, g);
                    }
                }
                Op::Relu(a) => {
                    let x = self.value(*a);
                    let d = g
                        .zip_map("relu", x, |gv, xv| if xv > 0.0 { gv } else { 0.0 })
                        .expect("relu shapes");
                    accumulate(&mut grads, *a, d);
                }
                Op::Sigmoid(a) => {
                    let y = &node.value;
                    let d = g
                        .zip_map("sigmoid", y, |gv, yv| gv * yv * (1.0 - yv))
                        .expect("sigmoid shapes");
                    accumulate(&mut grads, *a, d);
                }
                Op::Tanh(a) => {
                    let y = &node.value;
                    let d = g
                        .zip_map("tanh", y, |gv, yv| gv * (1.0 - yv * yv))
                        .expect("tanh shapes");
                    accumulate(&mut grads, *a, d);
                }
                Op::Hadamard(a, b) => {
                    if self.live(*a) {
                        let da = g.hadamard(self.value(*b)).expect("hadamard shapes");
                        accumulate(&mut grads, *a, da);
                    }
                    if self.live(*b) {
                        let db = g.hadamard(self.value(*a)).expect("hadamard shapes");
                        accumulate(&mut grads, *b, db);
                    }
                }
                Op::Symmetrize(p) => {
                    let d = symmetric_part(&g).expect("square gradient");
                    accumulate(&mut grads, *p, d);
                }
                Op::MseLoss { pred, target } => {
                    let p = self.value(*pred);
                    let scale = 2.0 * g[(0, 0)] / p.len() as f64;
                    let d = p
                        .zip_map("mse_loss", target, |a, b| scale * (a - b))
                        .expect("mse shapes");
                    accumulate(&mut grads, *pred, d);
                }
            }
        }
        Ok(())
    }
}

fn accumulate(grads: &mut [Option<Matrix>], v: Var, g: Matrix) {
    match &mut grads[v.0] {
        Some(existing) => existing.add_assign(&g),
        slot @ None => *slot = Some(g),
    }
}

fn block_matmul_backward(packed: &Matrix, weight: &Matrix, g: &Matrix, blocks: usize) -> (Matrix, Matrix) {
    let (n, width) = packed.shape();
    let (c, f) = weight.shape();
    let mut dp = Matrix::zeros(n, width);
    let mut dw = Matrix::zeros(c, f);
    let (pd, wd, gd) = (packed.data(), weight.data(), g.data());
    let gw = blocks * f;
    {
        let dpd = dp.data_mut();
        for i in 0..n {
            for b in 0..blocks {
                let grow = &gd[i * gw + b * f..i * gw + (b + 1) * f];
                for k in 0..c {
                    let wrow = &wd[k * f..(k + 1) * f];
                    dpd[i * width + b * c + k] = grow.iter().zip(wrow).map(|(x, y)| x * y).sum();
                }
            }
        }
    }
    {
        let dwd = dw.data_mut();
        for i in 0..n {
            for b in 0..blocks {
                let grow = &gd[i * gw + b * f..i * gw + (b + 1) * f];
                for k in 0..c {
                    let pv = pd[i * width + b * c + k];
                    if pv == 0.0 {
                        continue;
                    }
                    for (d, &gv) in dwd[k * f..(k + 1) * f].iter_mut().zip(grow) {
                        *d += pv * gv;
                    }
                }
            }
        }
    }
    (dp, dw)
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `(m + mᵀ) / 2`, or `None` for a non-square input.
pub fn symmetric_part(m: &Matrix) -> Option<Matrix> {
    if !m.is_square() {
        return None;
    }
    let n = m.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Some(out)
}
