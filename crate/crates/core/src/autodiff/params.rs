use crate::autodiff::Matrix;
use crate::error::{Error, Result};

/// Handle to a [`Parameter`] inside a [`ParamStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
pub struct Parameter {
    pub name: String,
    pub value: Matrix,
    pub grad: Matrix,
    pub trainable: bool,
}

/// Owns every parameter of one model. Gradients accumulate until [`ParamStore::zero_grad`].
#[derive(Clone, Debug, Default)]
pub struct ParamStore {
    params: Vec<Parameter>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Matrix, trainable: bool) -> ParamId {
        let grad = Matrix::zeros(value.rows(), value.cols());
        self.params.push(Parameter {
            name: name.into(),
            value,
            grad,
            trainable,
        });
        ParamId(self.params.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Parameter {
        &self.params[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Parameter {
        &mut self.params[id.0]
    }

    pub fn value(&self, id: ParamId) -> &Matrix {
        &self.params[id.0].value
    }

    pub fn grad(&self, id: ParamId) -> &Matrix {
        &self.params[id.0].grad
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Parameter)> {
        self.params.iter().enumerate().map(|(i, p)| (ParamId(i), p))
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.params.iter().position(|p| p.name == name).map(ParamId)
    }

    /// Total number of scalar entries across trainable parameters.
    pub fn trainable_count(&self) -> usize {
        self.params.iter().filter(|p| p.trainable).map(|p| p.value.len()).sum()
    }

    pub fn zero_grad(&mut self) {
        for p in &mut self.params {
            p.grad.fill(0.0);
        }
    }

    pub(crate) fn accumulate(&mut self, id: ParamId, g: &Matrix) {
        let p = &mut self.params[id.0];
        if p.trainable {
            p.grad.add_assign(g);
        }
    }

    /// Plain gradient descent: `value -= learning_rate * grad` on trainable parameters.
    ///
    /// All gradients are checked for finiteness before any value changes.
    pub fn sgd_step(&mut self, learning_rate: f64) -> Result<()> {
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::Validation(format!(
                "learning rate must be positive, got {learning_rate}"
            )));
        }
        if let Some(p) = self.params.iter().find(|p| p.trainable && !p.grad.is_finite()) {
            return Err(Error::Divergence { name: p.name.clone() });
        }
        for p in self.params.iter_mut().filter(|p| p.trainable) {
            for (v, g) in p.value.data_mut().iter_mut().zip(p.grad.data()) {
                *v -= learning_rate * g;
            }
        }
        Ok(())
    }

    /// Copies of all values, in store order.
    pub fn snapshot(&self) -> Vec<Matrix> {
        self.params.iter().map(|p| p.value.clone()).collect()
    }

    pub fn restore(&mut self, values: &[Matrix]) {
        assert_eq!(values.len(), self.params.len(), "snapshot length");
        for (p, v) in self.params.iter_mut().zip(values) {
            assert_eq!(p.value.shape(), v.shape(), "snapshot shape for {}", p.name);
            p.value = v.clone();
        }
    }

    /// `(name, value)` pairs, in store order.
    pub fn named_values(&self) -> Vec<(String, Matrix)> {
        self.params.iter().map(|p| (p.name.clone(), p.value.clone())).collect()
    }

    /// Overwrites values by name. Every parameter must be present with a matching shape.
    pub fn load_named(&mut self, values: &[(String, Matrix)]) -> Result<()> {
        for p in &mut self.params {
            let (_, v) = values
                .iter()
                .find(|(n, _)| *n == p.name)
                .ok_or_else(|| Error::Validation(format!("missing parameter `{}` in checkpoint", p.name)))?;
            if v.shape() != p.value.shape() {
                return Err(Error::Validation(format!(
                    "parameter `{}` has shape {:?}, checkpoint holds {:?}",
                    p.name,
                    p.value.shape(),
                    v.shape()
                )));
            }
            p.value = v.clone();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgd_forced_arithmetic() {
        let mut store = ParamStore::new();
        let w = store.add("w", Matrix::filled(1, 1, 1.0), true);
        store.get_mut(w).grad = Matrix::filled(1, 1, 2.0);
        store.sgd_step(0.01).unwrap();
        assert!((store.value(w)[(0, 0)] - 0.98).abs() < 1e-15);
    }

    #[test]
    fn zero_grad_leaves_values() {
        let mut store = ParamStore::new();
        let w = store.add("w", Matrix::filled(2, 2, 0.3), true);
        store.sgd_step(0.5).unwrap();
        assert_eq!(store.value(w), &Matrix::filled(2, 2, 0.3));
    }

    #[test]
    fn frozen_parameters_untouched() {
        let mut store = ParamStore::new();
        let a = store.add("fixed", Matrix::filled(1, 1, 5.0), false);
        store.accumulate(a, &Matrix::filled(1, 1, 3.0));
        store.get_mut(a).grad = Matrix::filled(1, 1, 3.0);
        store.sgd_step(1.0).unwrap();
        assert_eq!(store.value(a)[(0, 0)], 5.0);
    }

    #[test]
    fn divergence_names_parameter() {
        let mut store = ParamStore::new();
        let w = store.add("layer1.weight", Matrix::filled(1, 2, 0.0), true);
        store.get_mut(w).grad[(0, 1)] = f64::NAN;
        match store.sgd_step(0.1) {
            Err(Error::Divergence { name }) => assert_eq!(name, "layer1.weight"),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(store.value(w)[(0, 0)], 0.0);
    }
}
