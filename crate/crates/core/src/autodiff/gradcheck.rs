//! Central finite-difference check of reverse-mode gradients.
//!
//! The numeric side only ever reads forward values, so it stays independent
//! of every backward rule it is checking.

use crate::autodiff::{ParamStore, Tape, Var};
use crate::error::Result;

/// Denominator floor for the relative error, so entries whose true gradient is
/// zero are compared on an absolute scale instead of dividing noise by noise.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    /// Largest relative error over all checked entries.
    pub worst: f64,
    pub worst_param: String,
    pub worst_entry: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.worst < tolerance
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR);
    (analytic - numeric).abs() / denom
}

/// Compares analytic gradients of `loss` against central differences with the given step.
///
/// `loss` must build a scalar node from the current parameter values. The
/// store's gradients are overwritten with the analytic gradient.
pub fn check_gradients<F>(store: &mut ParamStore, mut loss: F, step: f64) -> Result<GradCheckReport>
where
    F: FnMut(&mut Tape, &ParamStore) -> Result<Var>,
{
    store.zero_grad();
    let mut tape = Tape::new();
    let l = loss(&mut tape, store)?;
    tape.backward(l, store)?;

    let mut eval = |store: &ParamStore| -> Result<f64> {
        let mut tape = Tape::new();
        let l = loss(&mut tape, store)?;
        Ok(tape.value(l)[(0, 0)])
    };

    let ids: Vec<_> = store.iter().filter(|(_, p)| p.trainable).map(|(id, _)| id).collect();
    let mut report = GradCheckReport {
        worst: 0.0,
        worst_param: String::new(),
        worst_entry: 0,
        analytic: 0.0,
        numeric: 0.0,
        checked: 0,
    };
    for id in ids {
        for k in 0..store.value(id).len() {
            let original = store.value(id).data()[k];
            store.get_mut(id).value.data_mut()[k] = original + step;
            let up = eval(store)?;
            store.get_mut(id).value.data_mut()[k] = original - step;
            let down = eval(store)?;
            store.get_mut(id).value.data_mut()[k] = original;

            let numeric = (up - down) / (2.0 * step);
            let analytic = store.grad(id).data()[k];
            let err = relative_error(analytic, numeric);
            report.checked += 1;
            if err > report.worst || report.worst_param.is_empty() {
                report.worst = err;
                report.worst_param = store.get(id).name.clone();
                report.worst_entry = k;
                report.analytic = analytic;
                report.numeric = numeric;
            }
        }
    }
    Ok(report)
}
