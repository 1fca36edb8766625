//! Central finite-difference check of analytic parameter gradients.

use super::Model;
use crate::matrix::Matrix;

/// Denominator floor for relative errors so vanishing gradients compare absolutely.
const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Parameter index with the largest relative error.
    pub worst_index: Option<usize>,
    pub compared: usize,
    /// Parameters whose ±h probes flip a relu unit; finite differences are
    /// meaningless there.
    pub non_comparable: Vec<usize>,
    pub tol: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error < self.tol
    }
}

/// Compares `model`'s backward pass against `(L(θ+h) − L(θ−h)) / 2h` for every
/// parameter. `loss` maps the model output to `(L, ∂L/∂output)`.
pub fn grad_check<M, F>(model: &mut M, loss: F, batch: &Matrix, h: f64, tol: f64) -> GradCheckReport
where
    M: Model + ?Sized,
    F: Fn(&Matrix) -> (f64, Matrix),
{
    assert!(h > 0.0, "finite-difference step must be positive");
    let base = model.params();

    model.zero_grad();
    let out = model.forward(batch).expect("grad_check forward");
    let (_, upstream) = loss(&out);
    model.backward(&upstream).expect("grad_check backward");
    let analytic = model.grads();
    model.zero_grad();

    let eval = |model: &mut M, params: &[f64]| {
        model.set_params(params).expect("same length");
        let out = model.forward(batch).expect("grad_check forward");
        (loss(&out).0, model.kink_pattern())
    };

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_index: None,
        compared: 0,
        non_comparable: Vec::new(),
        tol,
    };
    let mut probe = base.clone();
    for (i, &a) in analytic.iter().enumerate() {
        probe[i] = base[i] + h;
        let (plus, kinks_plus) = eval(model, &probe);
        probe[i] = base[i] - h;
        let (minus, kinks_minus) = eval(model, &probe);
        probe[i] = base[i];
        if kinks_plus != kinks_minus {
            report.non_comparable.push(i);
            continue;
        }
        let numeric = (plus - minus) / (2.0 * h);
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(REL_FLOOR);
        report.compared += 1;
        if report.worst_index.is_none() || rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst_index = Some(i);
        }
    }
    model.set_params(&base).expect("same length");
    // Leave a cache for the original parameters.
    let _ = model.forward(batch);
    report
}

/// Mean-squared-error loss `mean((y − t)²)` and its output gradient.
pub fn mse_loss(target: &Matrix) -> impl Fn(&Matrix) -> (f64, Matrix) + '_ {
    move |out: &Matrix| {
        let n = out.data().len() as f64;
        let diff = out.sub(target).expect("shape");
        let loss = diff.data().iter().map(|d| d * d).sum::<f64>() / n;
        (loss, diff.scale(2.0 / n))
    }
}
