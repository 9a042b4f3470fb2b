use super::array::Array;
use super::layer::LayerSpec;
use super::loss;
use super::network::{backward, forward, NetworkParams};
use crate::Result;

pub const FD_STEP: f64 = 1e-5;
/// Gradients smaller than this are compared on an absolute scale.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Weight,
    Bias,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradMismatch {
    pub layer: usize,
    pub kind: ParamKind,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub tolerance: f64,
    pub checked: usize,
    pub max_rel_error: f64,
    pub per_layer_max: Vec<f64>,
    pub failures: Vec<GradMismatch>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_FLOOR)
}

/// Loss used by the check: cross-entropy when the network ends in softmax,
/// otherwise half squared error against `label`.
fn loss_and_grad(specs: &[LayerSpec], y: &Array, label: &Array) -> Result<(f64, Array)> {
    if matches!(specs.last(), Some(LayerSpec::Softmax { .. })) {
        Ok((
            loss::cross_entropy(y, label)?,
            loss::cross_entropy_grad(y, label)?,
        ))
    } else {
        Ok((
            loss::squared_error(y, label.data())?,
            loss::squared_error_grad(y, label.data())?,
        ))
    }
}

fn loss_at(specs: &[LayerSpec], params: &NetworkParams, x: &Array, label: &Array) -> Result<f64> {
    let (y, _) = forward(params, specs, x)?;
    Ok(loss_and_grad(specs, &y, label)?.0)
}

fn param_mut(p: &mut NetworkParams, layer: usize, kind: ParamKind, index: usize) -> &mut f64 {
    let l = &mut p.layers[layer];
    match kind {
        ParamKind::Weight => &mut l.weights.data_mut()[index],
        ParamKind::Bias => &mut l.biases.data_mut()[index],
    }
}

/// Compares backprop against central differences for every parameter.
pub fn grad_check(
    specs: &[LayerSpec],
    params: &NetworkParams,
    x: &Array,
    label: &Array,
    tolerance: f64,
) -> Result<GradCheckReport> {
    let (y, cache) = forward(params, specs, x)?;
    let (_, dy) = loss_and_grad(specs, &y, label)?;
    let grads = backward(params, specs, &cache, &dy)?;

    let mut probe = params.clone();
    let mut report = GradCheckReport {
        tolerance,
        checked: 0,
        max_rel_error: 0.0,
        per_layer_max: vec![0.0; specs.len()],
        failures: Vec::new(),
    };
    for layer in 0..specs.len() {
        for kind in [ParamKind::Weight, ParamKind::Bias] {
            let n = match kind {
                ParamKind::Weight => params.layers[layer].weights.len(),
                ParamKind::Bias => params.layers[layer].biases.len(),
            };
            for index in 0..n {
                let original = *param_mut(&mut probe, layer, kind, index);
                *param_mut(&mut probe, layer, kind, index) = original + FD_STEP;
                let up = loss_at(specs, &probe, x, label)?;
                *param_mut(&mut probe, layer, kind, index) = original - FD_STEP;
                let down = loss_at(specs, &probe, x, label)?;
                *param_mut(&mut probe, layer, kind, index) = original;
                let numeric = (up - down) / (2.0 * FD_STEP);
                let analytic = match kind {
                    ParamKind::Weight => grads.params.layers[layer].weights.data()[index],
                    ParamKind::Bias => grads.params.layers[layer].biases.data()[index],
                };
                let rel = relative_error(analytic, numeric);
                report.checked += 1;
                report.max_rel_error = report.max_rel_error.max(rel);
                report.per_layer_max[layer] = report.per_layer_max[layer].max(rel);
                if rel >= tolerance {
                    report.failures.push(GradMismatch {
                        layer,
                        kind,
                        index,
                        analytic,
                        numeric,
                        rel_error: rel,
                    });
                }
            }
        }
    }
    Ok(report)
}
