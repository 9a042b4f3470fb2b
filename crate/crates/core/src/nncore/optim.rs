use serde::{Deserialize, Serialize};

use super::network::NetworkParams;
use crate::{Error, Result};

pub const RMSPROP_DECAY: f64 = 0.9;
pub const RMSPROP_EPS: f64 = 1e-8;

fn check_grads(params: &NetworkParams, grads: &NetworkParams) -> Result<()> {
    if params.layers.len() != grads.layers.len() {
        return Err(Error::Input(
            "gradient layer count differs from parameters".into(),
        ));
    }
    for (i, (p, g)) in params.layers.iter().zip(&grads.layers).enumerate() {
        if p.weights.shape() != g.weights.shape() || p.biases.shape() != g.biases.shape() {
            return Err(Error::Shape {
                layer: i,
                msg: "gradient shape differs from parameter shape".into(),
            });
        }
    }
    if let Some(i) = grads.first_non_finite() {
        return Err(Error::training(
            "optimizer",
            format!("non-finite gradient in layer {i}"),
        ));
    }
    Ok(())
}

/// `p -= lr * g`.
pub fn sgd_step(params: &mut NetworkParams, grads: &NetworkParams, lr: f64) -> Result<()> {
    check_grads(params, grads)?;
    if lr == 0.0 {
        return Ok(());
    }
    for (p, g) in params.layers.iter_mut().zip(&grads.layers) {
        for (w, d) in p.weights.data_mut().iter_mut().zip(g.weights.data()) {
            *w -= lr * d;
        }
        for (b, d) in p.biases.data_mut().iter_mut().zip(g.biases.data()) {
            *b -= lr * d;
        }
    }
    Ok(())
}

/// Running mean of squared gradients, one accumulator per parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RmsPropState {
    pub learning_rate: f64,
    pub decay: f64,
    pub epsilon: f64,
    pub accum: NetworkParams,
}

impl RmsPropState {
    pub fn new(params: &NetworkParams, learning_rate: f64) -> Self {
        let mut accum = params.clone();
        accum.scale(0.0);
        Self {
            learning_rate,
            decay: RMSPROP_DECAY,
            epsilon: RMSPROP_EPS,
            accum,
        }
    }
}

/// `a = decay*a + (1-decay)*g^2; p -= lr * g / (sqrt(a) + eps)`.
pub fn rmsprop_step(
    params: &mut NetworkParams,
    grads: &NetworkParams,
    state: &mut RmsPropState,
) -> Result<()> {
    check_grads(params, grads)?;
    check_grads(params, &state.accum)?;
    let (lr, rho, eps) = (state.learning_rate, state.decay, state.epsilon);
    let update = |p: &mut [f64], a: &mut [f64], g: &[f64]| {
        for ((w, acc), d) in p.iter_mut().zip(a.iter_mut()).zip(g) {
            *acc = rho * *acc + (1.0 - rho) * d * d;
            *w -= lr * d / (acc.sqrt() + eps);
        }
    };
    for ((p, a), g) in params
        .layers
        .iter_mut()
        .zip(state.accum.layers.iter_mut())
        .zip(&grads.layers)
    {
        update(p.weights.data_mut(), a.weights.data_mut(), g.weights.data());
        update(p.biases.data_mut(), a.biases.data_mut(), g.biases.data());
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Optimizer {
    Sgd { learning_rate: f64 },
    Rmsprop(RmsPropState),
}

impl Optimizer {
    pub fn sgd(learning_rate: f64) -> Result<Self> {
        if !(learning_rate >= 0.0 && learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate {learning_rate} is invalid"
            )));
        }
        Ok(Optimizer::Sgd { learning_rate })
    }

    pub fn rmsprop(params: &NetworkParams, learning_rate: f64) -> Result<Self> {
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate {learning_rate} is invalid"
            )));
        }
        Ok(Optimizer::Rmsprop(RmsPropState::new(params, learning_rate)))
    }

    pub fn step(&mut self, params: &mut NetworkParams, grads: &NetworkParams) -> Result<()> {
        match self {
            Optimizer::Sgd { learning_rate } => sgd_step(params, grads, *learning_rate),
            Optimizer::Rmsprop(state) => rmsprop_step(params, grads, state),
        }
    }
}
