use super::array::Array;
use crate::{Error, Result};

pub const PROB_FLOOR: f64 = 1e-12;

fn class_of(one_hot: &[f64]) -> Result<usize> {
    let mut hot = None;
    for (i, v) in one_hot.iter().enumerate() {
        if *v == 1.0 {
            if hot.is_some() {
                return Err(Error::Input("label has more than one hot entry".into()));
            }
            hot = Some(i);
        } else if *v != 0.0 {
            return Err(Error::Input(format!(
                "label entry {i} is {v}, expected 0 or 1"
            )));
        }
    }
    hot.ok_or_else(|| Error::Input("label has no hot entry".into()))
}

pub fn one_hot(class: usize, classes: usize) -> Array {
    let mut v = vec![0.0; classes];
    v[class] = 1.0;
    Array::from_vec(v)
}

/// `-ln p[true]` with the probability clamped to `[PROB_FLOOR, 1]`.
pub fn cross_entropy(probs: &Array, label: &Array) -> Result<f64> {
    if probs.len() != label.len() {
        return Err(Error::Input(format!(
            "{} probabilities for a {}-class label",
            probs.len(),
            label.len()
        )));
    }
    let c = class_of(label.data())?;
    Ok(-probs.data()[c].clamp(PROB_FLOOR, 1.0).ln())
}

/// Gradient of [`cross_entropy`] with respect to the probabilities.
pub fn cross_entropy_grad(probs: &Array, label: &Array) -> Result<Array> {
    if probs.len() != label.len() {
        return Err(Error::Input("probability and label lengths differ".into()));
    }
    let c = class_of(label.data())?;
    let mut g = vec![0.0; probs.len()];
    let p = probs.data()[c];
    if p > PROB_FLOOR {
        g[c] = -1.0 / p.min(1.0);
    }
    Array::new(probs.shape().to_vec(), g)
}

/// `0.5 * sum (y - t)^2`.
pub fn squared_error(y: &Array, target: &[f64]) -> Result<f64> {
    if y.len() != target.len() {
        return Err(Error::Input("output and target lengths differ".into()));
    }
    Ok(0.5
        * y.data()
            .iter()
            .zip(target)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>())
}

pub fn squared_error_grad(y: &Array, target: &[f64]) -> Result<Array> {
    if y.len() != target.len() {
        return Err(Error::Input("output and target lengths differ".into()));
    }
    let g = y.data().iter().zip(target).map(|(a, b)| a - b).collect();
    Array::new(y.shape().to_vec(), g)
}
