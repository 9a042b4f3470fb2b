use rand::Rng;
use serde::{Deserialize, Serialize};

use super::array::Array;
use super::layer::{validate_stack, LayerSpec};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub weights: Array,
    pub biases: Array,
}

/// Weights and biases for every layer of a network, in layer order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub layers: Vec<LayerParams>,
}

impl NetworkParams {
    pub fn zeros(specs: &[LayerSpec]) -> Self {
        let layers = specs
            .iter()
            .map(|s| LayerParams {
                weights: Array::zeros(&s.weight_shape()),
                biases: Array::zeros(&s.bias_shape()),
            })
            .collect();
        Self { layers }
    }

    /// Uniform Glorot initialization, zero biases.
    pub fn init<R: Rng + ?Sized>(specs: &[LayerSpec], rng: &mut R) -> Result<Self> {
        validate_stack(specs)?;
        let mut params = Self::zeros(specs);
        for (spec, layer) in specs.iter().zip(params.layers.iter_mut()) {
            let (fan_in, fan_out) = spec.fans();
            if fan_in + fan_out == 0 {
                continue;
            }
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in layer.weights.data_mut() {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(params)
    }

    pub fn check_shapes(&self, specs: &[LayerSpec]) -> Result<()> {
        if self.layers.len() != specs.len() {
            return Err(Error::Config(format!(
                "{} parameter layers for {} layer specs",
                self.layers.len(),
                specs.len()
            )));
        }
        for (i, (spec, layer)) in specs.iter().zip(&self.layers).enumerate() {
            if layer.weights.shape() != spec.weight_shape().as_slice()
                || layer.biases.shape() != spec.bias_shape().as_slice()
            {
                return Err(Error::Shape {
                    layer: i,
                    msg: format!(
                        "parameter shapes {:?}/{:?} do not match {} spec",
                        layer.weights.shape(),
                        layer.biases.shape(),
                        spec.kind_name()
                    ),
                });
            }
        }
        Ok(())
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn add_assign(&mut self, other: &NetworkParams) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.weights.data_mut().iter_mut().zip(b.weights.data()) {
                *x += y;
            }
            for (x, y) in a.biases.data_mut().iter_mut().zip(b.biases.data()) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.weights.data_mut().iter_mut().for_each(|x| *x *= factor);
            l.biases.data_mut().iter_mut().for_each(|x| *x *= factor);
        }
    }

    /// Index of the first layer holding a non-finite value.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.layers
            .iter()
            .position(|l| !l.weights.is_finite() || !l.biases.is_finite())
    }

    /// Squared Frobenius distance summed over all arrays.
    pub fn distance_sq(&self, other: &NetworkParams) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.layers.iter().zip(&other.layers) {
            for (x, y) in a.weights.data().iter().zip(b.weights.data()) {
                acc += (x - y) * (x - y);
            }
            for (x, y) in a.biases.data().iter().zip(b.biases.data()) {
                acc += (x - y) * (x - y);
            }
        }
        acc
    }
}

/// Per-layer activations recorded by [`forward`]; `acts[0]` is the input and
/// `acts[i + 1]` the output of layer `i`.
#[derive(Clone, Debug, Default)]
pub struct ForwardCache {
    acts: Vec<Array>,
}

impl ForwardCache {
    pub fn output(&self) -> Option<&Array> {
        self.acts.last()
    }

    pub fn is_empty(&self) -> bool {
        self.acts.is_empty()
    }
}

/// Gradients of the loss with respect to parameters and to the network input.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub params: NetworkParams,
    pub input: Array,
}

pub fn forward(
    params: &NetworkParams,
    specs: &[LayerSpec],
    x: &Array,
) -> Result<(Array, ForwardCache)> {
    params.check_shapes(specs)?;
    let first = specs
        .first()
        .ok_or_else(|| Error::Config("network has no layers".into()))?;
    if x.len() != first.input_size() {
        return Err(Error::Shape {
            layer: 0,
            msg: format!(
                "input has {} values, layer expects {}",
                x.len(),
                first.input_size()
            ),
        });
    }
    let mut acts = Vec::with_capacity(specs.len() + 1);
    acts.push(x.clone());
    for (i, (spec, p)) in specs.iter().zip(&params.layers).enumerate() {
        let input = &acts[i];
        if input.len() != spec.input_size() {
            return Err(Error::Shape {
                layer: i,
                msg: format!(
                    "input has {} values, layer expects {}",
                    input.len(),
                    spec.input_size()
                ),
            });
        }
        let out = layer_forward(spec, p, input.data());
        let out = Array::new(spec.output_shape(), out)?;
        acts.push(out);
    }
    let y = acts.last().cloned().expect("at least one layer");
    Ok((y, ForwardCache { acts }))
}

pub fn backward(
    params: &NetworkParams,
    specs: &[LayerSpec],
    cache: &ForwardCache,
    loss_grad: &Array,
) -> Result<Gradients> {
    if cache.acts.len() != specs.len() + 1 {
        return Err(Error::State(
            "backward called without a matching forward pass".into(),
        ));
    }
    params.check_shapes(specs)?;
    let out = cache.acts.last().expect("non-empty");
    if loss_grad.len() != out.len() {
        return Err(Error::Shape {
            layer: specs.len() - 1,
            msg: format!(
                "loss gradient has {} values, output has {}",
                loss_grad.len(),
                out.len()
            ),
        });
    }
    let mut grads = NetworkParams::zeros(specs);
    let mut upstream = loss_grad.data().to_vec();
    for i in (0..specs.len()).rev() {
        let input = cache.acts[i].data();
        let output = cache.acts[i + 1].data();
        let g = &mut grads.layers[i];
        upstream = layer_backward(&specs[i], &params.layers[i], input, output, &upstream, g);
    }
    let input = Array::new(cache.acts[0].shape().to_vec(), upstream)?;
    Ok(Gradients {
        params: grads,
        input,
    })
}

fn layer_forward(spec: &LayerSpec, p: &LayerParams, x: &[f64]) -> Vec<f64> {
    match *spec {
        LayerSpec::Dense {
            in_size,
            out_size,
            activation,
        } => {
            let w = p.weights.data();
            let b = p.biases.data();
            (0..out_size)
                .map(|o| {
                    let row = &w[o * in_size..(o + 1) * in_size];
                    let z = b[o] + row.iter().zip(x).map(|(a, c)| a * c).sum::<f64>();
                    activation.apply(z)
                })
                .collect()
        }
        LayerSpec::Conv1d {
            in_channels,
            in_len,
            filter_count,
            kernel_size,
            stride,
            activation,
            ..
        } => {
            let out_len = spec.output_shape()[1];
            let pad = spec.pad_left();
            let w = p.weights.data();
            let b = p.biases.data();
            let mut out = vec![0.0; filter_count * out_len];
            for f in 0..filter_count {
                let wf = &w[f * in_channels * kernel_size..(f + 1) * in_channels * kernel_size];
                for t in 0..out_len {
                    let (k_lo, k_hi, start) = kernel_window(t, stride, pad, kernel_size, in_len);
                    let mut z = b[f];
                    for c in 0..in_channels {
                        let wk = &wf[c * kernel_size + k_lo..c * kernel_size + k_hi];
                        let xs = &x[c * in_len + start..c * in_len + start + (k_hi - k_lo)];
                        z += wk.iter().zip(xs).map(|(a, v)| a * v).sum::<f64>();
                    }
                    out[f * out_len + t] = activation.apply(z);
                }
            }
            out
        }
        LayerSpec::AvgPool1d {
            channels,
            in_len,
            window,
            stride,
        } => {
            let out_len = (in_len - window) / stride + 1;
            let mut out = vec![0.0; channels * out_len];
            for c in 0..channels {
                for t in 0..out_len {
                    let s = &x[c * in_len + t * stride..c * in_len + t * stride + window];
                    out[c * out_len + t] = s.iter().sum::<f64>() / window as f64;
                }
            }
            out
        }
        LayerSpec::Softmax { .. } => softmax(x),
    }
}

/// Valid kernel tap range `[k_lo, k_hi)` for output position `t`, and the input
/// index aligned with tap `k_lo`.
#[inline]
fn kernel_window(
    t: usize,
    stride: usize,
    pad: usize,
    kernel: usize,
    in_len: usize,
) -> (usize, usize, usize) {
    let origin = (t * stride) as isize - pad as isize;
    let k_lo = if origin < 0 { (-origin) as usize } else { 0 };
    let k_hi = ((in_len as isize - origin).max(0) as usize).min(kernel);
    let k_hi = k_hi.max(k_lo);
    (k_lo, k_hi, (origin + k_lo as isize) as usize)
}

fn layer_backward(
    spec: &LayerSpec,
    p: &LayerParams,
    x: &[f64],
    y: &[f64],
    dy: &[f64],
    g: &mut LayerParams,
) -> Vec<f64> {
    match *spec {
        LayerSpec::Dense {
            in_size,
            out_size,
            activation,
        } => {
            let w = p.weights.data();
            let mut dx = vec![0.0; in_size];
            let gw = g.weights.data_mut();
            for o in 0..out_size {
                let dz = dy[o] * activation.derivative_from_output(y[o]);
                if dz == 0.0 {
                    continue;
                }
                let row = &w[o * in_size..(o + 1) * in_size];
                let grow = &mut gw[o * in_size..(o + 1) * in_size];
                for i in 0..in_size {
                    grow[i] += dz * x[i];
                    dx[i] += dz * row[i];
                }
                g.biases.data_mut()[o] += dz;
            }
            dx
        }
        LayerSpec::Conv1d {
            in_channels,
            in_len,
            filter_count,
            kernel_size,
            stride,
            activation,
            ..
        } => {
            let out_len = spec.output_shape()[1];
            let pad = spec.pad_left();
            let w = p.weights.data();
            let mut dx = vec![0.0; in_channels * in_len];
            for f in 0..filter_count {
                let base = f * in_channels * kernel_size;
                let mut db = 0.0;
                for t in 0..out_len {
                    let dz =
                        dy[f * out_len + t] * activation.derivative_from_output(y[f * out_len + t]);
                    if dz == 0.0 {
                        continue;
                    }
                    db += dz;
                    let (k_lo, k_hi, start) = kernel_window(t, stride, pad, kernel_size, in_len);
                    let n = k_hi - k_lo;
                    for c in 0..in_channels {
                        let woff = base + c * kernel_size + k_lo;
                        let xoff = c * in_len + start;
                        let gw = &mut g.weights.data_mut()[woff..woff + n];
                        for (gk, xv) in gw.iter_mut().zip(&x[xoff..xoff + n]) {
                            *gk += dz * xv;
                        }
                        for (dxv, wk) in dx[xoff..xoff + n].iter_mut().zip(&w[woff..woff + n]) {
                            *dxv += dz * wk;
                        }
                    }
                }
                g.biases.data_mut()[f] += db;
            }
            dx
        }
        LayerSpec::AvgPool1d {
            channels,
            in_len,
            window,
            stride,
        } => {
            let out_len = (in_len - window) / stride + 1;
            let mut dx = vec![0.0; channels * in_len];
            let inv = 1.0 / window as f64;
            for c in 0..channels {
                for t in 0..out_len {
                    let d = dy[c * out_len + t] * inv;
                    for v in &mut dx[c * in_len + t * stride..c * in_len + t * stride + window] {
                        *v += d;
                    }
                }
            }
            dx
        }
        LayerSpec::Softmax { .. } => {
            let dot: f64 = y.iter().zip(dy).map(|(p, g)| p * g).sum();
            y.iter().zip(dy).map(|(p, g)| p * (g - dot)).collect()
        }
    }
}

/// Numerically stable softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Layer specs bundled with their parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub specs: Vec<LayerSpec>,
    pub params: NetworkParams,
}

impl Network {
    pub fn new<R: Rng + ?Sized>(specs: Vec<LayerSpec>, rng: &mut R) -> Result<Self> {
        let params = NetworkParams::init(&specs, rng)?;
        Ok(Self { specs, params })
    }

    pub fn from_parts(specs: Vec<LayerSpec>, params: NetworkParams) -> Result<Self> {
        validate_stack(&specs)?;
        params.check_shapes(&specs)?;
        Ok(Self { specs, params })
    }

    pub fn forward(&self, x: &Array) -> Result<(Array, ForwardCache)> {
        forward(&self.params, &self.specs, x)
    }

    pub fn predict(&self, x: &Array) -> Result<Array> {
        Ok(self.forward(x)?.0)
    }

    pub fn backward(&self, cache: &ForwardCache, loss_grad: &Array) -> Result<Gradients> {
        backward(&self.params, &self.specs, cache, loss_grad)
    }

    pub fn input_size(&self) -> usize {
        self.specs[0].input_size()
    }

    pub fn output_size(&self) -> usize {
        self.specs.last().map(|s| s.output_size()).unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::super::layer::{Activation, Padding};
    use super::*;
    use crate::rng::Stream;

    fn with_params(specs: Vec<LayerSpec>, layers: Vec<(Vec<f64>, Vec<f64>)>) -> Network {
        let mut params = NetworkParams::zeros(&specs);
        for (p, (w, b)) in params.layers.iter_mut().zip(layers) {
            p.weights.data_mut().copy_from_slice(&w);
            p.biases.data_mut().copy_from_slice(&b);
        }
        Network::from_parts(specs, params).unwrap()
    }

    #[test]
    fn dense_identity() {
        let net = with_params(
            vec![LayerSpec::dense(2, 2, Activation::Linear)],
            vec![(vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0])],
        );
        let y = net.predict(&Array::from_vec(vec![3.0, -1.0])).unwrap();
        assert_eq!(y.data(), &[3.0, -1.0]);
    }

    #[test]
    fn softmax_of_equal_logits_is_uniform() {
        let net = Network::from_parts(
            vec![LayerSpec::Softmax { size: 3 }],
            NetworkParams::zeros(&[LayerSpec::Softmax { size: 3 }]),
        )
        .unwrap();
        let y = net.predict(&Array::from_vec(vec![0.0; 3])).unwrap();
        for p in y.data() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn conv_sliding_dot_product() {
        // [1,1] over [1,2,3]: 1+2, 2+3.
        let net = with_params(
            vec![LayerSpec::conv1d(1, 3, 1, 2, Activation::Linear)],
            vec![(vec![1.0, 1.0], vec![0.0])],
        );
        let y = net.predict(&Array::from_vec(vec![1.0, 2.0, 3.0])).unwrap();
        assert_eq!(y.data(), &[3.0, 5.0]);
        assert_eq!(y.shape(), &[1, 2]);
    }

    #[test]
    fn same_padding_keeps_length() {
        let spec = LayerSpec::Conv1d {
            in_channels: 1,
            in_len: 4,
            filter_count: 1,
            kernel_size: 3,
            stride: 1,
            padding: Padding::Same,
            activation: Activation::Linear,
        };
        let net = with_params(vec![spec], vec![(vec![1.0, 1.0, 1.0], vec![0.0])]);
        let y = net
            .predict(&Array::from_vec(vec![1.0, 2.0, 3.0, 4.0]))
            .unwrap();
        assert_eq!(y.data(), &[3.0, 6.0, 9.0, 7.0]);
    }

    #[test]
    fn avgpool_of_constant_is_constant() {
        let spec = LayerSpec::AvgPool1d {
            channels: 2,
            in_len: 6,
            window: 3,
            stride: 2,
        };
        let net = Network::from_parts(vec![spec.clone()], NetworkParams::zeros(&[spec])).unwrap();
        let y = net.predict(&Array::from_vec(vec![2.5; 12])).unwrap();
        assert_eq!(y.shape(), &[2, 2]);
        assert!(y.data().iter().all(|v| *v == 2.5));
    }

    #[test]
    fn input_size_mismatch_is_config_error() {
        let mut rng = Stream::new(0, "t", 0);
        let net = Network::new(vec![LayerSpec::dense(3, 2, Activation::Tanh)], &mut rng).unwrap();
        match net.predict(&Array::from_vec(vec![1.0; 4])) {
            Err(Error::Shape { layer: 0, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn backward_without_forward_is_state_error() {
        let mut rng = Stream::new(0, "t", 0);
        let net = Network::new(vec![LayerSpec::dense(3, 2, Activation::Tanh)], &mut rng).unwrap();
        let err = net
            .backward(&ForwardCache::default(), &Array::from_vec(vec![1.0, 1.0]))
            .unwrap_err();
        assert!(matches!(err, Error::State(_)));
    }

    #[test]
    fn squared_error_at_optimum_has_zero_gradient() {
        let net = with_params(
            vec![LayerSpec::dense(2, 1, Activation::Linear)],
            vec![(vec![2.0, -1.0], vec![0.5])],
        );
        let x = Array::from_vec(vec![1.0, 3.0]);
        let (y, cache) = net.forward(&x).unwrap();
        let target = y.data()[0];
        let grad = super::super::loss::squared_error_grad(&y, &[target]).unwrap();
        let g = net.backward(&cache, &grad).unwrap();
        assert!(g.params.layers[0].weights.data().iter().all(|v| *v == 0.0));
        assert!(g.params.layers[0].biases.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn glorot_bounds_hold() {
        let mut rng = Stream::new(4, "init", 0);
        let specs = vec![LayerSpec::dense(10, 6, Activation::Tanh)];
        let p = NetworkParams::init(&specs, &mut rng).unwrap();
        let limit = (6.0f64 / 16.0).sqrt();
        assert!(p.layers[0].weights.data().iter().all(|w| w.abs() <= limit));
        let q = NetworkParams::init(&specs, &mut Stream::new(4, "init", 0)).unwrap();
        assert_eq!(p, q);
    }
}
