use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{IubrDataset, Spectrum};
use crate::nncore::{
    Activation, Array, Checkpoint, LayerParams, LayerSpec, Network, NetworkParams, Optimizer,
    Padding,
};
use crate::rng::Stream;
use crate::{Error, Result};

/// Real `N_m x N_s` matrix, row-major, applied to the real and imaginary
/// channels separately.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensingMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SensingMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Input(format!(
                "sensing matrix {rows}x{cols} given {} values",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("sensing matrix values must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    /// Entries drawn from N(0, 1/cols).
    pub fn gaussian(rows: usize, cols: usize, rng: &mut Stream) -> Self {
        let sd = 1.0 / (cols as f64).sqrt();
        let data = (0..rows * cols)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                sd * z
            })
            .collect();
        Self { rows, cols, data }
    }

    pub fn measurements(&self) -> usize {
        self.rows
    }

    pub fn subcarriers(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn compression_rate(&self) -> f64 {
        self.rows as f64 / self.cols as f64
    }

    pub fn frobenius_distance(&self, other: &SensingMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    fn as_params(&self) -> NetworkParams {
        NetworkParams {
            layers: vec![LayerParams {
                weights: Array::new(vec![self.rows, self.cols], self.data.clone())
                    .expect("shape matches"),
                biases: Array::zeros(&[0]),
            }],
        }
    }
}

/// `N_m x 2` measurement, channel-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    values: Vec<f64>,
}

impl Measurement {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn compress(signal: &Spectrum, matrix: &SensingMatrix) -> Result<Measurement> {
    let n = signal.subcarriers();
    if n != matrix.cols {
        return Err(Error::Input(format!(
            "signal has {n} subcarriers, sensing matrix expects {}",
            matrix.cols
        )));
    }
    let mut values = vec![0.0; 2 * matrix.rows];
    for (c, x) in [signal.re(), signal.im()].into_iter().enumerate() {
        for m in 0..matrix.rows {
            let row = &matrix.data[m * n..(m + 1) * n];
            values[c * matrix.rows + m] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
    Ok(Measurement { values })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IubrHyperParams {
    pub compression_rate: f64,
    pub filters: usize,
    pub kernel_size: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// When false the sensing matrix stays at its random initialization.
    pub train_matrix: bool,
    /// False-alarm rate the detection threshold is calibrated to.
    pub pf_target: f64,
}

impl Default for IubrHyperParams {
    fn default() -> Self {
        Self {
            compression_rate: 0.125,
            filters: 16,
            kernel_size: 9,
            learning_rate: 1e-3,
            batch_size: 32,
            epochs: 40,
            train_matrix: true,
            pf_target: 5e-3,
        }
    }
}

impl IubrHyperParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("iubr: {m}")));
        if !(self.compression_rate > 0.0 && self.compression_rate < 1.0) {
            return bad("compression_rate must be in (0, 1)");
        }
        if self.filters == 0 || self.kernel_size == 0 || self.batch_size == 0 {
            return bad("filters, kernel_size and batch_size must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.pf_target > 0.0 && self.pf_target < 1.0) {
            return bad("pf_target must be in (0, 1)");
        }
        Ok(())
    }

    pub fn measurements(&self, subcarriers: usize) -> Result<usize> {
        let m = (self.compression_rate * subcarriers as f64).round() as usize;
        if m == 0 || m >= subcarriers {
            return Err(Error::Config(format!(
                "compression rate {} gives {m} measurements for {subcarriers} subcarriers",
                self.compression_rate
            )));
        }
        Ok(m)
    }
}

/// Dense expansion `2 N_m -> 2 N_s`, then three same-length convolutions over
/// the real/imaginary channels.
pub fn reconstruction_architecture(
    measurements: usize,
    subcarriers: usize,
    filters: usize,
    kernel: usize,
) -> Vec<LayerSpec> {
    let conv = |cin, cout, activation| LayerSpec::Conv1d {
        in_channels: cin,
        in_len: subcarriers,
        filter_count: cout,
        kernel_size: kernel,
        stride: 1,
        padding: Padding::Same,
        activation,
    };
    vec![
        LayerSpec::dense(2 * measurements, 2 * subcarriers, Activation::Linear),
        conv(2, filters, Activation::Relu),
        conv(filters, filters, Activation::Relu),
        conv(filters, 2, Activation::Linear),
    ]
}

/// Sensing matrix plus reconstruction network.
#[derive(Clone, Debug, PartialEq)]
pub struct Codec {
    pub matrix: SensingMatrix,
    pub decoder: Network,
    /// Energy threshold for occupancy detection, once calibrated.
    pub threshold: Option<f64>,
}

impl Codec {
    pub fn new(subcarriers: usize, hp: &IubrHyperParams, seed: u64) -> Result<Self> {
        hp.validate()?;
        let m = hp.measurements(subcarriers)?;
        let matrix =
            SensingMatrix::gaussian(m, subcarriers, &mut Stream::new(seed, "iubr-matrix", 0));
        let specs = reconstruction_architecture(m, subcarriers, hp.filters, hp.kernel_size);
        let decoder = Network::new(specs, &mut Stream::new(seed, "iubr-init", 0))?;
        Ok(Self {
            matrix,
            decoder,
            threshold: None,
        })
    }

    pub fn subcarriers(&self) -> usize {
        self.matrix.cols
    }

    pub fn reconstruct(&self, measurement: &Measurement) -> Result<Spectrum> {
        if measurement.values.len() != self.decoder.input_size() {
            return Err(Error::Input(format!(
                "measurement has {} values, decoder expects {}",
                measurement.values.len(),
                self.decoder.input_size()
            )));
        }
        let y = self
            .decoder
            .predict(&Array::from_vec(measurement.values.clone()))?;
        Spectrum::new(y.into_data())
    }

    /// Compress then reconstruct.
    pub fn round_trip(&self, signal: &Spectrum) -> Result<Spectrum> {
        self.reconstruct(&compress(signal, &self.matrix)?)
    }

    pub fn round_trip_all(&self, data: &IubrDataset) -> Result<Vec<Spectrum>> {
        data.signals
            .par_iter()
            .map(|s| self.round_trip(&s.spectrum))
            .collect()
    }

    pub fn to_checkpoint(&self) -> Result<Checkpoint> {
        Checkpoint::from_network(&self.decoder)?
            .with_meta("sensing_matrix", &self.matrix)?
            .with_meta("threshold", self.threshold)
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let matrix: SensingMatrix = ck.meta_as("sensing_matrix")?;
        let matrix = SensingMatrix::new(matrix.rows, matrix.cols, matrix.data)?;
        let threshold: Option<f64> = ck.meta_as("threshold")?;
        let decoder = ck.network()?;
        if decoder.input_size() != 2 * matrix.rows || decoder.output_size() != 2 * matrix.cols {
            return Err(Error::Input(
                "decoder shape does not match the sensing matrix".into(),
            ));
        }
        Ok(Self {
            matrix,
            decoder,
            threshold,
        })
    }
}

/// Mean squared error per element; entry 0 is the initial model over the whole
/// training set, later entries average the minibatch losses of each epoch.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LossCurve {
    pub mse: Vec<f64>,
}

pub fn mean_mse(codec: &Codec, data: &IubrDataset) -> Result<f64> {
    let errs = data
        .signals
        .par_iter()
        .map(|s| {
            let r = codec.round_trip(&s.spectrum)?;
            Ok(mse(r.values(), s.spectrum.values()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(errs.iter().sum::<f64>() / errs.len().max(1) as f64)
}

pub(crate) fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// Loss, decoder gradient and sensing-matrix gradient for one signal.
fn sample_grads(
    codec: &Codec,
    x: &[f64],
    want_matrix: bool,
) -> Result<(f64, NetworkParams, Option<Vec<f64>>)> {
    let (n, m) = (codec.matrix.cols, codec.matrix.rows);
    let spectrum = Spectrum::new(x.to_vec())?;
    let y = compress(&spectrum, &codec.matrix)?;
    let (out, cache) = codec.decoder.forward(&Array::from_vec(y.values))?;
    let scale = 2.0 / out.len() as f64;
    let loss = mse(out.data(), x);
    let g_out: Vec<f64> = out
        .data()
        .iter()
        .zip(x)
        .map(|(o, t)| scale * (o - t))
        .collect();
    let grads = codec
        .decoder
        .backward(&cache, &Array::new(out.shape().to_vec(), g_out)?)?;
    let g_matrix = want_matrix.then(|| {
        let gy = grads.input.data();
        let mut g = vec![0.0; m * n];
        for c in 0..2 {
            let xc = &x[c * n..(c + 1) * n];
            for r in 0..m {
                let gr = gy[c * m + r];
                for (gv, xv) in g[r * n..(r + 1) * n].iter_mut().zip(xc) {
                    *gv += gr * xv;
                }
            }
        }
        g
    });
    Ok((loss, grads.params, g_matrix))
}

/// Joint minibatch training of the sensing matrix and decoder on reconstruction MSE.
pub fn train_end_to_end(
    data: &IubrDataset,
    hp: &IubrHyperParams,
    seed: u64,
) -> Result<(Codec, LossCurve)> {
    if data.is_empty() {
        return Err(Error::Input("training set is empty".into()));
    }
    hp.validate()?;
    let n = data.subcarriers().expect("nonempty");
    if data.signals.iter().any(|s| s.spectrum.subcarriers() != n) {
        return Err(Error::Input(
            "signals have differing subcarrier counts".into(),
        ));
    }
    let mut codec = Codec::new(n, hp, seed)?;
    let mut dec_opt = Optimizer::rmsprop(&codec.decoder.params, hp.learning_rate)?;
    let mut matrix_params = codec.matrix.as_params();
    let mut mat_opt = Optimizer::rmsprop(&matrix_params, hp.learning_rate)?;
    let mut curve = LossCurve {
        mse: vec![mean_mse(&codec, data)?],
    };
    let mut order: Vec<usize> = (0..data.len()).collect();
    for epoch in 0..hp.epochs {
        let mut rng = Stream::new(seed, "iubr-shuffle", epoch as u64);
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        for batch in order.chunks(hp.batch_size) {
            let terms = batch
                .par_iter()
                .map(|&i| sample_grads(&codec, data.signals[i].spectrum.values(), hp.train_matrix))
                .collect::<Result<Vec<_>>>()?;
            let inv = 1.0 / batch.len() as f64;
            let mut g_dec = NetworkParams::zeros(&codec.decoder.specs);
            let mut g_mat = vec![0.0; codec.matrix.data.len()];
            for (loss, g, gm) in &terms {
                epoch_loss += loss;
                g_dec.add_assign(g);
                if let Some(gm) = gm {
                    for (a, b) in g_mat.iter_mut().zip(gm) {
                        *a += b;
                    }
                }
            }
            g_dec.scale(inv);
            dec_opt.step(&mut codec.decoder.params, &g_dec)?;
            if hp.train_matrix {
                let g = NetworkParams {
                    layers: vec![LayerParams {
                        weights: Array::new(
                            vec![codec.matrix.rows, codec.matrix.cols],
                            g_mat.iter().map(|v| v * inv).collect(),
                        )?,
                        biases: Array::zeros(&[0]),
                    }],
                };
                mat_opt.step(&mut matrix_params, &g)?;
                codec
                    .matrix
                    .data
                    .copy_from_slice(matrix_params.layers[0].weights.data());
            }
        }
        let mean = epoch_loss / data.len() as f64;
        if !mean.is_finite() {
            return Err(Error::training(
                "iubr",
                format!("loss diverged at epoch {}", epoch + 1),
            ));
        }
        curve.mse.push(mean);
    }
    Ok((codec, curve))
}
