use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::correntropy::normalize_by_max;
use super::dataset::AmcDataset;
use crate::nncore::{
    cross_entropy, cross_entropy_grad, one_hot, Activation, Array, Checkpoint, LayerSpec, Network,
    NetworkParams, Optimizer,
};
use crate::rng::Stream;
use crate::sigchain::Modulation;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AmcHyperParams {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub conv1_filters: usize,
    pub conv1_kernel: usize,
    pub conv2_filters: usize,
    pub conv2_kernel: usize,
    pub optimizer: AmcOptimizer,
    /// Log-compress features before scaling; useful when training SNRs span
    /// tens of dB.
    pub log_features: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmcOptimizer {
    Sgd,
    Rmsprop,
}

impl Default for AmcHyperParams {
    fn default() -> Self {
        Self {
            epochs: 30,
            learning_rate: 1e-3,
            batch_size: 16,
            conv1_filters: 16,
            conv1_kernel: 8,
            conv2_filters: 8,
            conv2_kernel: 100,
            optimizer: AmcOptimizer::Rmsprop,
            log_features: false,
        }
    }
}

/// Two convolutions, full-length average pooling, dense, softmax.
pub fn amc_architecture(
    feature_len: usize,
    classes: usize,
    hp: &AmcHyperParams,
) -> Result<Vec<LayerSpec>> {
    if hp.conv1_kernel > feature_len {
        return Err(Error::Config(format!(
            "first kernel {} longer than the {feature_len}-tap feature",
            hp.conv1_kernel
        )));
    }
    let len1 = feature_len - hp.conv1_kernel + 1;
    let k2 = hp.conv2_kernel.min(len1);
    let len2 = len1 - k2 + 1;
    Ok(vec![
        LayerSpec::conv1d(
            1,
            feature_len,
            hp.conv1_filters,
            hp.conv1_kernel,
            Activation::Relu,
        ),
        LayerSpec::conv1d(
            hp.conv1_filters,
            len1,
            hp.conv2_filters,
            k2,
            Activation::Relu,
        ),
        LayerSpec::global_avg_pool(hp.conv2_filters, len2),
        LayerSpec::dense(hp.conv2_filters, classes, Activation::Linear),
        LayerSpec::Softmax { size: classes },
    ])
}

/// Smallest value taken before a log; correntropy taps are positive.
const LOG_FLOOR: f64 = 1e-12;

/// Per-tap affine map fitted on max-normalized training features, optionally
/// after a natural log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub mean: Vec<f64>,
    pub inv_std: Vec<f64>,
    #[serde(default)]
    pub log: bool,
}

fn compress(v: f64, log: bool) -> f64 {
    if log {
        v.max(LOG_FLOOR).ln()
    } else {
        v
    }
}

impl FeatureScaler {
    pub fn fit(features: &[Vec<f64>], log: bool) -> Self {
        let compressed: Vec<Vec<f64>>;
        let features = if log {
            compressed = features
                .iter()
                .map(|f| f.iter().map(|v| compress(*v, true)).collect())
                .collect();
            &compressed
        } else {
            features
        };
        let l = features.first().map(Vec::len).unwrap_or(0);
        let n = features.len().max(1) as f64;
        let mut mean = vec![0.0; l];
        for f in features {
            for (m, v) in mean.iter_mut().zip(f) {
                *m += v / n;
            }
        }
        let mut var = vec![0.0; l];
        for f in features {
            for ((s, v), m) in var.iter_mut().zip(f).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        let inv_std = var
            .iter()
            .map(|v| {
                if v.sqrt() > 1e-12 {
                    1.0 / v.sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        Self { mean, inv_std, log }
    }

    pub fn apply(&self, normalized: &[f64]) -> Vec<f64> {
        normalized
            .iter()
            .zip(&self.mean)
            .zip(&self.inv_std)
            .map(|((v, m), s)| (compress(*v, self.log) - m) * s)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmcModel {
    pub network: Network,
    pub class_names: Vec<Modulation>,
    pub scaler: FeatureScaler,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingCurve {
    /// Mean training loss; entry 0 is before the first update.
    pub loss: Vec<f64>,
    pub accuracy: Vec<f64>,
}

impl AmcModel {
    pub fn feature_len(&self) -> usize {
        self.network.input_size()
    }

    /// Class index and probabilities for a raw correntropy feature.
    pub fn classify(&self, feature: &[f64]) -> Result<(Modulation, Vec<f64>)> {
        if feature.len() != self.feature_len() {
            return Err(Error::Input(format!(
                "feature has {} taps, model expects {}",
                feature.len(),
                self.feature_len()
            )));
        }
        let p = self
            .network
            .predict(&Array::from_vec(self.network_input(feature)))?;
        Ok((self.class_names[p.argmax()], p.into_data()))
    }

    /// Max normalization followed by the fitted per-tap scaling.
    pub fn network_input(&self, feature: &[f64]) -> Vec<f64> {
        self.scaler.apply(&normalize_by_max(feature))
    }

    pub fn to_checkpoint(&self) -> Result<Checkpoint> {
        Checkpoint::from_network(&self.network)?
            .with_meta("class_names", &self.class_names)?
            .with_meta("scaler", &self.scaler)
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let class_names: Vec<Modulation> = ck.meta_as("class_names")?;
        let scaler: FeatureScaler = ck.meta_as("scaler")?;
        let network = ck.network()?;
        if network.output_size() != class_names.len() {
            return Err(Error::Input(
                "class list does not match the output layer".into(),
            ));
        }
        if scaler.mean.len() != network.input_size() || scaler.inv_std.len() != network.input_size()
        {
            return Err(Error::Input(
                "feature scaler does not match the input layer".into(),
            ));
        }
        Ok(Self {
            network,
            class_names,
            scaler,
        })
    }
}

fn sample_terms(net: &Network, x: &[f64], label: &Array) -> Result<(f64, bool, NetworkParams)> {
    let (p, cache) = net.forward(&Array::from_vec(x.to_vec()))?;
    let loss = cross_entropy(&p, label)?;
    let correct = label.data()[p.argmax()] == 1.0;
    let g = net.backward(&cache, &cross_entropy_grad(&p, label)?)?;
    Ok((loss, correct, g.params))
}

fn evaluate(net: &Network, data: &[(Vec<f64>, Array)]) -> Result<(f64, f64)> {
    let terms = data
        .par_iter()
        .map(|(x, y)| {
            let p = net.predict(&Array::from_vec(x.clone()))?;
            Ok((cross_entropy(&p, y)?, y.data()[p.argmax()] == 1.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = data.len() as f64;
    let loss = terms.iter().map(|t| t.0).sum::<f64>() / n;
    let acc = terms.iter().filter(|t| t.1).count() as f64 / n;
    Ok((loss, acc))
}

/// Minibatch training on cross-entropy. Per-example gradients may be computed in
/// parallel; they are summed in batch order so results match a serial run.
pub fn train(
    data: &AmcDataset,
    hp: &AmcHyperParams,
    seed: u64,
) -> Result<(AmcModel, TrainingCurve)> {
    let classes = data.classes();
    if classes.len() < 2 {
        return Err(Error::Input(format!(
            "training needs at least 2 classes, found {}",
            classes.len()
        )));
    }
    if hp.epochs == 0 || hp.batch_size == 0 {
        return Err(Error::Config(
            "epochs and batch_size must be at least 1".into(),
        ));
    }
    let l = data.feature_len().unwrap_or(0);
    if data.examples.iter().any(|e| e.features.len() != l) {
        return Err(Error::Input(
            "examples have differing feature lengths".into(),
        ));
    }
    let specs = amc_architecture(l, classes.len(), hp)?;
    let mut net = Network::new(specs, &mut Stream::new(seed, "amc-init", 0))?;
    let normalized: Vec<Vec<f64>> = data
        .examples
        .iter()
        .map(|e| normalize_by_max(&e.features))
        .collect();
    let scaler = FeatureScaler::fit(&normalized, hp.log_features);
    let samples: Vec<(Vec<f64>, Array)> = data
        .examples
        .iter()
        .zip(&normalized)
        .map(|(e, x)| {
            let c = classes
                .iter()
                .position(|m| *m == e.label)
                .expect("label listed");
            (scaler.apply(x), one_hot(c, classes.len()))
        })
        .collect();

    let mut opt = match hp.optimizer {
        AmcOptimizer::Sgd => Optimizer::sgd(hp.learning_rate)?,
        AmcOptimizer::Rmsprop => Optimizer::rmsprop(&net.params, hp.learning_rate)?,
    };
    let mut curve = TrainingCurve::default();
    let (loss, acc) = evaluate(&net, &samples)?;
    curve.loss.push(loss);
    curve.accuracy.push(acc);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    for epoch in 0..hp.epochs {
        let mut rng = Stream::new(seed, "amc-shuffle", epoch as u64);
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        for batch in order.chunks(hp.batch_size) {
            let terms = batch
                .par_iter()
                .map(|&i| sample_terms(&net, &samples[i].0, &samples[i].1))
                .collect::<Result<Vec<_>>>()?;
            let mut grads = NetworkParams::zeros(&net.specs);
            for (_, _, g) in &terms {
                grads.add_assign(g);
            }
            grads.scale(1.0 / batch.len() as f64);
            opt.step(&mut net.params, &grads)?;
        }
        let (loss, acc) = evaluate(&net, &samples)?;
        if !loss.is_finite() {
            return Err(Error::training(
                "amc",
                format!("loss diverged at epoch {}", epoch + 1),
            ));
        }
        curve.loss.push(loss);
        curve.accuracy.push(acc);
    }
    Ok((
        AmcModel {
            network: net,
            class_names: classes,
            scaler,
        },
        curve,
    ))
}

/// Counts indexed `[true][predicted]` over the model's class list.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfusionMatrix {
    pub classes: Vec<Modulation>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let correct: usize = (0..self.classes.len()).map(|i| self.counts[i][i]).sum();
        if self.total() == 0 {
            0.0
        } else {
            correct as f64 / self.total() as f64
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["true_class".to_string()];
        header.extend(self.classes.iter().map(|c| c.name().to_string()));
        w.write_record(&header)?;
        for (c, row) in self.classes.iter().zip(&self.counts) {
            let mut rec = vec![c.name().to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<confusion csv>", e))
    }
}

pub fn confusion(model: &AmcModel, data: &AmcDataset) -> Result<ConfusionMatrix> {
    let k = model.class_names.len();
    let preds = data
        .examples
        .par_iter()
        .map(|e| model.classify(&e.features).map(|(m, _)| m))
        .collect::<Result<Vec<_>>>()?;
    let mut counts = vec![vec![0usize; k]; k];
    for (e, p) in data.examples.iter().zip(preds) {
        let t = model
            .class_names
            .iter()
            .position(|m| *m == e.label)
            .ok_or_else(|| Error::Input(format!("label {} unknown to the model", e.label)))?;
        let q = model
            .class_names
            .iter()
            .position(|m| *m == p)
            .expect("model class");
        counts[t][q] += 1;
    }
    Ok(ConfusionMatrix {
        classes: model.class_names.clone(),
        counts,
    })
}
