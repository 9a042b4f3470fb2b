use rand::Rng;
use serde::{Deserialize, Serialize};

use super::code::{bpsk_awgn_llr, LdpcCode};
use super::decoder::{
    check_extrinsics, check_input, check_message, output_llr, var_update_fast, NeuralMsParams,
};
use crate::rng::Stream;
use crate::{Error, Result};

const ALPHA_FLOOR: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSchedule {
    pub layers: usize,
    pub epochs: usize,
    pub batches_per_epoch: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub ebn0_min_db: f64,
    pub ebn0_max_db: f64,
    /// Fraction of training codewords that are all-zero; the rest are random.
    pub zero_codeword_fraction: f64,
    /// Codewords in the fixed set used for per-layer loss reporting.
    pub eval_size: usize,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        Self {
            layers: 10,
            epochs: 30,
            batches_per_epoch: 10,
            batch_size: 64,
            learning_rate: 0.01,
            ebn0_min_db: 1.0,
            ebn0_max_db: 4.0,
            zero_codeword_fraction: 0.5,
            eval_size: 256,
        }
    }
}

impl TrainSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = self.layers >= 1
            && self.epochs >= 1
            && self.batches_per_epoch >= 1
            && self.batch_size >= 1
            && self.eval_size >= 1
            && self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && self.ebn0_min_db <= self.ebn0_max_db
            && self.ebn0_min_db.is_finite()
            && self.ebn0_max_db.is_finite()
            && (0.0..=1.0).contains(&self.zero_codeword_fraction);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid ldpc training schedule: {self:?}"
            )))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerTraining {
    /// Loss on the fixed evaluation set with the layer at its initial values.
    pub initial_loss: f64,
    pub final_loss: f64,
    /// Mean training loss per epoch.
    pub epoch_losses: Vec<f64>,
    /// Set when training ended above the initial loss and the layer was reset.
    pub reverted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub layers: Vec<LayerTraining>,
}

impl TrainReport {
    /// Final evaluation loss per layer count.
    pub fn loss_curve(&self) -> Vec<f64> {
        self.layers.iter().map(|l| l.final_loss).collect()
    }
}

/// A training example: bits and channel LLRs.
#[derive(Clone, Debug)]
pub struct Sample {
    pub bits: Vec<u8>,
    pub llr: Vec<f64>,
}

fn draw_sample(code: &LdpcCode, sched: &TrainSchedule, rng: &mut Stream) -> Result<Sample> {
    let bits = if rng.random::<f64>() < sched.zero_codeword_fraction {
        vec![0u8; code.n()]
    } else {
        code.random_codeword(rng)
    };
    let ebn0 = if sched.ebn0_max_db > sched.ebn0_min_db {
        rng.random_range(sched.ebn0_min_db..sched.ebn0_max_db)
    } else {
        sched.ebn0_min_db
    };
    let llr = bpsk_awgn_llr(&bits, ebn0, code.rate(), rng)?;
    Ok(Sample { bits, llr })
}

pub fn draw_samples(
    code: &LdpcCode,
    sched: &TrainSchedule,
    count: usize,
    rng: &Stream,
) -> Result<Vec<Sample>> {
    (0..count)
        .map(|i| draw_sample(code, sched, &mut rng.derive("codeword", i as u64)))
        .collect()
}

/// `softplus(x) = ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Loss contribution of one bit and `o = P(bit = 1) = 1 / (1 + e^{llr})`,
/// sharing a single exponential.
fn bce_term(llr: f64, bit: u8) -> (f64, f64) {
    let e = (-llr.abs()).exp();
    let o = if llr >= 0.0 {
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + e)
    };
    let sp_pos = llr.max(0.0) + e.ln_1p();
    let sp_neg = (-llr).max(0.0) + e.ln_1p();
    (if bit == 1 { sp_pos } else { sp_neg }, o)
}

/// Binary cross-entropy of `P(bit = 1) = 1 / (1 + e^{llr})` against the bits,
/// summed (not averaged).
pub fn bce_sum(llr: &[f64], bits: &[u8]) -> f64 {
    llr.iter()
        .zip(bits)
        .map(|(z, x)| if *x == 1 { softplus(*z) } else { softplus(-*z) })
        .sum()
}

/// Prefix state of a sample after the frozen layers: the extrinsic sign and
/// minimum feeding the trainable layer's check update.
struct LastLayerInputs {
    llr: Vec<f64>,
    signs: Vec<f64>,
    mins: Vec<f64>,
}

fn prefix(
    code: &LdpcCode,
    params: &NeuralMsParams,
    layer: usize,
    llr: &[f64],
) -> Result<LastLayerInputs> {
    let g = &code.graph;
    let llr = check_input(llr, g)?;
    let n_e = g.n_edges();
    let mut chk = vec![0.0; n_e];
    let mut var = vec![0.0; n_e];
    let mut signs = vec![0.0; n_e];
    let mut mins = vec![0.0; n_e];
    for i in 0..=layer {
        var_update_fast(g, &llr, &chk, &mut var);
        check_extrinsics(g, &var, &mut signs, &mut mins);
        if i < layer {
            for e in 0..n_e {
                chk[e] = check_message(signs[e], mins[e], params.alpha[i], params.beta[i]);
            }
        }
    }
    Ok(LastLayerInputs { llr, signs, mins })
}

/// Summed loss and gradient with respect to `(alpha, beta)` of the last layer.
fn last_layer_terms(
    code: &LdpcCode,
    inp: &LastLayerInputs,
    bits: &[u8],
    alpha: f64,
    beta: f64,
) -> (f64, f64, f64) {
    let g = &code.graph;
    let chk: Vec<f64> = inp
        .signs
        .iter()
        .zip(&inp.mins)
        .map(|(s, m)| check_message(*s, *m, alpha, beta))
        .collect();
    let out = output_llr(g, &inp.llr, &chk);
    let (mut loss, mut ga, mut gb) = (0.0, 0.0, 0.0);
    for v in 0..g.n_vars() {
        let (l, o) = bce_term(out[v], bits[v]);
        loss += l;
        let dz = f64::from(bits[v]) - o;
        for &e in g.var_edges(v) {
            let (s, m) = (inp.signs[e], inp.mins[e]);
            if alpha * m > beta {
                ga += dz * s * m;
                gb -= dz * s;
            }
        }
    }
    (loss, ga, gb)
}

fn mean_loss(code: &LdpcCode, inputs: &[(LastLayerInputs, &[u8])], alpha: f64, beta: f64) -> f64 {
    let total: f64 = inputs
        .iter()
        .map(|(inp, bits)| last_layer_terms(code, inp, bits, alpha, beta).0)
        .sum();
    total / (inputs.len() * code.n()) as f64
}

/// Trains layer `P = 1..L` in turn with layers before `P` frozen. Each layer
/// starts at `alpha = 1`, `beta = 0`; if its final evaluation loss exceeds the
/// starting loss it is reset to those values.
pub fn train_iteration_by_iteration(
    code: &LdpcCode,
    sched: &TrainSchedule,
    seed: u64,
) -> Result<(NeuralMsParams, TrainReport)> {
    sched.validate()?;
    let mut params = NeuralMsParams::unit(sched.layers);
    let eval = draw_samples(
        code,
        sched,
        sched.eval_size,
        &Stream::new(seed, "ldpc-eval-set", 0),
    )?;
    let mut report = TrainReport { layers: Vec::new() };
    for layer in 0..sched.layers {
        let eval_inputs = eval
            .iter()
            .map(|s| Ok((prefix(code, &params, layer, &s.llr)?, s.bits.as_slice())))
            .collect::<Result<Vec<_>>>()?;
        let (a0, b0) = (params.alpha[layer], params.beta[layer]);
        let initial_loss = mean_loss(code, &eval_inputs, a0, b0);
        let (mut alpha, mut beta) = (a0, b0);
        let mut epoch_losses = Vec::with_capacity(sched.epochs);
        for epoch in 0..sched.epochs {
            let mut epoch_loss = 0.0;
            for batch in 0..sched.batches_per_epoch {
                let index =
                    ((layer * sched.epochs + epoch) * sched.batches_per_epoch + batch) as u64;
                let samples = draw_samples(
                    code,
                    sched,
                    sched.batch_size,
                    &Stream::new(seed, "ldpc-train-batch", index),
                )?;
                let (mut loss, mut ga, mut gb) = (0.0, 0.0, 0.0);
                for s in &samples {
                    let inp = prefix(code, &params, layer, &s.llr)?;
                    let (l, a, b) = last_layer_terms(code, &inp, &s.bits, alpha, beta);
                    loss += l;
                    ga += a;
                    gb += b;
                }
                let n = (samples.len() * code.n()) as f64;
                let (loss, ga, gb) = (loss / n, ga / n, gb / n);
                if !(loss.is_finite() && ga.is_finite() && gb.is_finite()) {
                    return Err(Error::training(
                        format!("ldpc layer {}", layer + 1),
                        format!("non-finite loss or gradient in epoch {}", epoch + 1),
                    ));
                }
                alpha = (alpha - sched.learning_rate * ga).max(ALPHA_FLOOR);
                beta = (beta - sched.learning_rate * gb).max(0.0);
                epoch_loss += loss;
            }
            epoch_losses.push(epoch_loss / sched.batches_per_epoch as f64);
        }
        let mut final_loss = mean_loss(code, &eval_inputs, alpha, beta);
        let reverted = final_loss > initial_loss;
        if reverted {
            alpha = a0;
            beta = b0;
            final_loss = initial_loss;
        }
        params.alpha[layer] = alpha;
        params.beta[layer] = beta;
        report.layers.push(LayerTraining {
            initial_loss,
            final_loss,
            epoch_losses,
            reverted,
        });
    }
    Ok((params, report))
}
