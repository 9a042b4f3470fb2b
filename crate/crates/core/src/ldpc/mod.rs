//! LDPC codes from lifted protographs, a systematic GF(2) encoder, and an
//! unrolled min-sum decoder with trainable per-layer normalization and offset.

mod basegraph;
mod code;
mod decoder;
mod encoder;
mod eval;
mod llrfile;
mod matrix;
mod tanner;
mod train;

pub use basegraph::BaseGraph;
pub use code::{bpsk_awgn_llr, noise_variance, LdpcCode};
pub use decoder::{
    classic_min_sum_decode, classic_min_sum_run, neural_ms_decode, neural_ms_run, DecodeOutput,
    LayerTrace, NeuralMsParams, LLR_CLIP,
};
pub use encoder::Encoder;
pub use eval::{ber_eval, ci95_halfwidth, write_ber_csv, BerRow, DecoderChoice};
pub use llrfile::{read_llr_csv, write_bits_csv, write_llr_csv};
pub use matrix::ParityCheckMatrix;
pub use tanner::TannerGraph;
pub use train::{
    bce_sum, draw_samples, train_iteration_by_iteration, LayerTraining, Sample, TrainReport,
    TrainSchedule,
};

use crate::nncore::{Array, Checkpoint, LayerParams};
use crate::{Error, Result};

impl NeuralMsParams {
    /// Stored as one parameter pair: weights hold alpha, biases hold beta.
    pub fn to_checkpoint(&self) -> Result<Checkpoint> {
        self.validate()?;
        Checkpoint::parameters_only(vec![LayerParams {
            weights: Array::from_vec(self.alpha.clone()),
            biases: Array::from_vec(self.beta.clone()),
        }])?
        .with_meta("layers", self.layers())
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let layers: usize = ck.meta_as("layers")?;
        let [p] = ck.arrays.as_slice() else {
            return Err(Error::Input(
                "decoder checkpoint must hold one parameter pair".into(),
            ));
        };
        let params = Self {
            alpha: p.weights.data().to_vec(),
            beta: p.biases.data().to_vec(),
        };
        if params.alpha.len() != layers {
            return Err(Error::Input(format!(
                "checkpoint declares {layers} layers but stores {}",
                params.alpha.len()
            )));
        }
        params.validate()?;
        Ok(params)
    }
}
