use serde::Serialize;

use num_complex::Complex64;

use crate::amc::{complex_correntropy, AmcModel};
use crate::iubr::{Codec, Spectrum};
use crate::ldpc::{DecoderChoice, LdpcCode};
use crate::rng::Stream;
use crate::sigchain::{llr, IqSequence, Modulation, NoiseConfig};
use crate::{Error, Result};

/// Lower bound on the estimated noise variance, so a clean input still
/// yields finite LLRs.
pub const NOISE_VARIANCE_FLOOR: f64 = 1e-3;

/// Trained models the receive chain needs.
#[derive(Clone, Debug)]
pub struct ReceiverModels {
    pub amc: AmcModel,
    pub kernel_sigma: f64,
    pub code: LdpcCode,
    pub decoder: DecoderChoice,
    pub layers: usize,
    /// When set, the classifier sees the stream after a compress and
    /// reconstruct pass through this codec; demodulation still uses the raw
    /// samples.
    pub front_end: Option<Codec>,
}

/// Per-stage decisions of one `e2e_receive` call.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageReport {
    pub predicted: Modulation,
    /// Whether classification ran on a reconstructed stream.
    pub reconstructed: bool,
    /// Class probabilities in the classifier's class order.
    pub probabilities: Vec<(Modulation, f64)>,
    /// Scheme used for demodulation; differs from `predicted` only when forced.
    pub demodulated_as: Modulation,
    pub noise_variance: f64,
    pub frames: usize,
    /// Trailing LLRs that did not fill a whole frame.
    pub dropped_llrs: usize,
    /// Frames whose decoded word satisfies every parity check.
    pub valid_frames: usize,
    /// Fraction of truth bits matched by channel hard decisions.
    pub pre_agreement: Option<f64>,
    /// Fraction of truth bits matched after decoding.
    pub post_agreement: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReceiveOutput {
    /// Decoded codeword bits, frame after frame.
    pub bits: Vec<u8>,
    pub report: StageReport,
}

/// Second-moment noise estimate for a unit-power constellation behind an
/// ideal gain control: `E|y|^2 - 1`, floored.
pub fn estimate_noise_variance(iq: &IqSequence) -> f64 {
    (iq.mean_power() - 1.0).max(NOISE_VARIANCE_FLOOR)
}

fn agreement(a: &[u8], truth: &[u8]) -> Option<f64> {
    let n = a.len().min(truth.len());
    (n > 0).then(|| a.iter().zip(truth).filter(|(x, y)| x == y).count() as f64 / n as f64)
}

/// Passes each whole block of `codec.subcarriers()` samples through
/// compression and reconstruction; a trailing partial block is kept as is.
pub fn reconstruct_stream(iq: &IqSequence, codec: &Codec) -> Result<IqSequence> {
    let n = codec.subcarriers();
    let mut out = Vec::with_capacity(iq.samples().len());
    for block in iq.samples().chunks(n) {
        if block.len() < n {
            out.extend_from_slice(block);
            continue;
        }
        let values = block
            .iter()
            .map(|c| c.re)
            .chain(block.iter().map(|c| c.im))
            .collect();
        let est = codec.round_trip(&Spectrum::new(values)?)?;
        out.extend(
            est.re()
                .iter()
                .zip(est.im())
                .map(|(&re, &im)| Complex64::new(re, im)),
        );
    }
    IqSequence::new(out)
}

/// Correntropy, classification, demodulation under the predicted scheme (or
/// `force`), noise estimation, LLRs and frame-by-frame decoding. Input is
/// assumed symbol-aligned and phase-synchronized.
pub fn e2e_receive(
    iq: &IqSequence,
    models: &ReceiverModels,
    force: Option<Modulation>,
    truth: Option<&[u8]>,
) -> Result<ReceiveOutput> {
    let classified = match &models.front_end {
        Some(codec) => reconstruct_stream(iq, codec)?,
        None => iq.clone(),
    };
    let feature = complex_correntropy(&classified, models.kernel_sigma, models.amc.feature_len())?;
    let (predicted, probs) = models.amc.classify(&feature.values)?;
    let scheme = force.unwrap_or(predicted);
    let noise_variance = estimate_noise_variance(iq);
    let channel = llr(iq, scheme, noise_variance)?;
    let n = models.code.n();
    let frames = channel.len() / n;
    if frames == 0 {
        return Err(Error::Pipeline(format!(
            "{} LLRs under {scheme} do not fill one {n}-bit frame",
            channel.len()
        )));
    }
    let usable = &channel[..frames * n];
    let mut bits = Vec::with_capacity(usable.len());
    let mut valid_frames = 0;
    for frame in usable.chunks(n) {
        let word = models.decoder.decode(&models.code, frame, models.layers)?;
        valid_frames += usize::from(models.code.h.is_codeword(&word)?);
        bits.extend(word);
    }
    let hard: Vec<u8> = usable.iter().map(|v| u8::from(*v < 0.0)).collect();
    let report = StageReport {
        predicted,
        reconstructed: models.front_end.is_some(),
        probabilities: models.amc.class_names.iter().copied().zip(probs).collect(),
        demodulated_as: scheme,
        noise_variance,
        frames,
        dropped_llrs: channel.len() - usable.len(),
        valid_frames,
        pre_agreement: truth.and_then(|t| agreement(&hard, t)),
        post_agreement: truth.and_then(|t| agreement(&bits, t)),
    };
    Ok(ReceiveOutput { bits, report })
}

/// `frames` random codewords, modulated and passed through AWGN at `ebn0_db`
/// per information bit (`inf` for a clean channel). Returns the stream and the
/// transmitted codeword bits.
pub fn synthesize_stream(
    code: &LdpcCode,
    scheme: Modulation,
    frames: usize,
    ebn0_db: f64,
    rng: &mut Stream,
) -> Result<(IqSequence, Vec<u8>)> {
    if frames == 0 {
        return Err(Error::Input("at least one frame is required".into()));
    }
    let mut bits = Vec::with_capacity(frames * code.n());
    for _ in 0..frames {
        bits.extend(code.random_codeword(rng));
    }
    let b = scheme.bits_per_symbol();
    let pad = (b - bits.len() % b) % b;
    let mut padded = bits.clone();
    padded.extend(std::iter::repeat_n(0u8, pad));
    let tx = scheme.modulate(&padded)?;
    let variance = 1.0 / (b as f64 * code.rate() * 10f64.powf(ebn0_db / 10.0));
    let rx = tx.add_noise(&NoiseConfig::Awgn { variance }, rng)?;
    Ok((rx, bits))
}
