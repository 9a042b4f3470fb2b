use std::io::Write;

use super::codec::{mse, Codec};
use super::dataset::{IubrDataset, Spectrum, SpectrumSignal};
use crate::csvfmt::{fmt_f64, fmt_opt};
use crate::{Error, Result};

pub const SSIM_WINDOW: usize = 8;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

pub fn detect(estimate: &Spectrum, threshold: f64) -> Result<Vec<bool>> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::Input(format!(
            "detection threshold must be positive, got {threshold}"
        )));
    }
    Ok(estimate
        .energy()
        .into_iter()
        .map(|e| e >= threshold)
        .collect())
}

/// Cosine of the angle between two flattened vectors; 0 when either is zero.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// 1-D structural similarity of `estimate` against `truth`: stride-1 windows
/// of `SSIM_WINDOW` samples per channel, averaged over windows and channels.
/// The dynamic range `L` is the truth's max minus min.
pub fn ssim_1d(estimate: &Spectrum, truth: &Spectrum) -> Result<f64> {
    let n = truth.subcarriers();
    if estimate.subcarriers() != n {
        return Err(Error::Input("ssim needs equal-length spectra".into()));
    }
    let t = truth.values();
    let (lo, hi) = t
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let range = hi - lo;
    let c1 = (SSIM_K1 * range).powi(2);
    let c2 = (SSIM_K2 * range).powi(2);
    let w = SSIM_WINDOW.min(n);
    let mut total = 0.0;
    let mut count = 0usize;
    for (x, y) in [(estimate.re(), truth.re()), (estimate.im(), truth.im())] {
        for s in 0..=n - w {
            let (xs, ys) = (&x[s..s + w], &y[s..s + w]);
            let mx = xs.iter().sum::<f64>() / w as f64;
            let my = ys.iter().sum::<f64>() / w as f64;
            let cov = |a: &[f64], ma: f64, b: &[f64], mb: f64| {
                a.iter()
                    .zip(b)
                    .map(|(p, q)| (p - ma) * (q - mb))
                    .sum::<f64>()
                    / w as f64
            };
            let (vx, vy, cxy) = (
                cov(xs, mx, xs, mx),
                cov(ys, my, ys, my),
                cov(xs, mx, ys, my),
            );
            let num = (2.0 * mx * my + c1) * (2.0 * cxy + c2);
            let den = (mx * mx + my * my + c1) * (vx + vy + c2);
            total += if den == 0.0 { 1.0 } else { num / den };
            count += 1;
        }
    }
    Ok(total / count as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReconMetrics {
    pub mse: f64,
    pub cosine_similarity: f64,
    pub ssim: f64,
    /// `None` when no subcarrier was truly occupied.
    pub p_d: Option<f64>,
    /// `None` when no subcarrier was truly idle.
    pub p_f: Option<f64>,
}

impl ReconMetrics {
    pub const HEADER: [&'static str; 5] = ["mse", "cosine_similarity", "ssim", "p_d", "p_f"];

    pub fn row(&self) -> Vec<String> {
        vec![
            fmt_f64(self.mse),
            fmt_f64(self.cosine_similarity),
            fmt_f64(self.ssim),
            fmt_opt(self.p_d),
            fmt_opt(self.p_f),
        ]
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let doc = crate::csvfmt::document(&Self::HEADER, &[self.row()]);
        out.write_all(doc.as_bytes())
            .map_err(|e| Error::io("<iubr metrics>", e))
    }
}

/// Pooled metrics over many (estimate, truth, detected mask) triples: MSE,
/// cosine and SSIM are per-sample means; P_d and P_f pool subcarrier counts.
pub fn metrics(
    estimates: &[Spectrum],
    truths: &[SpectrumSignal],
    detections: &[Vec<bool>],
) -> Result<ReconMetrics> {
    if estimates.len() != truths.len() || detections.len() != truths.len() {
        return Err(Error::Input(
            "metrics need one estimate and detection per truth signal".into(),
        ));
    }
    if truths.is_empty() {
        return Err(Error::Input("metrics need at least one signal".into()));
    }
    let (mut m, mut c, mut s) = (0.0, 0.0, 0.0);
    let (mut hits, mut occupied, mut false_alarms, mut idle) = (0usize, 0usize, 0usize, 0usize);
    for ((e, t), d) in estimates.iter().zip(truths).zip(detections) {
        if e.subcarriers() != t.spectrum.subcarriers() || d.len() != t.mask.len() {
            return Err(Error::Input(
                "estimate, truth and detection lengths differ".into(),
            ));
        }
        m += mse(e.values(), t.spectrum.values());
        c += cosine_similarity(e.values(), t.spectrum.values());
        s += ssim_1d(e, &t.spectrum)?;
        for (&truth, &det) in t.mask.iter().zip(d) {
            match (truth, det) {
                (true, true) => {
                    hits += 1;
                    occupied += 1;
                }
                (true, false) => occupied += 1,
                (false, true) => {
                    false_alarms += 1;
                    idle += 1;
                }
                (false, false) => idle += 1,
            }
        }
    }
    let k = truths.len() as f64;
    let ratio = |a: usize, b: usize| (b > 0).then(|| a as f64 / b as f64);
    Ok(ReconMetrics {
        mse: m / k,
        cosine_similarity: c / k,
        ssim: s / k,
        p_d: ratio(hits, occupied),
        p_f: ratio(false_alarms, idle),
    })
}

/// Smallest threshold above the energies of all but `floor(pf_target * idle)`
/// truly idle subcarriers of the reconstructed validation set.
pub fn calibrate_threshold(codec: &Codec, validation: &IubrDataset, pf_target: f64) -> Result<f64> {
    if !(pf_target > 0.0 && pf_target < 1.0) {
        return Err(Error::Config(format!(
            "pf_target {pf_target} outside (0, 1)"
        )));
    }
    let estimates = codec.round_trip_all(validation)?;
    let mut idle: Vec<f64> = estimates
        .iter()
        .zip(&validation.signals)
        .flat_map(|(e, t)| {
            e.energy()
                .into_iter()
                .zip(t.mask.clone())
                .filter(|(_, m)| !m)
                .map(|(v, _)| v)
        })
        .collect();
    if idle.is_empty() {
        return Err(Error::Input(
            "validation set has no idle subcarriers".into(),
        ));
    }
    idle.sort_by(|a, b| b.total_cmp(a));
    let allowed = (pf_target * idle.len() as f64).floor() as usize;
    Ok(idle[allowed.min(idle.len() - 1)]
        .next_up()
        .max(f64::MIN_POSITIVE))
}

/// Reconstructs, detects with the codec's threshold and scores a dataset.
pub fn evaluate(codec: &Codec, data: &IubrDataset) -> Result<ReconMetrics> {
    let threshold = codec
        .threshold
        .ok_or_else(|| Error::State("codec threshold is not calibrated".into()))?;
    let estimates = codec.round_trip_all(data)?;
    let detections = estimates
        .iter()
        .map(|e| detect(e, threshold))
        .collect::<Result<Vec<_>>>()?;
    metrics(&estimates, &data.signals, &detections)
}
