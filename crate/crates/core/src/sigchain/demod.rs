use num_complex::Complex64;

use super::{IqSequence, Modulation};
use crate::{Error, Result};

fn nearest(points: &[Complex64], y: Complex64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let d = (y - p).norm_sqr();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Bits of the nearest constellation point per sample.
pub fn demodulate_hard(iq: &IqSequence, scheme: Modulation) -> Vec<u8> {
    let points = scheme.constellation();
    let b = scheme.bits_per_symbol();
    let mut bits = Vec::with_capacity(iq.len() * b);
    for y in iq.samples() {
        let label = nearest(&points, *y);
        bits.extend((0..b).rev().map(|k| ((label >> k) & 1) as u8));
    }
    bits
}

/// Max-log bit LLRs `ln P(b=0|y)/P(b=1|y)` under circular Gaussian noise of
/// total power `noise_variance`.
pub fn llr(iq: &IqSequence, scheme: Modulation, noise_variance: f64) -> Result<Vec<f64>> {
    if !(noise_variance > 0.0 && noise_variance.is_finite()) {
        return Err(Error::Input(format!(
            "noise variance {noise_variance} must be positive"
        )));
    }
    let points = scheme.constellation();
    let b = scheme.bits_per_symbol();
    let mut out = Vec::with_capacity(iq.len() * b);
    let mut dist = vec![0.0; points.len()];
    for y in iq.samples() {
        for (d, p) in dist.iter_mut().zip(&points) {
            *d = (y - p).norm_sqr();
        }
        for k in (0..b).rev() {
            let (mut d0, mut d1) = (f64::INFINITY, f64::INFINITY);
            for (label, d) in dist.iter().enumerate() {
                if (label >> k) & 1 == 0 {
                    d0 = d0.min(*d);
                } else {
                    d1 = d1.min(*d);
                }
            }
            out.push((d1 - d0) / noise_variance);
        }
    }
    Ok(out)
}
