use std::f64::consts::PI;

use crate::sigchain::IqSequence;
use crate::{Error, Result};

/// Correntropy per lag; `values[i]` averages the kernel over pairs `i` samples apart.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrentropyFeature {
    pub values: Vec<f64>,
    pub kernel_sigma: f64,
    pub source_len: usize,
}

impl CorrentropyFeature {
    /// Kernel value at zero distance.
    pub fn peak(&self) -> f64 {
        kernel_peak(self.kernel_sigma)
    }

    /// Values divided by their maximum.
    pub fn normalized(&self) -> Vec<f64> {
        normalize_by_max(&self.values)
    }
}

pub fn kernel_peak(sigma: f64) -> f64 {
    1.0 / ((2.0 * PI).sqrt() * sigma * sigma)
}

pub fn normalize_by_max(values: &[f64]) -> Vec<f64> {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max > 0.0 && max.is_finite() {
        values.iter().map(|v| v / max).collect()
    } else {
        values.to_vec()
    }
}

/// Gaussian-kernel correntropy for lag offsets `0..len`.
pub fn complex_correntropy(iq: &IqSequence, sigma: f64, len: usize) -> Result<CorrentropyFeature> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Input(format!(
            "kernel width {sigma} must be positive"
        )));
    }
    let y = iq.samples();
    let m = y.len();
    if len == 0 || len > m {
        return Err(Error::Input(format!(
            "feature length {len} must be in 1..={m}"
        )));
    }
    let peak = kernel_peak(sigma);
    let scale = -0.5 / (sigma * sigma);
    let values = (0..len)
        .map(|lag| {
            let pairs = m - lag;
            let sum: f64 = y[..pairs]
                .iter()
                .zip(&y[lag..])
                .map(|(a, b)| ((a - b).norm_sqr() * scale).exp())
                .sum();
            peak * sum / pairs as f64
        })
        .collect();
    Ok(CorrentropyFeature {
        values,
        kernel_sigma: sigma,
        source_len: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn iq(v: &[(f64, f64)]) -> IqSequence {
        IqSequence::new(v.iter().map(|(a, b)| Complex64::new(*a, *b)).collect()).unwrap()
    }

    #[test]
    fn constant_input_sits_at_peak() {
        let f = complex_correntropy(&iq(&[(0.3, -0.7); 9]), 0.5, 4).unwrap();
        for v in &f.values {
            assert!((v - kernel_peak(0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn alternating_bpsk_by_hand() {
        let f = complex_correntropy(
            &iq(&[(1.0, 0.0), (-1.0, 0.0), (1.0, 0.0), (-1.0, 0.0)]),
            1.0,
            2,
        )
        .unwrap();
        let c = 1.0 / (2.0 * PI).sqrt();
        assert!((f.values[0] - c).abs() < 1e-15);
        // Three pairs one apart, each |d|^2 = 4.
        assert!((f.values[1] - c * (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn too_long_feature_rejected() {
        assert!(complex_correntropy(&iq(&[(1.0, 0.0); 3]), 1.0, 4).is_err());
        assert!(complex_correntropy(&iq(&[(1.0, 0.0); 3]), 0.0, 2).is_err());
    }
}
