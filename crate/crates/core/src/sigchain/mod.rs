//! Symbol-rate baseband model: constellations, channel impairments, Gaussian
//! and alpha-stable noise, demodulation and bit LLRs.

mod channel;
mod demod;
mod iqfile;
mod modulation;
mod noise;

use num_complex::Complex64;
use rand::Rng;

pub use channel::{apply_channel, ChannelConfig, Tap};
pub use demod::{demodulate_hard, llr};
pub use iqfile::{read_iq_csv, write_iq_csv, IQ_HEADER};
pub use modulation::Modulation;
pub use noise::{sample_noise, standard_stable, NoiseConfig, EXP_EULER};

use crate::{Error, Result};

/// Non-empty sequence of finite complex baseband samples.
#[derive(Clone, Debug, PartialEq)]
pub struct IqSequence {
    samples: Vec<Complex64>,
}

impl IqSequence {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Input(
                "IQ sequence must hold at least one sample".into(),
            ));
        }
        if let Some(i) = samples
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Input(format!("sample {i} is not finite")));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn add_noise<R: Rng + ?Sized>(&self, cfg: &NoiseConfig, rng: &mut R) -> Result<Self> {
        let n = sample_noise(cfg, self.len(), rng)?;
        Self::new(self.samples.iter().zip(n).map(|(a, b)| a + b).collect())
    }

    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.len() as f64
    }
}

pub fn random_bits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}
