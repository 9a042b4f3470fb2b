use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::IqSequence;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Modulation {
    #[serde(rename = "BPSK")]
    Bpsk,
    #[serde(rename = "QPSK")]
    Qpsk,
    #[serde(rename = "PSK8")]
    Psk8,
    #[serde(rename = "QAM16")]
    Qam16,
}

/// Per-axis 16QAM levels indexed by the two Gray bits `b_hi b_lo`.
const QAM16_AXIS: [f64; 4] = [-3.0, -1.0, 3.0, 1.0];

impl Modulation {
    pub const ALL: [Modulation; 4] = [
        Modulation::Bpsk,
        Modulation::Qpsk,
        Modulation::Psk8,
        Modulation::Qam16,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Modulation::Bpsk => "BPSK",
            Modulation::Qpsk => "QPSK",
            Modulation::Psk8 => "PSK8",
            Modulation::Qam16 => "QAM16",
        }
    }

    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qpsk => 2,
            Modulation::Psk8 => 3,
            Modulation::Qam16 => 4,
        }
    }

    /// Point for a bit group given as an integer whose most significant bit is
    /// the first transmitted bit.
    pub fn point(self, label: usize) -> Complex64 {
        match self {
            Modulation::Bpsk => Complex64::new(1.0 - 2.0 * label as f64, 0.0),
            Modulation::Qpsk => {
                let (b0, b1) = ((label >> 1) & 1, label & 1);
                Complex64::new(1.0 - 2.0 * b0 as f64, 1.0 - 2.0 * b1 as f64) * FRAC_1_SQRT_2
            }
            Modulation::Psk8 => {
                // Position k on the circle carries the Gray word k ^ (k >> 1).
                let k = (0..8).find(|k| k ^ (k >> 1) == label).expect("label < 8");
                Complex64::from_polar(1.0, k as f64 * PI / 4.0)
            }
            Modulation::Qam16 => {
                let i = QAM16_AXIS[(label >> 2) & 3];
                let q = QAM16_AXIS[label & 3];
                Complex64::new(i, q) / 10f64.sqrt()
            }
        }
    }

    /// All `2^b` points; entry `l` carries bit label `l`.
    pub fn constellation(self) -> Vec<Complex64> {
        (0..1usize << self.bits_per_symbol())
            .map(|l| self.point(l))
            .collect()
    }

    pub fn modulate(self, bits: &[u8]) -> Result<IqSequence> {
        let b = self.bits_per_symbol();
        if !bits.len().is_multiple_of(b) {
            return Err(Error::Input(format!(
                "{} bits do not split into {}-bit {} symbols",
                bits.len(),
                b,
                self.name()
            )));
        }
        if let Some(bad) = bits.iter().find(|v| **v > 1) {
            return Err(Error::Input(format!("bit value {bad} is not 0 or 1")));
        }
        let samples = bits
            .chunks(b)
            .map(|g| self.point(g.iter().fold(0usize, |acc, v| (acc << 1) | *v as usize)))
            .collect();
        IqSequence::new(samples)
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BPSK" => Ok(Modulation::Bpsk),
            "QPSK" => Ok(Modulation::Qpsk),
            "PSK8" | "8PSK" => Ok(Modulation::Psk8),
            "QAM16" | "16QAM" => Ok(Modulation::Qam16),
            _ => Err(Error::Input(format!("unknown modulation '{s}'"))),
        }
    }
}
