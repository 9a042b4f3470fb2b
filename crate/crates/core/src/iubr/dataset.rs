use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csvfmt::{fmt_f64, parse_f64};
use crate::rng::Stream;
use crate::{Error, Result};

/// N_s complex subcarrier values, channel-major: real parts then imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(Error::Input(format!(
                "spectrum needs an even, nonzero length, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("spectrum values must be finite".into()));
        }
        Ok(Self { values })
    }

    pub fn zeros(subcarriers: usize) -> Self {
        Self {
            values: vec![0.0; 2 * subcarriers],
        }
    }

    pub fn subcarriers(&self) -> usize {
        self.values.len() / 2
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn re(&self) -> &[f64] {
        &self.values[..self.subcarriers()]
    }

    pub fn im(&self) -> &[f64] {
        &self.values[self.subcarriers()..]
    }

    /// `|re|^2 + |im|^2` per subcarrier.
    pub fn energy(&self) -> Vec<f64> {
        self.re()
            .iter()
            .zip(self.im())
            .map(|(a, b)| a * a + b * b)
            .collect()
    }
}

/// A spectrum with its ground-truth occupancy.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSignal {
    pub spectrum: Spectrum,
    pub mask: Vec<bool>,
}

impl SpectrumSignal {
    pub fn new(spectrum: Spectrum, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != spectrum.subcarriers() {
            return Err(Error::Input(format!(
                "mask has {} entries for {} subcarriers",
                mask.len(),
                spectrum.subcarriers()
            )));
        }
        Ok(Self { spectrum, mask })
    }
}

/// Occupancy model: each sample holds a random number of connections, each a
/// contiguous block of subcarriers sharing one random-phase complex amplitude.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IubrDatasetConfig {
    pub subcarriers: usize,
    pub samples: usize,
    /// Inclusive range of connections per sample.
    pub connections: (usize, usize),
    /// Inclusive range of subcarriers per connection.
    pub connection_width: (usize, usize),
    /// Per-connection power range in dB relative to unit power.
    pub power_db: (f64, f64),
    /// Unit power over the per-subcarrier complex noise variance.
    pub snr_db: f64,
}

impl Default for IubrDatasetConfig {
    fn default() -> Self {
        Self::sub6()
    }
}

impl IubrDatasetConfig {
    pub fn sub6() -> Self {
        Self {
            subcarriers: 256,
            samples: 2000,
            connections: (1, 3),
            connection_width: (8, 16),
            power_db: (0.0, 6.0),
            snr_db: 30.0,
        }
    }

    /// Denser, narrower connections with a wider power spread.
    pub fn thz() -> Self {
        Self {
            connections: (3, 6),
            connection_width: (4, 8),
            power_db: (-3.0, 9.0),
            ..Self::sub6()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("iubr dataset: {m}")));
        if self.subcarriers < 2 {
            return bad("subcarriers must be at least 2");
        }
        if self.connections.0 > self.connections.1 {
            return bad("connections range is reversed");
        }
        let (w0, w1) = self.connection_width;
        if w0 == 0 || w0 > w1 || w1 > self.subcarriers {
            return bad("connection_width must satisfy 1 <= min <= max <= subcarriers");
        }
        let (p0, p1) = self.power_db;
        if !(p0.is_finite() && p1.is_finite() && p0 <= p1) {
            return bad("power_db must be a finite, ordered range");
        }
        if !self.snr_db.is_finite() {
            return bad("snr_db must be finite");
        }
        Ok(())
    }

    pub fn noise_variance(&self) -> f64 {
        10f64.powf(-self.snr_db / 10.0)
    }
}

pub fn generate_sample(cfg: &IubrDatasetConfig, rng: &mut Stream) -> Result<SpectrumSignal> {
    cfg.validate()?;
    let n = cfg.subcarriers;
    let mut values = vec![0.0; 2 * n];
    let mut mask = vec![false; n];
    let count = rng.random_range(cfg.connections.0..=cfg.connections.1);
    for _ in 0..count {
        let width = rng.random_range(cfg.connection_width.0..=cfg.connection_width.1);
        let start = rng.random_range(0..=n - width);
        let power_db = if cfg.power_db.0 < cfg.power_db.1 {
            rng.random_range(cfg.power_db.0..cfg.power_db.1)
        } else {
            cfg.power_db.0
        };
        let amp = 10f64.powf(power_db / 20.0);
        let phase = rng.random_range(0.0..2.0 * PI);
        for k in start..start + width {
            values[k] = amp * phase.cos();
            values[n + k] = amp * phase.sin();
            mask[k] = true;
        }
    }
    let sd = (cfg.noise_variance() / 2.0).sqrt();
    for v in values.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v += sd * z;
    }
    SpectrumSignal::new(Spectrum::new(values)?, mask)
}

/// Sample `k` draws from its own stream, so generation order does not matter.
pub fn generate_dataset(cfg: &IubrDatasetConfig, seed: u64) -> Result<IubrDataset> {
    cfg.validate()?;
    let signals = (0..cfg.samples)
        .into_par_iter()
        .map(|k| generate_sample(cfg, &mut Stream::new(seed, "iubr-sample", k as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(IubrDataset { signals })
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct IubrDataset {
    pub signals: Vec<SpectrumSignal>,
}

impl IubrDataset {
    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn subcarriers(&self) -> Option<usize> {
        self.signals.first().map(|s| s.spectrum.subcarriers())
    }

    /// The last `ceil(fraction * n)` samples form the second set.
    pub fn split_tail(&self, fraction: f64) -> Result<(IubrDataset, IubrDataset)> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::Config(format!(
                "split fraction {fraction} outside [0, 1]"
            )));
        }
        let cut = self.len() - (fraction * self.len() as f64).ceil() as usize;
        Ok((
            IubrDataset {
                signals: self.signals[..cut].to_vec(),
            },
            IubrDataset {
                signals: self.signals[cut..].to_vec(),
            },
        ))
    }

    /// Columns `mask,re_0..,im_0..`; the mask is a string of `0`/`1` per subcarrier.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let n = self.subcarriers().unwrap_or(0);
        let mut w = csv::Writer::from_writer(out);
        w.write_record(header(n))?;
        for s in &self.signals {
            let mask: String = s.mask.iter().map(|&b| if b { '1' } else { '0' }).collect();
            let mut row = vec![mask];
            row.extend(s.spectrum.values().iter().map(|v| fmt_f64(*v)));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<iubr dataset>", e))
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().from_reader(input);
        let head = r.headers()?.clone();
        let n = head.len().saturating_sub(1) / 2;
        if n == 0 || head.len() != 2 * n + 1 || head.iter().ne(header(n).iter().map(String::as_str))
        {
            return Err(Error::Parse {
                line: 1,
                msg: "expected header mask,re_0..re_{n-1},im_0..im_{n-1}".into(),
            });
        }
        let mut signals = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec?;
            let mask = rec[0]
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(Error::Parse {
                        line,
                        msg: format!("mask character {c:?} is not 0 or 1"),
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            let values = (1..rec.len())
                .map(|k| parse_f64(&rec[k], line))
                .collect::<Result<Vec<_>>>()?;
            let parse_err = |e: Error| Error::Parse {
                line,
                msg: e.to_string(),
            };
            let spectrum = Spectrum::new(values).map_err(parse_err)?;
            signals.push(SpectrumSignal::new(spectrum, mask).map_err(parse_err)?);
        }
        Ok(Self { signals })
    }

    /// SHA-256 of the canonical CSV form.
    pub fn digest(&self) -> Result<String> {
        Ok(crate::digest::sha256_hex(self.to_csv_string()?.as_bytes()))
    }
}

fn header(n: usize) -> Vec<String> {
    std::iter::once("mask".to_string())
        .chain((0..n).map(|k| format!("re_{k}")))
        .chain((0..n).map(|k| format!("im_{k}")))
        .collect()
}
