use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::correntropy::complex_correntropy;
use crate::csvfmt::{fmt_f64, parse_f64};
use crate::rng::Stream;
use crate::sigchain::{apply_channel, random_bits, ChannelConfig, Modulation, NoiseConfig};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AmcNoise {
    Awgn,
    /// Symmetric stable noise; the SNR grid is read as geometric SNR.
    AlphaStable {
        alpha: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AmcDatasetSpec {
    pub schemes: Vec<Modulation>,
    pub snr_db: Vec<f64>,
    pub paths: Vec<usize>,
    pub messages_per_combo: usize,
    pub message_len: usize,
    pub feature_len: usize,
    pub kernel_sigma: f64,
    /// Power decay per tap of the exponential delay profile.
    #[serde(default = "default_decay")]
    pub multipath_decay: f64,
    /// Frequency offsets are drawn uniformly from `[-max, max]` cycles/sample.
    #[serde(default)]
    pub max_freq_offset: f64,
    #[serde(default = "default_noise")]
    pub noise: AmcNoise,
    /// When set, `snr_db` holds Eb/N0 per information bit of a code with this
    /// rate and each scheme gets its own symbol SNR.
    #[serde(default)]
    pub ebn0_code_rate: Option<f64>,
}

fn default_decay() -> f64 {
    1.0
}

fn default_noise() -> AmcNoise {
    AmcNoise::Awgn
}

impl Default for AmcDatasetSpec {
    fn default() -> Self {
        Self {
            schemes: vec![Modulation::Bpsk, Modulation::Qpsk, Modulation::Qam16],
            snr_db: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0],
            paths: vec![1, 2, 4],
            messages_per_combo: 50,
            message_len: 10_000,
            feature_len: 150,
            kernel_sigma: 0.2,
            multipath_decay: default_decay(),
            max_freq_offset: 0.0,
            noise: AmcNoise::Awgn,
            ebn0_code_rate: None,
        }
    }
}

impl AmcDatasetSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("amc dataset: {m}")));
        if self.schemes.is_empty() || self.snr_db.is_empty() || self.paths.is_empty() {
            return bad("schemes, snr_db and paths must be non-empty");
        }
        if self.messages_per_combo == 0 || self.feature_len == 0 {
            return bad("messages_per_combo and feature_len must be at least 1");
        }
        if self.message_len < self.feature_len {
            return bad("message_len must be at least feature_len");
        }
        if self.paths.iter().any(|p| *p == 0 || *p >= self.message_len) {
            return bad("path counts must be in 1..message_len");
        }
        if !(self.kernel_sigma > 0.0 && self.max_freq_offset >= 0.0) {
            return bad("kernel_sigma must be positive and max_freq_offset nonnegative");
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("snr values must be finite");
        }
        if let Some(r) = self.ebn0_code_rate {
            if !(r > 0.0 && r <= 1.0) {
                return bad("ebn0_code_rate must be in (0, 1]");
            }
        }
        if let AmcNoise::AlphaStable { alpha } = self.noise {
            if !(alpha > 0.0 && alpha <= 2.0) {
                return bad("alpha must be in (0, 2]");
            }
        }
        Ok(())
    }

    /// Symbol SNR in dB for a grid value under `scheme`.
    pub fn symbol_snr_db(&self, scheme: Modulation, snr_db: f64) -> f64 {
        match self.ebn0_code_rate {
            Some(r) => snr_db + 10.0 * (scheme.bits_per_symbol() as f64 * r).log10(),
            None => snr_db,
        }
    }

    pub fn example_count(&self) -> usize {
        self.schemes.len() * self.snr_db.len() * self.paths.len() * self.messages_per_combo
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmcExample {
    pub label: Modulation,
    pub snr_db: f64,
    pub paths: usize,
    pub features: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct AmcDataset {
    pub examples: Vec<AmcExample>,
}

fn noise_config(noise: AmcNoise, snr_db: f64) -> Result<NoiseConfig> {
    match noise {
        AmcNoise::Awgn => Ok(NoiseConfig::awgn_for_snr_db(snr_db)),
        AmcNoise::AlphaStable { alpha } => {
            NoiseConfig::alpha_stable_for_gsnr_db(alpha, 1.0, snr_db)
        }
    }
}

/// One received message at grid value `snr_db`: random bits, random phase, multipath, offset, noise.
pub fn synthesize_message(
    spec: &AmcDatasetSpec,
    scheme: Modulation,
    snr_db: f64,
    paths: usize,
    rng: &mut Stream,
) -> Result<crate::sigchain::IqSequence> {
    let bits = random_bits(spec.message_len * scheme.bits_per_symbol(), rng);
    let tx = scheme.modulate(&bits)?;
    let freq_offset = if spec.max_freq_offset > 0.0 {
        rng.random_range(-spec.max_freq_offset..=spec.max_freq_offset)
    } else {
        0.0
    };
    let ch = ChannelConfig {
        phase: rng.random_range(-PI..PI),
        freq_offset,
        ..Default::default()
    }
    .with_random_multipath(paths, spec.multipath_decay, rng)?;
    let rx = apply_channel(&tx, &ch)?;
    rx.add_noise(
        &noise_config(spec.noise, spec.symbol_snr_db(scheme, snr_db))?,
        rng,
    )
}

/// Examples in (scheme, snr, paths, message) order; example `k` draws from
/// its own stream, so the result does not depend on thread scheduling.
pub fn build_dataset(spec: &AmcDatasetSpec, seed: u64) -> Result<AmcDataset> {
    spec.validate()?;
    let mut jobs = Vec::with_capacity(spec.example_count());
    for &scheme in &spec.schemes {
        for &snr in &spec.snr_db {
            for &paths in &spec.paths {
                for _ in 0..spec.messages_per_combo {
                    jobs.push((scheme, snr, paths));
                }
            }
        }
    }
    let examples = jobs
        .par_iter()
        .enumerate()
        .map(|(k, &(scheme, snr_db, paths))| {
            let mut rng = Stream::new(seed, "amc-example", k as u64);
            let rx = synthesize_message(spec, scheme, snr_db, paths, &mut rng)?;
            let f = complex_correntropy(&rx, spec.kernel_sigma, spec.feature_len)?;
            Ok(AmcExample {
                label: scheme,
                snr_db,
                paths,
                features: f.values,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AmcDataset { examples })
}

impl AmcDataset {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn feature_len(&self) -> Option<usize> {
        self.examples.first().map(|e| e.features.len())
    }

    /// Distinct labels in scheme order.
    pub fn classes(&self) -> Vec<Modulation> {
        let mut c: Vec<Modulation> = self.examples.iter().map(|e| e.label).collect();
        c.sort();
        c.dedup();
        c
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let l = self.feature_len().unwrap_or(0);
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["label".to_string(), "snr_db".into(), "paths".into()];
        header.extend((1..=l).map(|i| format!("v{i}")));
        w.write_record(&header)?;
        for e in &self.examples {
            let mut row = vec![
                e.label.name().to_string(),
                fmt_f64(e.snr_db),
                e.paths.to_string(),
            ];
            row.extend(e.features.iter().map(|v| fmt_f64(*v)));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<amc dataset>", e))
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().from_reader(input);
        let header = r.headers()?.clone();
        let l = header.len().saturating_sub(3);
        let expected: Vec<String> = ["label", "snr_db", "paths"]
            .iter()
            .map(|s| s.to_string())
            .chain((1..=l).map(|i| format!("v{i}")))
            .collect();
        if l == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
            return Err(Error::Parse {
                line: 1,
                msg: "expected header label,snr_db,paths,v1..vl".into(),
            });
        }
        let mut examples = Vec::new();
        for (n, rec) in r.records().enumerate() {
            let line = n + 2;
            let rec = rec?;
            let label: Modulation = rec[0].parse().map_err(|e: Error| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
            let paths = rec[2].parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad path count '{}'", &rec[2]),
            })?;
            let features = (3..rec.len())
                .map(|i| parse_f64(&rec[i], line))
                .collect::<Result<Vec<_>>>()?;
            examples.push(AmcExample {
                label,
                snr_db: parse_f64(&rec[1], line)?,
                paths,
                features,
            });
        }
        Ok(Self { examples })
    }

    /// SHA-256 of the canonical CSV form.
    pub fn digest(&self) -> Result<String> {
        let text = self.to_csv_string()?;
        Ok(crate::digest::sha256_hex(text.as_bytes()))
    }

    /// Seeded split stratified by (label, snr): within each stratum the first
    /// `round(test_fraction * n)` examples of a shuffled order go to the test set.
    pub fn split(&self, test_fraction: f64, seed: u64) -> Result<(AmcDataset, AmcDataset)> {
        if !(0.0..1.0).contains(&test_fraction) {
            return Err(Error::Config(format!(
                "test fraction {test_fraction} outside [0, 1)"
            )));
        }
        let mut strata: Vec<((Modulation, u64), Vec<usize>)> = Vec::new();
        for (i, e) in self.examples.iter().enumerate() {
            let key = (e.label, e.snr_db.to_bits());
            match strata.iter_mut().find(|(k, _)| *k == key) {
                Some((_, v)) => v.push(i),
                None => strata.push((key, vec![i])),
            }
        }
        let mut is_test = vec![false; self.examples.len()];
        for (s, (_, idx)) in strata.iter().enumerate() {
            let mut idx = idx.clone();
            let mut rng = Stream::new(seed, "amc-split", s as u64);
            for i in (1..idx.len()).rev() {
                let j = rng.random_range(0..=i);
                idx.swap(i, j);
            }
            let n_test = (test_fraction * idx.len() as f64).round() as usize;
            for &i in &idx[..n_test] {
                is_test[i] = true;
            }
        }
        let (mut train, mut test) = (AmcDataset::default(), AmcDataset::default());
        for (e, t) in self.examples.iter().zip(is_test) {
            if t {
                test.examples.push(e.clone());
            } else {
                train.examples.push(e.clone());
            }
        }
        Ok((train, test))
    }

    pub fn filtered(&self, keep: impl Fn(&AmcExample) -> bool) -> AmcDataset {
        AmcDataset {
            examples: self.examples.iter().filter(|e| keep(e)).cloned().collect(),
        }
    }
}
