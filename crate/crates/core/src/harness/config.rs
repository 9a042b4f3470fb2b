use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::amc::{AmcDatasetSpec, AmcHyperParams};
use crate::dirm::{CellConfig, DqnConfig, SeTable};
use crate::iubr::{IubrDatasetConfig, IubrHyperParams};
use crate::ldpc::TrainSchedule;
use crate::sigchain::Modulation;
use crate::{Error, Result};

/// Environment variable consulted for the seed when `--seed` is absent.
pub const SEED_ENV: &str = "AUTOR_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Amc,
    Ldpc,
    Dirm,
    Iubr,
    E2e,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Amc => "amc",
            Algorithm::Ldpc => "ldpc",
            Algorithm::Dirm => "dirm",
            Algorithm::Iubr => "iubr",
            Algorithm::E2e => "e2e",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "amc" => Ok(Algorithm::Amc),
            "ldpc" => Ok(Algorithm::Ldpc),
            "dirm" => Ok(Algorithm::Dirm),
            "iubr" => Ok(Algorithm::Iubr),
            "e2e" => Ok(Algorithm::E2e),
            other => Err(Error::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AmcSection {
    pub dataset: AmcDatasetSpec,
    pub model: AmcHyperParams,
    pub test_fraction: f64,
    pub split_seed: u64,
}

impl Default for AmcSection {
    fn default() -> Self {
        Self {
            dataset: AmcDatasetSpec::default(),
            model: AmcHyperParams::default(),
            test_fraction: 0.2,
            split_seed: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Neural,
    Classic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LdpcSection {
    pub lifting: usize,
    pub schedule: TrainSchedule,
    pub ebn0_db: Vec<f64>,
    pub trials: usize,
    /// Decoder scored by `ldpc eval` and used by `ldpc decode`.
    pub decoder: DecoderKind,
    /// Unrolled layers at evaluation; 0 means the checkpoint's depth.
    pub layers: usize,
    pub checkpoint: Option<PathBuf>,
}

impl Default for LdpcSection {
    fn default() -> Self {
        Self {
            lifting: 16,
            schedule: TrainSchedule::default(),
            ebn0_db: vec![1.0, 2.0, 3.0],
            trials: 2000,
            decoder: DecoderKind::Neural,
            layers: 0,
            checkpoint: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DirmSection {
    pub cell: CellConfig,
    pub dqn: DqnConfig,
    pub se_table: SeTable,
    pub eval_episodes: usize,
    /// Largest joint-action space brute force will enumerate per slot.
    pub brute_force_cap: u64,
    /// Directory holding per-agent checkpoints for `dirm eval`.
    pub checkpoint_dir: Option<PathBuf>,
}

impl Default for DirmSection {
    fn default() -> Self {
        Self {
            cell: CellConfig::desk(),
            dqn: DqnConfig {
                gamma: 0.5,
                ..DqnConfig::desk()
            },
            se_table: SeTable::default(),
            eval_episodes: 50,
            brute_force_cap: 1 << 20,
            checkpoint_dir: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AblationSection {
    /// Empty disables the trainable-versus-frozen comparison.
    pub seeds: Vec<u64>,
    pub samples: usize,
    pub epochs: usize,
}

impl Default for AblationSection {
    fn default() -> Self {
        Self {
            seeds: Vec::new(),
            samples: 1000,
            epochs: 15,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IubrSection {
    pub dataset: IubrDatasetConfig,
    pub model: IubrHyperParams,
    /// Samples held out for threshold calibration.
    pub validation_samples: usize,
    /// Samples held out for scoring.
    pub test_samples: usize,
    pub ablation: AblationSection,
    pub checkpoint: Option<PathBuf>,
}

impl Default for IubrSection {
    fn default() -> Self {
        Self {
            dataset: IubrDatasetConfig {
                samples: 3000,
                ..IubrDatasetConfig::sub6()
            },
            model: IubrHyperParams::default(),
            validation_samples: 500,
            test_samples: 500,
            ablation: AblationSection::default(),
            checkpoint: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct E2eSection {
    pub scheme: Modulation,
    /// Per information bit; `inf` gives a clean channel.
    pub ebn0_db: f64,
    pub frames: usize,
    pub lifting: usize,
    pub layers: usize,
    pub kernel_sigma: f64,
    /// Demodulate with this scheme regardless of the classifier.
    pub force_scheme: Option<Modulation>,
    pub amc_checkpoint: Option<PathBuf>,
    /// Absent: plain min-sum.
    pub ldpc_checkpoint: Option<PathBuf>,
    /// Reconstruct-then-classify through this codec; absent by default.
    pub iubr_checkpoint: Option<PathBuf>,
}

impl Default for E2eSection {
    fn default() -> Self {
        Self {
            scheme: Modulation::Qpsk,
            ebn0_db: 4.0,
            frames: 24,
            lifting: 16,
            layers: 10,
            kernel_sigma: 0.2,
            force_scheme: None,
            amc_checkpoint: None,
            ldpc_checkpoint: None,
            iubr_checkpoint: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// When set, must name the module being run.
    pub algorithm: Option<Algorithm>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub amc: AmcSection,
    pub ldpc: LdpcSection,
    pub dirm: DirmSection,
    pub iubr: IubrSection,
    pub e2e: E2eSection,
}

impl ExperimentConfig {
    /// Keys absent from `text` take the harness defaults, including keys of a
    /// partially given section.
    pub fn from_toml(text: &str) -> Result<Self> {
        // First pass only for key and type errors with source positions.
        let _: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let user: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut merged =
            toml::Table::try_from(Self::default()).map_err(|e| Error::Serde(e.to_string()))?;
        overlay(&mut merged, user);
        merged
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    /// Seed precedence: explicit value, then `AUTOR_SEED`, then the config.
    pub fn resolve_seed(&mut self, cli: Option<u64>) -> Result<()> {
        if let Some(s) = cli {
            self.seed = s;
        } else if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v.trim().parse().map_err(|_| {
                Error::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))
            })?;
        }
        Ok(())
    }

    /// Pins `algorithm` to the module being run.
    pub fn bind(&mut self, algorithm: Algorithm) -> Result<()> {
        match self.algorithm {
            Some(a) if a != algorithm => Err(Error::Config(format!(
                "config is for {a} but the {algorithm} module was invoked"
            ))),
            _ => {
                self.algorithm = Some(algorithm);
                Ok(())
            }
        }
    }
}

/// Recursive table merge. A table carrying a `kind` tag names an enum variant
/// and replaces the base wholesale.
fn overlay(base: &mut toml::Table, user: toml::Table) {
    for (key, value) in user {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) if !u.contains_key("kind") => {
                overlay(b, u)
            }
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}
