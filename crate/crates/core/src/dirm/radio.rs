use serde::{Deserialize, Serialize};

use super::config::CellConfig;
use crate::{Error, Result};

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Log-distance path loss in dB; distances below one metre are clamped.
pub fn path_loss_db(cfg: &CellConfig, distance_m: f64) -> f64 {
    cfg.pl0_db + 10.0 * cfg.pathloss_exponent * (distance_m.max(1.0) / cfg.d0_m).log10()
}

/// Linear power gain between two positions: path loss and shadowing, both
/// antenna gains, minus the receiver noise figure.
pub fn channel_gain(cfg: &CellConfig, tx: (f64, f64), rx: (f64, f64), shadowing_db: f64) -> f64 {
    let d = (tx.0 - rx.0).hypot(tx.1 - rx.1);
    db_to_lin(
        -path_loss_db(cfg, d) - shadowing_db + 2.0 * cfg.antenna_gain_dbi - cfg.noise_figure_db,
    )
}

/// Noise power over one RB in milliwatts.
pub fn noise_power_mw(cfg: &CellConfig) -> f64 {
    db_to_lin(cfg.noise_density_dbm_hz + lin_to_db(cfg.rb_bandwidth_hz))
}

/// Quantized spectral efficiency: entry `k` applies from `thresholds_db[k]`
/// up to the next threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeTable {
    pub thresholds_db: Vec<f64>,
    pub bits_per_symbol: Vec<f64>,
}

impl Default for SeTable {
    /// `min(log2(1 + SINR), 7.4063)` sampled every 2 dB from -5 dB.
    fn default() -> Self {
        Self {
            thresholds_db: (0..15).map(|k| -5.0 + 2.0 * k as f64).collect(),
            bits_per_symbol: vec![
                0.3964, 0.5861, 0.8434, 1.1756, 1.5827, 2.0574, 2.5878, 3.1608, 3.7644, 4.3891,
                5.0278, 5.6758, 6.3297, 6.9875, 7.4063,
            ],
        }
    }
}

impl SeTable {
    pub fn validate(&self) -> Result<()> {
        let ok = !self.thresholds_db.is_empty()
            && self.thresholds_db.len() == self.bits_per_symbol.len()
            && self.thresholds_db.windows(2).all(|w| w[0] < w[1])
            && self.bits_per_symbol.windows(2).all(|w| w[0] <= w[1])
            && self
                .bits_per_symbol
                .iter()
                .all(|v| v.is_finite() && *v >= 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(
                "SE table must be sorted, non-negative and of matching lengths".into(),
            ))
        }
    }

    pub fn se_from_sinr(&self, sinr_db: f64) -> f64 {
        match self.thresholds_db.iter().rposition(|t| *t <= sinr_db) {
            Some(k) => self.bits_per_symbol[k],
            None => 0.0,
        }
    }

    pub fn max_se(&self) -> f64 {
        self.bits_per_symbol.last().copied().unwrap_or(0.0)
    }
}

/// A transmitter's choice: RB `rb` (== M means the dummy RB) at pool level
/// `power`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub rb: usize,
    pub power: usize,
}

impl Action {
    pub fn dummy(cfg: &CellConfig) -> Self {
        Self {
            rb: cfg.resource_blocks,
            power: 0,
        }
    }

    pub fn is_dummy(&self, cfg: &CellConfig) -> bool {
        self.rb == cfg.resource_blocks
    }

    pub fn index(&self, cfg: &CellConfig) -> usize {
        self.rb * cfg.power_pool_dbm.len() + self.power
    }

    pub fn from_index(cfg: &CellConfig, index: usize) -> Result<Self> {
        if index >= cfg.action_count() {
            return Err(Error::Input(format!(
                "action {index} outside 0..{}",
                cfg.action_count()
            )));
        }
        let p = cfg.power_pool_dbm.len();
        Ok(Self {
            rb: index / p,
            power: index % p,
        })
    }

    pub fn validate(&self, cfg: &CellConfig) -> Result<()> {
        if self.rb > cfg.resource_blocks || self.power >= cfg.power_pool_dbm.len() {
            return Err(Error::Input(format!(
                "action {self:?} outside the action space"
            )));
        }
        Ok(())
    }
}

/// Everything needed to score one slot: `gains[i][j]` is the linear gain from
/// the transmitter of pair `i` to the receiver of pair `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlotState {
    pub gains: Vec<Vec<f64>>,
}

impl SlotState {
    pub fn pairs(&self) -> usize {
        self.gains.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinkOutcome {
    pub active: bool,
    /// Received signal power in dBm; `None` when the pair is idle.
    pub signal_dbm: Option<f64>,
    /// Interference plus noise in dBm on the pair's RB.
    pub interference_dbm: Option<f64>,
    /// SINR after clamping to the receiver margin.
    pub sinr_db: Option<f64>,
    pub se: f64,
    pub bits: f64,
    pub collided: bool,
    pub failed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlotOutcome {
    pub links: Vec<LinkOutcome>,
    /// Sum of per-pair spectral efficiencies.
    pub reward: f64,
    /// RBs carrying two or more transmitters.
    pub collisions: usize,
}

/// Unclamped SINR in dB for every pair; `None` for pairs on the dummy RB.
pub fn compute_sinr(
    cfg: &CellConfig,
    state: &SlotState,
    actions: &[Action],
) -> Result<Vec<Option<f64>>> {
    Ok(powers(cfg, state, actions)?
        .into_iter()
        .map(|p| p.map(|(s, i)| lin_to_db(s / i)))
        .collect())
}

fn powers(
    cfg: &CellConfig,
    state: &SlotState,
    actions: &[Action],
) -> Result<Vec<Option<(f64, f64)>>> {
    let n = state.pairs();
    if actions.len() != n {
        return Err(Error::Input(format!(
            "{} actions for {n} pairs",
            actions.len()
        )));
    }
    for a in actions {
        a.validate(cfg)?;
    }
    let noise = noise_power_mw(cfg);
    let tx_mw: Vec<f64> = actions
        .iter()
        .map(|a| db_to_lin(cfg.power_pool_dbm[a.power]))
        .collect();
    Ok((0..n)
        .map(|j| {
            let a = actions[j];
            if a.is_dummy(cfg) {
                return None;
            }
            let signal = tx_mw[j] * state.gains[j][j];
            let interference: f64 = (0..n)
                .filter(|&i| i != j && actions[i].rb == a.rb)
                .map(|i| tx_mw[i] * state.gains[i][j])
                .sum();
            Some((signal, noise + interference))
        })
        .collect())
}

/// Scores a joint action: SINR clamped to the margin, SE lookup, collision
/// and link-failure flags.
pub fn score_slot(
    cfg: &CellConfig,
    table: &SeTable,
    state: &SlotState,
    actions: &[Action],
) -> Result<SlotOutcome> {
    let p = powers(cfg, state, actions)?;
    let mut per_rb = vec![0usize; cfg.resource_blocks];
    for a in actions.iter().filter(|a| !a.is_dummy(cfg)) {
        per_rb[a.rb] += 1;
    }
    let (lo, hi) = cfg.sinr_margin_db;
    let links: Vec<LinkOutcome> = p
        .iter()
        .zip(actions)
        .map(|(pw, a)| match pw {
            None => LinkOutcome {
                active: false,
                signal_dbm: None,
                interference_dbm: None,
                sinr_db: None,
                se: 0.0,
                bits: 0.0,
                collided: false,
                failed: false,
            },
            Some((s, i)) => {
                let raw = lin_to_db(s / i);
                let sinr = raw.clamp(lo, hi);
                let se = table.se_from_sinr(sinr);
                LinkOutcome {
                    active: true,
                    signal_dbm: Some(lin_to_db(*s)),
                    interference_dbm: Some(lin_to_db(*i)),
                    sinr_db: Some(sinr),
                    se,
                    bits: se * cfg.symbols_per_rb as f64,
                    collided: per_rb[a.rb] >= 2,
                    failed: raw < cfg.gamma_min_db,
                }
            }
        })
        .collect();
    Ok(SlotOutcome {
        reward: links.iter().map(|l| l.se).sum(),
        collisions: per_rb.iter().filter(|c| **c >= 2).count(),
        links,
    })
}
