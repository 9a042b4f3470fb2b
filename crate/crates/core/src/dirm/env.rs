use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::config::CellConfig;
use super::mobility::{mobility_step, spawn, Vehicle};
use super::radio::{
    channel_gain, lin_to_db, noise_power_mw, score_slot, Action, SeTable, SlotOutcome, SlotState,
};
use crate::rng::Stream;
use crate::{Error, Result};

const OBS_FLOOR_DBM: f64 = -130.0;
const OBS_CEIL_DBM: f64 = 0.0;

/// Maps a dBm value from `[-130, 0]` onto `[-1, 1]`, saturating outside.
pub fn normalize_dbm(dbm: f64) -> f64 {
    let mid = 0.5 * (OBS_FLOOR_DBM + OBS_CEIL_DBM);
    let half = 0.5 * (OBS_CEIL_DBM - OBS_FLOOR_DBM);
    ((dbm - mid) / half).clamp(-1.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AgentObservation {
    pub is_tx: bool,
    pub received: f64,
    pub interference: f64,
    pub epsilon: f64,
    pub episode: f64,
}

impl AgentObservation {
    pub const SIZE: usize = 5;

    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            if self.is_tx { 1.0 } else { 0.0 },
            self.received,
            self.interference,
            self.epsilon,
            self.episode,
        ]
    }
}

/// Totals over any number of slots.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpisodeStats {
    /// Received bits per pair.
    pub bits: Vec<f64>,
    pub reward: f64,
    pub collisions: usize,
    pub collided_links: usize,
    pub link_failures: usize,
    pub active_links: usize,
    pub slots: usize,
}

impl EpisodeStats {
    pub fn new(pairs: usize) -> Self {
        Self {
            bits: vec![0.0; pairs],
            ..Self::default()
        }
    }

    pub fn record(&mut self, slot: &SlotOutcome) {
        for (b, l) in self.bits.iter_mut().zip(&slot.links) {
            *b += l.bits;
        }
        self.reward += slot.reward;
        self.collisions += slot.collisions;
        self.collided_links += slot.links.iter().filter(|l| l.collided).count();
        self.link_failures += slot.links.iter().filter(|l| l.failed).count();
        self.active_links += slot.links.iter().filter(|l| l.active).count();
        self.slots += 1;
    }

    pub fn merge(&mut self, other: &EpisodeStats) {
        if self.bits.len() < other.bits.len() {
            self.bits.resize(other.bits.len(), 0.0);
        }
        for (b, o) in self.bits.iter_mut().zip(&other.bits) {
            *b += o;
        }
        self.reward += other.reward;
        self.collisions += other.collisions;
        self.collided_links += other.collided_links;
        self.link_failures += other.link_failures;
        self.active_links += other.active_links;
        self.slots += other.slots;
    }

    fn ratio(num: usize, den: usize) -> f64 {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    }

    /// Share of active links whose RB carried another transmitter.
    pub fn collision_rate(&self) -> f64 {
        Self::ratio(self.collided_links, self.active_links)
    }

    /// Share of active links below the SINR threshold.
    pub fn failure_rate(&self) -> f64 {
        Self::ratio(self.link_failures, self.active_links)
    }

    pub fn mean_reward(&self) -> f64 {
        if self.slots == 0 {
            0.0
        } else {
            self.reward / self.slots as f64
        }
    }

    /// Mean data rate per pair in kbit/s.
    pub fn kbps_per_pair(&self, slot_s: f64) -> f64 {
        if self.slots == 0 || self.bits.is_empty() {
            return 0.0;
        }
        let total: f64 = self.bits.iter().sum();
        total / self.bits.len() as f64 / (self.slots as f64 * slot_s) / 1000.0
    }
}

/// One episode of the virtual cell. User `2p + (t % 2)` transmits for pair
/// `p` in slot `t`; its partner receives.
#[derive(Clone, Debug)]
pub struct Environment {
    pub cfg: CellConfig,
    pub table: SeTable,
    vehicles: Vec<Vehicle>,
    /// Per unordered user pair, dB; fixed for the episode.
    shadowing: Vec<Vec<f64>>,
    slot: usize,
    last_rx: Vec<(f64, f64)>,
    rng: Stream,
}

impl Environment {
    pub fn new(cfg: &CellConfig, table: &SeTable, mut rng: Stream) -> Result<Self> {
        cfg.validate()?;
        table.validate()?;
        let k = cfg.users;
        let vehicles = (0..k).map(|_| spawn(cfg, &mut rng)).collect();
        let normal =
            Normal::new(0.0, cfg.shadowing_db).map_err(|e| Error::Config(e.to_string()))?;
        let mut shadowing = vec![vec![0.0; k]; k];
        #[allow(clippy::needless_range_loop)]
        for i in 0..k {
            for j in i + 1..k {
                let s = normal.sample(&mut rng);
                shadowing[i][j] = s;
                shadowing[j][i] = s;
            }
        }
        let floor = lin_to_db(noise_power_mw(cfg));
        Ok(Self {
            cfg: cfg.clone(),
            table: table.clone(),
            vehicles,
            shadowing,
            slot: 0,
            last_rx: vec![(floor, floor); k],
            rng,
        })
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn done(&self) -> bool {
        self.slot >= self.cfg.slots_per_episode
    }

    pub fn vehicles(&self) -> &[Vehicle] {
        &self.vehicles
    }

    pub fn transmitter(&self, pair: usize) -> usize {
        2 * pair + self.slot % 2
    }

    pub fn receiver(&self, pair: usize) -> usize {
        2 * pair + 1 - self.slot % 2
    }

    pub fn is_transmitter(&self, user: usize) -> bool {
        user % 2 == self.slot % 2
    }

    /// Gains between the current transmitters and receivers.
    pub fn slot_state(&self) -> SlotState {
        let n = self.cfg.pairs();
        let gains = (0..n)
            .map(|i| {
                let t = self.transmitter(i);
                (0..n)
                    .map(|j| {
                        let r = self.receiver(j);
                        channel_gain(
                            &self.cfg,
                            self.vehicles[t].position(),
                            self.vehicles[r].position(),
                            self.shadowing[t][r],
                        )
                    })
                    .collect()
            })
            .collect();
        SlotState { gains }
    }

    pub fn observe(&self, epsilon: f64, episode: f64) -> Vec<AgentObservation> {
        (0..self.cfg.users)
            .map(|u| AgentObservation {
                is_tx: self.is_transmitter(u),
                received: normalize_dbm(self.last_rx[u].0),
                interference: normalize_dbm(self.last_rx[u].1),
                epsilon,
                episode,
            })
            .collect()
    }

    /// Per-pair actions from per-user actions; receivers are forced onto the
    /// dummy RB whatever they asked for.
    pub fn pair_actions(&self, user_actions: &[Action]) -> Result<Vec<Action>> {
        if user_actions.len() != self.cfg.users {
            return Err(Error::Input(format!(
                "{} actions for {} users",
                user_actions.len(),
                self.cfg.users
            )));
        }
        (0..self.cfg.pairs())
            .map(|p| {
                let a = user_actions[self.transmitter(p)];
                a.validate(&self.cfg)?;
                Ok(a)
            })
            .collect()
    }

    /// Scores the slot for the given per-pair actions, records what each
    /// receiver heard, swaps roles and moves the vehicles.
    pub fn step_pairs(&mut self, actions: &[Action]) -> Result<SlotOutcome> {
        if self.done() {
            return Err(Error::State("episode already finished".into()));
        }
        let out = score_slot(&self.cfg, &self.table, &self.slot_state(), actions)?;
        let floor = lin_to_db(noise_power_mw(&self.cfg));
        for (p, link) in out.links.iter().enumerate() {
            let r = self.receiver(p);
            self.last_rx[r] = match (link.signal_dbm, link.interference_dbm) {
                (Some(s), Some(i)) => (s, i),
                _ => (floor, floor),
            };
        }
        let dt = self.cfg.mobility_dt_s;
        mobility_step(&self.cfg, &mut self.vehicles, dt, &mut self.rng);
        self.slot += 1;
        Ok(out)
    }

    pub fn step(&mut self, user_actions: &[Action]) -> Result<SlotOutcome> {
        let pa = self.pair_actions(user_actions)?;
        self.step_pairs(&pa)
    }

    /// Uniform draw over the full action space for each transmitter.
    pub fn random_actions<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Action> {
        (0..self.cfg.pairs())
            .map(|_| Action {
                rb: rng.random_range(0..=self.cfg.resource_blocks),
                power: rng.random_range(0..self.cfg.power_pool_dbm.len()),
            })
            .collect()
    }
}
