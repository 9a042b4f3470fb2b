use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const MPH: f64 = 0.44704;

/// Virtual cell, radio and mobility parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CellConfig {
    /// Number of users; users `2p` and `2p + 1` form pair `p`.
    pub users: usize,
    pub resource_blocks: usize,
    pub rb_bandwidth_hz: f64,
    pub power_pool_dbm: Vec<f64>,
    pub noise_density_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub antenna_gain_dbi: f64,
    pub sinr_margin_db: (f64, f64),
    pub gamma_min_db: f64,
    pub slot_s: f64,
    /// Mobility advance per slot.
    pub mobility_dt_s: f64,
    pub slots_per_episode: usize,
    pub grid_width_m: f64,
    pub grid_height_m: f64,
    /// Street spacing of the Manhattan grid.
    pub block_m: f64,
    pub max_speed_mps: f64,
    pub pl0_db: f64,
    pub d0_m: f64,
    pub pathloss_exponent: f64,
    pub shadowing_db: f64,
    pub symbols_per_rb: usize,
}

impl Default for CellConfig {
    fn default() -> Self {
        Self {
            users: 6,
            resource_blocks: 3,
            rb_bandwidth_hz: 180e3,
            power_pool_dbm: vec![-100.0, 5.0, 15.0, 23.0],
            noise_density_dbm_hz: -174.0,
            noise_figure_db: 9.0,
            antenna_gain_dbi: 3.0,
            sinr_margin_db: (-5.0, 40.0),
            gamma_min_db: 10.0,
            slot_s: 1e-3,
            mobility_dt_s: 0.01,
            slots_per_episode: 100,
            grid_width_m: 300.0,
            grid_height_m: 200.0,
            block_m: 100.0,
            max_speed_mps: 45.0 * MPH,
            pl0_db: 47.86,
            d0_m: 1.0,
            pathloss_exponent: 3.68,
            shadowing_db: 8.0,
            symbols_per_rb: 168,
        }
    }
}

impl CellConfig {
    /// Two pairs sharing two resource blocks with a two-level power pool.
    pub fn desk() -> Self {
        Self {
            users: 4,
            resource_blocks: 2,
            power_pool_dbm: vec![5.0, 23.0],
            ..Self::default()
        }
    }

    pub fn pairs(&self) -> usize {
        self.users / 2
    }

    /// Actions per agent: every RB plus the dummy, times every power level.
    pub fn action_count(&self) -> usize {
        (self.resource_blocks + 1) * self.power_pool_dbm.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("cell: {msg}")));
        if self.users == 0 || !self.users.is_multiple_of(2) {
            return bad("users must be a positive even number");
        }
        if self.resource_blocks == 0 || self.power_pool_dbm.is_empty() {
            return bad("need at least one resource block and one power level");
        }
        if self.slots_per_episode == 0 || self.symbols_per_rb == 0 {
            return bad("slots_per_episode and symbols_per_rb must be at least 1");
        }
        let positive = [
            self.rb_bandwidth_hz,
            self.slot_s,
            self.grid_width_m,
            self.grid_height_m,
            self.block_m,
            self.d0_m,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("bandwidth, slot, grid, block and d0 must be positive");
        }
        let finite = [
            self.noise_density_dbm_hz,
            self.noise_figure_db,
            self.antenna_gain_dbi,
            self.gamma_min_db,
            self.pl0_db,
            self.pathloss_exponent,
            self.sinr_margin_db.0,
            self.sinr_margin_db.1,
        ];
        if finite
            .iter()
            .chain(&self.power_pool_dbm)
            .any(|v| !v.is_finite())
        {
            return bad("non-finite radio parameter");
        }
        if self.sinr_margin_db.0 >= self.sinr_margin_db.1 {
            return bad("SINR margin must be an increasing pair");
        }
        if !(self.mobility_dt_s >= 0.0 && self.max_speed_mps >= 0.0 && self.shadowing_db >= 0.0) {
            return bad("mobility step, speed and shadowing must be non-negative");
        }
        let on_grid = |len: f64| (len / self.block_m - (len / self.block_m).round()).abs() < 1e-9;
        if !on_grid(self.grid_width_m) || !on_grid(self.grid_height_m) {
            return bad("grid sides must be whole multiples of the block size");
        }
        Ok(())
    }
}

/// Deep Q-learning hyperparameters shared by all agents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DqnConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    pub gamma: f64,
    /// Training steps between target-network copies.
    pub target_update: usize,
    pub epsilon_max: f64,
    pub epsilon_min: f64,
    /// Fraction of training after which exploration reaches its floor.
    pub anneal_fraction: f64,
    pub episodes: usize,
    /// Online-network argmax evaluated by the target network; plain max otherwise.
    pub double: bool,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            hidden: vec![400, 200, 150],
            learning_rate: 1e-4,
            buffer_capacity: 25_000,
            batch_size: 200,
            gamma: 0.995,
            target_update: 5,
            epsilon_max: 1.0,
            epsilon_min: 0.2,
            anneal_fraction: 0.8,
            episodes: 5000,
            double: true,
        }
    }
}

impl DqnConfig {
    /// Small networks and batches sized for a single core.
    pub fn desk() -> Self {
        Self {
            hidden: vec![64, 32],
            learning_rate: 1e-3,
            buffer_capacity: 5000,
            batch_size: 32,
            gamma: 0.5,
            episodes: 300,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = !self.hidden.is_empty()
            && self.hidden.iter().all(|h| *h > 0)
            && self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && self.buffer_capacity >= self.batch_size
            && self.batch_size > 0
            && (0.0..=1.0).contains(&self.gamma)
            && self.target_update > 0
            && (0.0..=1.0).contains(&self.epsilon_min)
            && (self.epsilon_min..=1.0).contains(&self.epsilon_max)
            && self.anneal_fraction > 0.0
            && self.anneal_fraction <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid dqn settings: {self:?}")))
        }
    }

    /// Linear annealing from `epsilon_max` down to `epsilon_min` over the
    /// first `anneal_fraction` of the episodes.
    pub fn epsilon(&self, episode: usize) -> f64 {
        let span = self.anneal_fraction * self.episodes.max(1) as f64;
        let rate = (self.epsilon_max - self.epsilon_min) / span;
        (self.epsilon_max - rate * episode as f64).max(self.epsilon_min)
    }
}
