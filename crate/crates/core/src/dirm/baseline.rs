use std::io::Write;

use super::config::CellConfig;
use super::dqn::DirmPolicy;
use super::env::{Environment, EpisodeStats};
use super::radio::{score_slot, Action, SeTable, SlotState};
use crate::csvfmt::fmt_f64;
use crate::rng::Stream;
use crate::{Error, Result};

/// `((M + 1) * |P|)^transmitters`, saturating at `u128::MAX`.
pub fn combination_count(resource_blocks: usize, pool_size: usize, transmitters: usize) -> u128 {
    let per = (resource_blocks as u128 + 1) * pool_size as u128;
    u32::try_from(transmitters)
        .ok()
        .and_then(|t| per.checked_pow(t))
        .unwrap_or(u128::MAX)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceResult {
    pub actions: Vec<Action>,
    pub value: f64,
    pub evaluated: u128,
}

/// Exhaustive search of the joint action maximizing the slot reward. Joint
/// actions are visited in lexicographic order of the per-pair flattened
/// indices, so ties go to the lowest joint index.
pub fn brute_force(
    cfg: &CellConfig,
    table: &SeTable,
    state: &SlotState,
    cap: u128,
) -> Result<BruteForceResult> {
    let n = state.pairs();
    let count = combination_count(cfg.resource_blocks, cfg.power_pool_dbm.len(), n);
    if count > cap {
        return Err(Error::Budget { count, cap });
    }
    let per = cfg.action_count();
    let mut digits = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut evaluated = 0u128;
    loop {
        let actions = digits
            .iter()
            .map(|&i| Action::from_index(cfg, i))
            .collect::<Result<Vec<_>>>()?;
        let v = score_slot(cfg, table, state, &actions)?.reward;
        evaluated += 1;
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, digits.clone()));
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                let (value, idx) = best.expect("at least one combination");
                return Ok(BruteForceResult {
                    actions: idx
                        .iter()
                        .map(|&i| Action::from_index(cfg, i))
                        .collect::<Result<_>>()?,
                    value,
                    evaluated,
                });
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < per {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Chooses per-pair actions for the environment's current slot.
pub trait Policy {
    fn name(&self) -> &str;
    fn act(&mut self, env: &Environment) -> Result<Vec<Action>>;
}

impl Policy for DirmPolicy {
    fn name(&self) -> &str {
        "dirm"
    }

    fn act(&mut self, env: &Environment) -> Result<Vec<Action>> {
        let obs = env.observe(self.epsilon, self.episode);
        (0..env.cfg.pairs())
            .map(|p| {
                let u = env.transmitter(p);
                Action::from_index(&env.cfg, self.greedy_action(u, &obs[u])?)
            })
            .collect()
    }
}

pub struct RandomAccess {
    rng: Stream,
}

impl RandomAccess {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Stream::new(seed, "dirm-random-access", 0),
        }
    }
}

impl Policy for RandomAccess {
    fn name(&self) -> &str {
        "random"
    }

    fn act(&mut self, env: &Environment) -> Result<Vec<Action>> {
        Ok(env.random_actions(&mut self.rng))
    }
}

pub struct BruteForce {
    pub cap: u128,
}

impl Policy for BruteForce {
    fn name(&self) -> &str {
        "brute_force"
    }

    fn act(&mut self, env: &Environment) -> Result<Vec<Action>> {
        Ok(brute_force(&env.cfg, &env.table, &env.slot_state(), self.cap)?.actions)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub policy: String,
    pub episodes: Vec<EpisodeStats>,
    pub total: EpisodeStats,
}

impl Evaluation {
    pub fn kbps_per_pair(&self, cfg: &CellConfig) -> f64 {
        self.total.kbps_per_pair(cfg.slot_s)
    }
}

/// Runs fixed-seed test episodes. Episode `i` uses the same mobility and
/// shadowing for every policy evaluated with the same seed.
pub fn evaluate(
    cfg: &CellConfig,
    table: &SeTable,
    policy: &mut dyn Policy,
    episodes: usize,
    seed: u64,
) -> Result<Evaluation> {
    let mut total = EpisodeStats::new(cfg.pairs());
    let mut per = Vec::with_capacity(episodes);
    for ep in 0..episodes {
        let mut env = Environment::new(
            cfg,
            table,
            Stream::new(seed, "dirm-eval-episode", ep as u64),
        )?;
        let mut stats = EpisodeStats::new(cfg.pairs());
        while !env.done() {
            let actions = policy.act(&env)?;
            stats.record(&env.step_pairs(&actions)?);
        }
        total.merge(&stats);
        per.push(stats);
    }
    Ok(Evaluation {
        policy: policy.name().to_string(),
        episodes: per,
        total,
    })
}

pub fn write_eval_csv<W: Write>(cfg: &CellConfig, rows: &[Evaluation], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["policy", "kbps_per_pair", "collision_rate", "failure_rate"])?;
    for r in rows {
        w.write_record([
            r.policy.clone(),
            fmt_f64(r.kbps_per_pair(cfg)),
            fmt_f64(r.total.collision_rate()),
            fmt_f64(r.total.failure_rate()),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<eval csv>", e))
}

pub fn write_rewards_csv<W: Write>(curve: &[super::dqn::RewardPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["episode", "mean_reward", "epsilon"])?;
    for p in curve {
        w.write_record([
            p.episode.to_string(),
            fmt_f64(p.mean_reward),
            fmt_f64(p.epsilon),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<rewards csv>", e))
}
