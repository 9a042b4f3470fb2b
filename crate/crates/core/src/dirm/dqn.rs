use std::collections::VecDeque;

use rand::Rng;

use super::config::{CellConfig, DqnConfig};
use super::env::{AgentObservation, Environment};
use super::radio::{Action, SeTable};
use crate::nncore::{Activation, Array, Checkpoint, LayerSpec, Network, NetworkParams, Optimizer};
use crate::rng::Stream;
use crate::{Error, Result};

/// One slot as seen by every agent.
#[derive(Clone, Debug, PartialEq)]
pub struct Experience {
    pub obs: Vec<Vec<f64>>,
    /// Flattened action each user actually played.
    pub actions: Vec<usize>,
    pub reward: f64,
    pub next_obs: Vec<Vec<f64>>,
}

/// Fixed-capacity FIFO of experiences.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Experience>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            items: VecDeque::with_capacity(capacity.min(1 << 16)),
        }
    }

    pub fn push(&mut self, e: Experience) {
        if self.capacity == 0 {
            return;
        }
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(e);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Experience> {
        self.items.get(i)
    }
}

pub fn q_network_specs(cell: &CellConfig, dqn: &DqnConfig) -> Vec<LayerSpec> {
    let mut specs = Vec::new();
    let mut width = AgentObservation::SIZE;
    for &h in &dqn.hidden {
        specs.push(LayerSpec::dense(width, h, Activation::Tanh));
        width = h;
    }
    specs.push(LayerSpec::dense(
        width,
        cell.action_count(),
        Activation::Linear,
    ));
    specs
}

/// Regression targets `r + gamma * Q'(o', a*)`, where `a*` is the online
/// argmax when `double` is set and the target argmax otherwise.
pub fn td_targets(
    online: &Network,
    target: &Network,
    batch: &[(&[f64], f64)],
    gamma: f64,
    double: bool,
) -> Result<Vec<f64>> {
    batch
        .iter()
        .map(|(next, r)| {
            if gamma == 0.0 {
                return Ok(*r);
            }
            let x = Array::from_vec(next.to_vec());
            let qt = target.predict(&x)?;
            let best = if double {
                qt.data()[online.predict(&x)?.argmax()]
            } else {
                qt.data()[qt.argmax()]
            };
            Ok(r + gamma * best)
        })
        .collect()
}

#[derive(Clone, Debug)]
struct Learner {
    online: Network,
    target: Network,
    opt: Optimizer,
}

impl Learner {
    fn update(
        &mut self,
        buffer: &ReplayBuffer,
        user: usize,
        dqn: &DqnConfig,
        rng: &mut Stream,
    ) -> Result<f64> {
        let picks: Vec<&Experience> = (0..dqn.batch_size)
            .map(|_| {
                buffer
                    .get(rng.random_range(0..buffer.len()))
                    .expect("index in range")
            })
            .collect();
        let next: Vec<(&[f64], f64)> = picks
            .iter()
            .map(|e| (e.next_obs[user].as_slice(), e.reward))
            .collect();
        let targets = td_targets(&self.online, &self.target, &next, dqn.gamma, dqn.double)?;
        let b = picks.len() as f64;
        let mut grads = NetworkParams::zeros(&self.online.specs);
        let mut loss = 0.0;
        for (e, y) in picks.iter().zip(&targets) {
            let (q, cache) = self.online.forward(&Array::from_vec(e.obs[user].clone()))?;
            let a = e.actions[user];
            let err = q.data()[a] - y;
            loss += err * err / b;
            let mut g = vec![0.0; q.len()];
            g[a] = 2.0 * err / b;
            grads.add_assign(&self.online.backward(&cache, &Array::from_vec(g))?.params);
        }
        if !loss.is_finite() {
            return Err(Error::training(
                format!("dqn agent {user}"),
                "loss is not finite",
            ));
        }
        self.opt.step(&mut self.online.params, &grads)?;
        Ok(loss)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RewardPoint {
    pub episode: usize,
    pub mean_reward: f64,
    pub epsilon: f64,
    pub mean_loss: f64,
}

/// Trained per-user Q-networks plus the observation fingerprint used when
/// acting greedily.
#[derive(Clone, Debug, PartialEq)]
pub struct DirmPolicy {
    pub networks: Vec<Network>,
    pub epsilon: f64,
    pub episode: f64,
}

impl DirmPolicy {
    pub fn greedy_action(&self, user: usize, obs: &AgentObservation) -> Result<usize> {
        let net = self
            .networks
            .get(user)
            .ok_or_else(|| Error::Input(format!("no network for user {user}")))?;
        Ok(net.predict(&Array::from_vec(obs.to_vec()))?.argmax())
    }

    pub fn to_checkpoints(&self) -> Result<Vec<Checkpoint>> {
        self.networks
            .iter()
            .enumerate()
            .map(|(u, n)| {
                Checkpoint::from_network(n)?
                    .with_meta("user", u)?
                    .with_meta("epsilon", self.epsilon)?
                    .with_meta("episode", self.episode)
            })
            .collect()
    }

    pub fn from_checkpoints(cks: &[Checkpoint]) -> Result<Self> {
        let first = cks
            .first()
            .ok_or_else(|| Error::Input("no agent checkpoints".into()))?;
        let networks = cks
            .iter()
            .enumerate()
            .map(|(u, c)| {
                let stored: usize = c.meta_as("user")?;
                if stored != u {
                    return Err(Error::Input(format!(
                        "checkpoint {u} belongs to user {stored}"
                    )));
                }
                c.network()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            networks,
            epsilon: first.meta_as("epsilon")?,
            episode: first.meta_as("episode")?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct DirmTraining {
    pub policy: DirmPolicy,
    pub curve: Vec<RewardPoint>,
}

/// Centralized training of one Q-network per user with a shared replay
/// buffer and shared reward.
pub fn dqn_train(
    cell: &CellConfig,
    table: &SeTable,
    dqn: &DqnConfig,
    seed: u64,
) -> Result<DirmTraining> {
    cell.validate()?;
    dqn.validate()?;
    let specs = q_network_specs(cell, dqn);
    let mut learners = (0..cell.users)
        .map(|u| {
            let online =
                Network::new(specs.clone(), &mut Stream::new(seed, "dirm-init", u as u64))?;
            let opt = Optimizer::rmsprop(&online.params, dqn.learning_rate)?;
            Ok(Learner {
                target: online.clone(),
                online,
                opt,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut buffer = ReplayBuffer::new(dqn.buffer_capacity);
    let mut curve = Vec::with_capacity(dqn.episodes);
    let mut steps = 0usize;
    let dummy = Action::dummy(cell).index(cell);
    for ep in 0..dqn.episodes {
        let eps = dqn.epsilon(ep);
        let progress = ep as f64 / dqn.episodes as f64;
        let mut env = Environment::new(
            cell,
            table,
            Stream::new(seed, "dirm-train-episode", ep as u64),
        )?;
        let mut explore = Stream::new(seed, "dirm-explore", ep as u64);
        let mut replay_rng = Stream::new(seed, "dirm-replay", ep as u64);
        let mut obs = env.observe(eps, progress);
        let (mut reward_sum, mut loss_sum, mut updates) = (0.0, 0.0, 0usize);
        while !env.done() {
            let mut played = vec![dummy; cell.users];
            for (u, learner) in learners.iter().enumerate() {
                if !env.is_transmitter(u) {
                    continue;
                }
                played[u] = if explore.random::<f64>() < eps {
                    explore.random_range(0..cell.action_count())
                } else {
                    learner
                        .online
                        .predict(&Array::from_vec(obs[u].to_vec()))?
                        .argmax()
                };
            }
            let actions = played
                .iter()
                .map(|&i| Action::from_index(cell, i))
                .collect::<Result<Vec<_>>>()?;
            let out = env.step(&actions)?;
            let next = env.observe(eps, progress);
            buffer.push(Experience {
                obs: obs.iter().map(AgentObservation::to_vec).collect(),
                actions: played,
                reward: out.reward,
                next_obs: next.iter().map(AgentObservation::to_vec).collect(),
            });
            reward_sum += out.reward;
            obs = next;
            if buffer.len() >= dqn.batch_size {
                for (u, learner) in learners.iter_mut().enumerate() {
                    loss_sum += learner.update(&buffer, u, dqn, &mut replay_rng)?;
                    updates += 1;
                }
                steps += 1;
                if steps.is_multiple_of(dqn.target_update) {
                    for l in learners.iter_mut() {
                        l.target.params = l.online.params.clone();
                    }
                }
            }
        }
        curve.push(RewardPoint {
            episode: ep,
            mean_reward: reward_sum / cell.slots_per_episode as f64,
            epsilon: eps,
            mean_loss: if updates == 0 {
                0.0
            } else {
                loss_sum / updates as f64
            },
        });
    }
    Ok(DirmTraining {
        policy: DirmPolicy {
            networks: learners.into_iter().map(|l| l.online).collect(),
            epsilon: dqn.epsilon_min,
            episode: 1.0,
        },
        curve,
    })
}
