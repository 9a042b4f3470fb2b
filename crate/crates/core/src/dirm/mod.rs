//! Multi-agent resource-block and power selection in a vehicular virtual
//! cell: environment, per-user double DQN, brute-force and random baselines.

mod baseline;
mod config;
mod dqn;
mod env;
mod mobility;
mod radio;

pub use baseline::{
    brute_force, combination_count, evaluate, write_eval_csv, write_rewards_csv, BruteForce,
    BruteForceResult, Evaluation, Policy, RandomAccess,
};
pub use config::{CellConfig, DqnConfig};
pub use dqn::{
    dqn_train, q_network_specs, td_targets, DirmPolicy, DirmTraining, Experience, ReplayBuffer,
    RewardPoint,
};
pub use env::{normalize_dbm, AgentObservation, Environment, EpisodeStats};
pub use mobility::{mobility_step, spawn, Heading, Vehicle};
pub use radio::{
    channel_gain, compute_sinr, db_to_lin, lin_to_db, noise_power_mw, path_loss_db, score_slot,
    Action, LinkOutcome, SeTable, SlotOutcome, SlotState,
};
