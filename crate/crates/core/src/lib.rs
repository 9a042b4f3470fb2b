//! Link-level building blocks for learned radio receivers: a small neural
//! network core, signal generation and channels, modulation classification,
//! neural min-sum LDPC decoding, multi-agent resource allocation and
//! compressed spectrum sensing, plus a seeded experiment harness.

mod error;

pub mod amc;
pub mod csvfmt;
pub mod digest;
pub mod dirm;
pub mod harness;
pub mod iubr;
pub mod ldpc;
pub mod nncore;
pub mod rng;
pub mod sigchain;

pub use error::{Error, Result};
