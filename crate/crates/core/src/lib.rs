//! XCSF as a Q-function approximator on FrozenLake8x8, measured against an
//! exact value-iteration oracle, plus Greedy Niche Mass Compaction of trained
//! populations.
//!
//! The crate is organised by stage of the pipeline:
//!
//! * [`env`]: the gridworld and its slip dynamics.
//! * [`oracle`]: value iteration, `Q*` and optimal advocacy policies.
//! * [`xcsf`]: the learning classifier system and its training loop.
//! * [`metrics`]: Q̂ MAE, policy accuracy and per-state reports.
//! * [`compaction`]: GNMC and its mass functions.
//! * [`rollout`]: steps-to-goal testing.
//! * [`harness`]: multi-trial experiments and CSV output.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod compaction;
pub mod env;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod oracle;
pub mod rollout;
pub mod xcsf;

pub use error::{Error, Result};
