//! Steps-to-goal testing of greedy policies.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::{Action, GridWorld, State};
use crate::error::{Error, Result};
use crate::oracle::QFunction;

pub const DEFAULT_ROLLOUT_BUDGET: usize = 150;
pub const DEFAULT_SUCCESS_TARGET: usize = 100;
pub const DEFAULT_STEP_CAP: u64 = 200;
pub const ROLLOUT_START: State = State::new(0, 0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StgConfig {
    pub budget: usize,
    pub success_target: usize,
    pub step_cap: u64,
    pub base_seed: u64,
}

impl Default for StgConfig {
    fn default() -> Self {
        StgConfig {
            budget: DEFAULT_ROLLOUT_BUDGET,
            success_target: DEFAULT_SUCCESS_TARGET,
            step_cap: DEFAULT_STEP_CAP,
            base_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StgReport {
    pub mean_stg: Option<f64>,
    pub max_stg: Option<u64>,
    pub num_rollouts: usize,
    pub successes: usize,
    pub complete: bool,
}

/// First maximal action in `[L, D, R, U]` order.
pub fn greedy_action(row: &[Option<f64>; 4]) -> Option<Action> {
    let mut best: Option<(Action, f64)> = None;
    for a in Action::ALL {
        if let Some(v) = row[a.index()] {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((a, v));
            }
        }
    }
    best.map(|(a, _)| a)
}

/// Runs up to `cfg.budget` greedy rollouts from `(0, 0)`, stopping at the
/// `cfg.success_target`-th success. Rollout `i` uses seed `base_seed + i`.
pub fn stg_test<Q: QFunction + ?Sized>(policy: &Q, world: &GridWorld, cfg: &StgConfig) -> Result<StgReport> {
    let mut table = vec![None; world.num_cells()];
    for &s in world.nonterminal_states() {
        let row = policy.q_values(s);
        if let Some(a) = Action::ALL.into_iter().find(|a| row[a.index()].is_none()) {
            return Err(Error::gap(s, a));
        }
        table[world.cell_index(s)] = greedy_action(&row);
    }
    if world.is_terminal(ROLLOUT_START) {
        return Err(Error::Precondition("rollout start (0, 0) is terminal".into()));
    }

    let mut stgs: Vec<u64> = Vec::new();
    let mut num_rollouts = 0;
    while num_rollouts < cfg.budget && stgs.len() < cfg.success_target {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.base_seed.wrapping_add(num_rollouts as u64));
        num_rollouts += 1;
        let mut s = ROLLOUT_START;
        for step in 1..=cfg.step_cap {
            let a = table[world.cell_index(s)].expect("non-terminal state has an action");
            let tr = world.step(s, a, &mut rng)?;
            if tr.terminal {
                if tr.reward > 0.0 {
                    stgs.push(step);
                }
                break;
            }
            s = tr.next_state;
        }
    }
    let successes = stgs.len();
    let (mean_stg, max_stg) = if successes > 0 {
        (
            Some(stgs.iter().sum::<u64>() as f64 / successes as f64),
            stgs.iter().copied().max(),
        )
    } else {
        (None, None)
    };
    Ok(StgReport {
        mean_stg,
        max_stg,
        num_rollouts,
        successes,
        complete: successes >= cfg.success_target,
    })
}
