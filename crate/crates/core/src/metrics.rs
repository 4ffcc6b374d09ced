//! Optimality metrics against the value-iteration ground truth.

use std::collections::BTreeMap;

use crate::env::{Action, GridWorld, State, NUM_ACTIONS};
use crate::error::{Error, Result};
use crate::oracle::{greedy_advocacy, Advocacy, AdvocacyPolicy, GroundTruth, QFunction, QTable};

/// Tie tolerance for advocacy derived from learned predictions (exact argmax).
pub const LEARNED_TIE_TOL: f64 = 0.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mae: f64,
    pub policy_accuracy: f64,
    pub macro_count: usize,
    pub micro_count: u64,
    pub per_state_correct: BTreeMap<State, bool>,
}

/// Mean absolute error of `system` against `q_star` over every non-terminal `(s, a)`.
pub fn q_mae<Q: QFunction + ?Sized>(q_star: &QTable, system: &Q) -> Result<f64> {
    let mut total = 0.0;
    let mut n = 0usize;
    for &s in q_star.domain() {
        let row = system.q_values(s);
        for a in Action::ALL {
            let truth = q_star.get(s, a).expect("domain state");
            let est = row[a.index()].ok_or_else(|| Error::gap(s, a))?;
            total += (truth - est).abs();
            n += 1;
        }
    }
    Ok(total / n as f64)
}

/// 1 if `a_hat` advocates at least one action also advocated by `a_star`.
pub fn correctness(a_star: Advocacy, a_hat: Advocacy) -> bool {
    !a_star.intersect(a_hat).is_empty()
}

/// Fraction of states where `pi_hat` advocates at least one optimal action.
pub fn policy_accuracy(pi_star: &AdvocacyPolicy, pi_hat: &AdvocacyPolicy) -> f64 {
    let per_state = per_state_correctness(pi_star, pi_hat);
    per_state.values().filter(|c| **c).count() as f64 / per_state.len() as f64
}

pub fn per_state_correctness(pi_star: &AdvocacyPolicy, pi_hat: &AdvocacyPolicy) -> BTreeMap<State, bool> {
    pi_star
        .iter()
        .map(|(s, star)| (s, correctness(star, pi_hat.get(s).unwrap_or(Advocacy::NONE))))
        .collect()
}

/// Full evaluation of a gap-free Q-function.
pub fn evaluate<Q: QFunction + ?Sized>(
    world: &GridWorld,
    truth: &GroundTruth,
    system: &Q,
    macro_count: usize,
    micro_count: u64,
) -> Result<EvalReport> {
    let mae = q_mae(&truth.q_star, system)?;
    let pi_hat = greedy_advocacy(world, system, LEARNED_TIE_TOL);
    let per_state_correct = per_state_correctness(&truth.pi_star, &pi_hat);
    let policy_accuracy = policy_accuracy(&truth.pi_star, &pi_hat);
    Ok(EvalReport {
        mae,
        policy_accuracy,
        macro_count,
        micro_count,
        per_state_correct,
    })
}

/// Evaluation that tolerates coverage gaps: a missing prediction counts as 0
/// in the MAE and is never advocated. Returns the report and the gap count.
pub fn evaluate_lenient<Q: QFunction + ?Sized>(
    world: &GridWorld,
    truth: &GroundTruth,
    system: &Q,
    macro_count: usize,
    micro_count: u64,
) -> (EvalReport, usize) {
    let mut gaps = 0;
    let mut total = 0.0;
    let mut rows = Vec::with_capacity(world.nonterminal_states().len());
    for &s in world.nonterminal_states() {
        let row = system.q_values(s);
        for a in Action::ALL {
            let truth_v = truth.q_star.get(s, a).expect("domain state");
            match row[a.index()] {
                Some(v) => total += (truth_v - v).abs(),
                None => {
                    gaps += 1;
                    total += truth_v.abs();
                }
            }
        }
        rows.push(row);
    }
    let mae = total / (rows.len() * NUM_ACTIONS) as f64;
    let mut it = rows.into_iter();
    let pi_hat = AdvocacyPolicy::from_fn(world, |_| {
        crate::oracle::advocacy_of(&it.next().expect("one row per state"), LEARNED_TIE_TOL)
    });
    let per_state_correct = per_state_correctness(&truth.pi_star, &pi_hat);
    let policy_accuracy = policy_accuracy(&truth.pi_star, &pi_hat);
    (
        EvalReport {
            mae,
            policy_accuracy,
            macro_count,
            micro_count,
            per_state_correct,
        },
        gaps,
    )
}

/// Per-state mean correctness across instances.
///
/// # Panics
/// If `reports` is empty.
pub fn optimal_action_frequency(reports: &[BTreeMap<State, bool>]) -> BTreeMap<State, f64> {
    assert!(!reports.is_empty(), "need at least one instance");
    let mut sums: BTreeMap<State, usize> = BTreeMap::new();
    for r in reports {
        for (s, c) in r {
            *sums.entry(*s).or_default() += *c as usize;
        }
    }
    sums.into_iter()
        .map(|(s, n)| (s, n as f64 / reports.len() as f64))
        .collect()
}

/// Per-state tally of advocated actions across instances.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ActionDistribution {
    pub counts: BTreeMap<State, [usize; NUM_ACTIONS]>,
    pub instances: usize,
}

/// Counts, for every state, how many instances advocate each action. A state
/// where an instance advocates several actions contributes to each.
pub fn action_distribution(policies: &[AdvocacyPolicy]) -> ActionDistribution {
    let mut counts: BTreeMap<State, [usize; NUM_ACTIONS]> = BTreeMap::new();
    for pi in policies {
        for (s, adv) in pi.iter() {
            let entry = counts.entry(s).or_default();
            for a in adv.actions() {
                entry[a.index()] += 1;
            }
        }
    }
    ActionDistribution {
        counts,
        instances: policies.len(),
    }
}
