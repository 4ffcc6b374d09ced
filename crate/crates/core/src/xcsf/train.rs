//! Episodic Q-learning with XCSF as the function approximator.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::condition::InputSpace;
use super::hyperparams::Hyperparams;
use super::population::Population;
use super::system::{self, ActionSet};
use crate::env::{GridWorld, State};
use crate::error::Result;
use crate::metrics::evaluate_lenient;
use crate::oracle::GroundTruth;

/// One point of a training curve.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub step: u64,
    pub mae: f64,
    pub policy_accuracy: f64,
    pub macro_count: usize,
    pub micro_count: u64,
    /// `(s, a)` pairs without any advocate at evaluation time.
    pub gaps: usize,
}

/// What to measure during training.
#[derive(Debug, Clone, Copy)]
pub struct TraceMonitor<'a> {
    pub truth: &'a GroundTruth,
    /// Steps between trace points; 0 disables tracing.
    pub cadence: u64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub population: Population,
    pub trace: Vec<TracePoint>,
    pub episodes: u64,
}

/// A running XCSF instance bound to one world.
#[derive(Debug, Clone)]
pub struct Xcsf {
    pub hp: Hyperparams,
    pub pop: Population,
    pub space: InputSpace,
    pub time: u64,
    rng: ChaCha8Rng,
}

impl Xcsf {
    pub fn new(world: &GridWorld, hp: Hyperparams, seed: u64) -> Result<Self> {
        hp.validate()?;
        Ok(Xcsf {
            hp,
            pop: Population::new(),
            space: InputSpace::of_world(world),
            time: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    fn act(&mut self, s: State) -> (ActionSet, super::population::PredictionArray) {
        let m = system::generate_match_set(&mut self.pop, s, self.time, &self.hp, &self.space, &mut self.rng);
        let pa = system::prediction_array(&self.pop, &m, s, self.hp.x0);
        let action = system::select_action(&pa, self.hp.explore_prob, &mut self.rng);
        (ActionSet::from_match_set(&self.pop, &m, action), pa)
    }

    fn learn(&mut self, aset: &ActionSet, s: State, payoff: f64) {
        system::reinforce(&mut self.pop, aset, s, payoff, &self.hp, &self.space);
        if system::ga_due(&self.pop, aset, self.time, &self.hp) {
            system::run_ga(&mut self.pop, aset, self.time, &self.hp, &self.space, &mut self.rng);
        }
    }

    /// Runs one training episode from `start`, stopping early at `budget_end`.
    /// Returns the number of environment steps taken.
    pub fn run_episode(&mut self, world: &GridWorld, start: State, budget_end: u64, mut on_step: impl FnMut(&Self)) -> Result<u64> {
        let mut s = start;
        let mut prev: Option<(ActionSet, State, f64)> = None;
        let mut steps = 0;
        while steps < self.hp.episode_step_cap && self.time < budget_end {
            let (aset, pa) = self.act(s);
            let tr = world.step(s, aset.action, &mut self.rng)?;
            self.time += 1;
            steps += 1;

            if let Some((prev_set, prev_s, prev_r)) = prev.take() {
                let target = prev_r + self.hp.gamma * pa.max().expect("covered match set");
                self.learn(&prev_set, prev_s, target);
            }
            if tr.terminal {
                self.learn(&aset, s, tr.reward);
                on_step(self);
                break;
            }
            prev = Some((aset, s, tr.reward));
            s = tr.next_state;
            on_step(self);
        }
        Ok(steps)
    }
}

/// Trains a fresh XCSF instance for `budget` environment steps.
///
/// Episodes start in a uniformly random non-terminal state. When `monitor`
/// is given, a trace point is recorded every `cadence` steps and once more
/// at the end of the budget if it is not a multiple of the cadence.
pub fn train(
    world: &GridWorld,
    hp: &Hyperparams,
    budget: u64,
    seed: u64,
    monitor: Option<TraceMonitor<'_>>,
) -> Result<TrainOutcome> {
    let mut xcsf = Xcsf::new(world, hp.clone(), seed)?;
    let mut trace = Vec::new();
    let mut episodes = 0;
    let starts = world.nonterminal_states();
    while xcsf.time < budget {
        let start = *starts.choose(&mut xcsf.rng).expect("world has non-terminal states");
        episodes += 1;
        xcsf.run_episode(world, start, budget, |x| {
            if let Some(m) = monitor {
                if m.cadence > 0 && x.time % m.cadence == 0 {
                    trace.push(trace_point(world, m.truth, x));
                }
            }
        })?;
    }
    if let Some(m) = monitor {
        if m.cadence > 0 && xcsf.time > 0 && xcsf.time % m.cadence != 0 {
            trace.push(trace_point(world, m.truth, &xcsf));
        }
    }
    Ok(TrainOutcome {
        population: xcsf.pop,
        trace,
        episodes,
    })
}

fn trace_point(world: &GridWorld, truth: &GroundTruth, x: &Xcsf) -> TracePoint {
    let predictor = x.pop.predictor(&x.space, x.hp.x0);
    let (report, gaps) = evaluate_lenient(world, truth, &predictor, x.pop.macro_count(), x.pop.micro_count());
    TracePoint {
        step: x.time,
        mae: report.mae,
        policy_accuracy: report.policy_accuracy,
        macro_count: report.macro_count,
        micro_count: report.micro_count,
        gaps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xcsf::condition::GeneralityMode;
    use std::collections::HashSet;

    #[test]
    fn zero_budget_is_empty() {
        let w = GridWorld::deterministic();
        let out = train(&w, &Hyperparams::default(), 0, 1, None).unwrap();
        assert!(out.population.is_empty());
        assert!(out.trace.is_empty());
    }

    #[test]
    fn invariants_hold_every_step() {
        let w = GridWorld::slippery();
        let hp = Hyperparams {
            pop_size: 300,
            theta_ga: 5.0,
            ..Default::default()
        };
        let mut x = Xcsf::new(&w, hp, 17).unwrap();
        let space = x.space;
        let mut checked = 0;
        for ep in 0..60 {
            let start = w.nonterminal_states()[ep % 53];
            x.run_episode(&w, start, u64::MAX, |x| {
                assert!(x.pop.micro_count() <= 300);
                let mut seen = HashSet::new();
                for c in x.pop.classifiers() {
                    assert!(seen.insert((c.condition, c.action)), "duplicate rule");
                    assert!(c.numerosity >= 1 && c.fitness > 0.0 && c.epsilon >= 0.0 && c.mu >= 0.0);
                    let cells = (0..8)
                        .flat_map(|xx| (0..8).map(move |yy| State::new(xx, yy)))
                        .filter(|s| c.condition.matches(&space, *s))
                        .count();
                    assert_eq!(c.generality, cells as f64 / 64.0);
                    assert_eq!(c.generality, c.condition.generality(&space, GeneralityMode::Product));
                }
                checked += 1;
            })
            .unwrap();
        }
        assert!(checked > 100);
    }

    #[test]
    fn training_is_reproducible() {
        let w = GridWorld::slippery();
        let truth = GroundTruth::solve(&w).unwrap();
        let hp = Hyperparams::default();
        let monitor = TraceMonitor { truth: &truth, cadence: 500 };
        let a = train(&w, &hp, 3000, 42, Some(monitor)).unwrap();
        let b = train(&w, &hp, 3000, 42, Some(monitor)).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.trace.len(), 6);
        let pa: Vec<_> = a.population.sorted_by_id().into_iter().cloned().collect();
        let pb: Vec<_> = b.population.sorted_by_id().into_iter().cloned().collect();
        assert_eq!(pa, pb);
        let c = train(&w, &hp, 3000, 43, Some(monitor)).unwrap();
        assert_ne!(a.trace, c.trace);
    }

    #[test]
    fn budget_is_respected_exactly() {
        let w = GridWorld::deterministic();
        let truth = GroundTruth::solve(&w).unwrap();
        let out = train(&w, &Hyperparams::default(), 1234, 5, Some(TraceMonitor { truth: &truth, cadence: 1234 })).unwrap();
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.trace[0].step, 1234);
    }
}
