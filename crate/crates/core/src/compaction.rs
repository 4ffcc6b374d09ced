//! Greedy Niche Mass Compaction.
//!
//! Every `(s, a)` niche over the non-terminal states is scanned; its members are
//! sorted by descending mass and kept greedily until the kept mass reaches
//! `(1 - rho)` of the niche total. Classifiers kept by any niche survive; all
//! others are dropped. Classifiers that match no non-terminal state are never
//! kept, even at `rho = 0`.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::env::{Action, GridWorld, State};
use crate::error::{Error, Result};
use crate::xcsf::{Classifier, InputSpace, Population};

/// Per-classifier quality weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MassFunction {
    /// `F`
    Fit,
    /// `F · numerosity · generality`
    Tan,
    /// `1 / F`
    InvFit,
}

impl MassFunction {
    pub const ALL: [MassFunction; 3] = [MassFunction::Fit, MassFunction::Tan, MassFunction::InvFit];

    pub fn evaluate(self, c: &Classifier) -> f64 {
        match self {
            MassFunction::Fit => mass_fit(c),
            MassFunction::Tan => mass_tan(c),
            MassFunction::InvFit => mass_inv_fit(c),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MassFunction::Fit => "fit",
            MassFunction::Tan => "tan",
            MassFunction::InvFit => "inv_fit",
        }
    }
}

impl fmt::Display for MassFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MassFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fit" => Ok(MassFunction::Fit),
            "tan" => Ok(MassFunction::Tan),
            "inv_fit" => Ok(MassFunction::InvFit),
            other => Err(Error::UnknownMass(other.to_string())),
        }
    }
}

pub fn mass_fit(c: &Classifier) -> f64 {
    c.fitness
}

pub fn mass_tan(c: &Classifier) -> f64 {
    c.fitness * c.numerosity as f64 * c.generality
}

pub fn mass_inv_fit(c: &Classifier) -> f64 {
    1.0 / c.fitness
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompactionConfig {
    pub mass: MassFunction,
    rho: f64,
}

impl CompactionConfig {
    pub fn new(mass: MassFunction, rho: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::Precondition(format!("rho must lie in [0, 1), got {rho}")));
        }
        Ok(CompactionConfig { mass, rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// The standard ρ grid `0, 0.01, .., 0.99`.
pub fn rho_grid() -> Vec<f64> {
    (0..100).map(|i| i as f64 / 100.0).collect()
}

/// Descending mass, then higher numerosity, then higher experience, then creation order.
pub fn niche_order(mass: MassFunction) -> impl Fn(&&Classifier, &&Classifier) -> Ordering {
    move |a, b| {
        mass.evaluate(b)
            .total_cmp(&mass.evaluate(a))
            .then(b.numerosity.cmp(&a.numerosity))
            .then(b.experience.cmp(&a.experience))
            .then(a.id.cmp(&b.id))
    }
}

/// Target mass per niche, in scan order (`S` row-major, then `[L, D, R, U]`).
#[derive(Debug, Clone, PartialEq)]
pub struct NicheTargets(pub Vec<((State, Action), f64)>);

#[derive(Debug, Clone)]
pub struct Compaction {
    pub population: Population,
    /// Ids of the surviving macroclassifiers.
    pub kept: HashSet<u64>,
    pub targets: NicheTargets,
}

/// Classifiers matching `s` and advocating `a`, sorted into niche order.
pub fn sorted_niche<'p>(
    pop: &'p Population,
    space: &InputSpace,
    s: State,
    a: Action,
    mass: MassFunction,
) -> Vec<&'p Classifier> {
    let mut niche: Vec<&Classifier> = pop
        .classifiers()
        .filter(|c| c.action == a && c.matches(space, s))
        .collect();
    niche.sort_by(niche_order(mass));
    niche
}

/// Compacts `pop`, returning the reduced population.
pub fn gnmc(pop: &Population, world: &GridWorld, cfg: &CompactionConfig) -> Result<Population> {
    gnmc_detailed(pop, world, cfg).map(|c| c.population)
}

pub fn gnmc_detailed(pop: &Population, world: &GridWorld, cfg: &CompactionConfig) -> Result<Compaction> {
    run(pop, world, cfg.mass, |_, total| (1.0 - cfg.rho) * total)
}

/// Re-runs compaction with per-niche target masses fixed from an earlier pass.
pub fn gnmc_with_targets(
    pop: &Population,
    world: &GridWorld,
    mass: MassFunction,
    targets: &NicheTargets,
) -> Result<Compaction> {
    let mut it = targets.0.iter();
    run(pop, world, mass, |key, _| {
        let (k, t) = it.next().expect("one target per niche");
        assert_eq!(*k, key, "targets were computed for a different scan");
        *t
    })
}

fn run(
    pop: &Population,
    world: &GridWorld,
    mass: MassFunction,
    mut target_for: impl FnMut((State, Action), f64) -> f64,
) -> Result<Compaction> {
    let space = InputSpace::of_world(world);
    let mut kept = HashSet::new();
    let mut targets = Vec::with_capacity(world.nonterminal_states().len() * Action::ALL.len());
    for &s in world.nonterminal_states() {
        for a in Action::ALL {
            let niche = sorted_niche(pop, &space, s, a, mass);
            if niche.is_empty() {
                return Err(Error::gap(s, a));
            }
            let total: f64 = niche.iter().map(|c| mass.evaluate(c)).sum();
            let target = target_for((s, a), total);
            targets.push(((s, a), target));
            let mut current = 0.0;
            for c in niche {
                if current >= target {
                    break;
                }
                kept.insert(c.id);
                current += mass.evaluate(c);
            }
        }
    }
    let mut population = pop.clone();
    population.retain(|c| kept.contains(&c.id));
    Ok(Compaction {
        population,
        kept,
        targets: NicheTargets(targets),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xcsf::{GeneralityMode, Interval, IntervalCondition};

    fn clf(x: (i32, i32), y: (i32, i32), action: Action, fitness: f64, numerosity: u32) -> Classifier {
        let space = InputSpace { max: [7, 7] };
        let cond = IntervalCondition::new([Interval::new(x.0, x.1), Interval::new(y.0, y.1)]);
        let mut c = Classifier::new(cond, action, 0, 1e-3, fitness, &space, GeneralityMode::Product);
        c.numerosity = numerosity;
        c
    }

    #[test]
    fn mass_examples() {
        let mut c = clf((0, 3), (0, 3), Action::Up, 0.5, 2);
        c.generality = 0.25;
        assert_eq!(mass_fit(&c), 0.5);
        assert_eq!(mass_tan(&c), 0.25);
        assert_eq!(mass_inv_fit(&c), 2.0);
        let one = clf((0, 7), (0, 7), Action::Up, 1.0, 1);
        for m in MassFunction::ALL {
            assert_eq!(m.evaluate(&one), 1.0);
        }
    }

    #[test]
    fn mass_names_parse() {
        for m in MassFunction::ALL {
            assert_eq!(m.name().parse::<MassFunction>().unwrap(), m);
        }
        assert!(matches!("fitness".parse::<MassFunction>(), Err(Error::UnknownMass(_))));
    }

    #[test]
    fn rho_must_be_below_one() {
        assert!(CompactionConfig::new(MassFunction::Fit, 1.0).is_err());
        assert!(CompactionConfig::new(MassFunction::Fit, -0.1).is_err());
        assert!(CompactionConfig::new(MassFunction::Fit, 0.99).is_ok());
        assert_eq!(rho_grid().len(), 100);
        assert_eq!(rho_grid()[99], 0.99);
    }

    fn blanket(pop: &mut Population) {
        for a in Action::ALL {
            pop.insert(clf((0, 7), (0, 7), a, 0.9, 3));
        }
    }

    #[test]
    fn terminal_only_classifiers_removed_at_rho_zero() {
        let w = GridWorld::deterministic();
        let mut pop = Population::new();
        blanket(&mut pop);
        // matches only the goal cell (7, 7)
        pop.insert(clf((7, 0), (7, 0), Action::Down, 0.5, 1));
        // matches only the hole (3, 2)
        pop.insert(clf((3, 0), (2, 0), Action::Left, 0.5, 1));
        let kept = pop.insert(clf((0, 1), (0, 1), Action::Left, 0.01, 1));
        let out = gnmc(&pop, &w, &CompactionConfig::new(MassFunction::Fit, 0.0).unwrap()).unwrap();
        assert_eq!(out.macro_count(), 5);
        assert!(out.get(kept).is_some());
    }

    #[test]
    fn high_rho_keeps_dominant_classifier() {
        let w = GridWorld::deterministic();
        let mut pop = Population::new();
        blanket(&mut pop);
        let weak = pop.insert(clf((0, 2), (0, 2), Action::Right, 0.001, 1));
        let out = gnmc(&pop, &w, &CompactionConfig::new(MassFunction::Fit, 0.99).unwrap()).unwrap();
        assert_eq!(out.macro_count(), 4);
        assert!(out.get(weak).is_none());
        // inverse fitness keeps the weak one in its niches, the blanket elsewhere
        let out = gnmc(&pop, &w, &CompactionConfig::new(MassFunction::InvFit, 0.99).unwrap()).unwrap();
        assert!(out.get(weak).is_some());
        assert_eq!(out.macro_count(), 5);
    }

    #[test]
    fn ties_break_by_numerosity_then_experience_then_age() {
        let w = GridWorld::deterministic();
        let mut pop = Population::new();
        let first = pop.insert(clf((0, 7), (0, 7), Action::Up, 0.5, 1));
        let mut more_exp = clf((0, 7), (0, 6), Action::Up, 0.5, 1);
        more_exp.experience = 10;
        let b = pop.insert(more_exp);
        let _c = pop.insert(clf((0, 7), (0, 7), Action::Left, 0.5, 1));
        let _d = pop.insert(clf((0, 7), (0, 7), Action::Down, 0.5, 1));
        let _e = pop.insert(clf((0, 7), (0, 7), Action::Right, 0.5, 1));
        let out = gnmc(&pop, &w, &CompactionConfig::new(MassFunction::Fit, 0.9).unwrap()).unwrap();
        // rows 0..=6 prefer the more experienced; row 7 only has `first`
        assert!(out.get(b).is_some());
        assert!(out.get(first).is_some());
        let mut pop2 = Population::new();
        let older = pop2.insert(clf((0, 7), (0, 7), Action::Up, 0.5, 1));
        let younger = pop2.insert(clf((0, 7), (0, 6), Action::Up, 0.5, 1));
        for a in [Action::Left, Action::Down, Action::Right] {
            pop2.insert(clf((0, 7), (0, 7), a, 0.5, 1));
        }
        let out = gnmc(&pop2, &w, &CompactionConfig::new(MassFunction::Fit, 0.9).unwrap()).unwrap();
        assert!(out.get(older).is_some());
        assert!(out.get(younger).is_none());
    }

    #[test]
    fn gap_is_reported() {
        let w = GridWorld::deterministic();
        let mut pop = Population::new();
        for a in [Action::Left, Action::Down, Action::Right] {
            pop.insert(clf((0, 7), (0, 7), a, 0.5, 1));
        }
        let err = gnmc(&pop, &w, &CompactionConfig::new(MassFunction::Fit, 0.5).unwrap()).unwrap_err();
        assert!(matches!(
            err,
            Error::CoverageGap { state: State { x: 0, y: 0 }, action: Action::Up, .. }
        ));
    }

    #[test]
    fn single_classifier_niches_unchanged() {
        let w = GridWorld::deterministic();
        let mut pop = Population::new();
        blanket(&mut pop);
        for rho in [0.0, 0.5, 0.99] {
            for m in MassFunction::ALL {
                let out = gnmc(&pop, &w, &CompactionConfig::new(m, rho).unwrap()).unwrap();
                assert_eq!(out.macro_count(), 4);
                assert_eq!(out.micro_count(), 12);
            }
        }
    }

    #[test]
    fn plain_reapplication_can_shrink_but_frozen_targets_cannot() {
        let w = GridWorld::deterministic();
        let mut pop = Population::new();
        blanket(&mut pop);
        pop.retain(|c| c.action != Action::Up);
        // the Up niches in rows 0..=5 hold masses 0.4, 0.35, 0.25
        for (f, span) in [(0.4, 7), (0.35, 6), (0.25, 5)] {
            pop.insert(clf((0, 7), (0, span), Action::Up, f, 1));
        }
        let cfg = CompactionConfig::new(MassFunction::Fit, 0.5).unwrap();
        let first = gnmc_detailed(&pop, &w, &cfg).unwrap();
        let again = gnmc(&first.population, &w, &cfg).unwrap();
        assert!(again.macro_count() < first.population.macro_count());
        let frozen = gnmc_with_targets(&first.population, &w, MassFunction::Fit, &first.targets).unwrap();
        assert_eq!(frozen.kept, first.kept);
    }
}
