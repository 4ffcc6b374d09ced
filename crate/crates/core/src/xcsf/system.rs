//! Matching, covering, reinforcement, GA, subsumption and deletion.

use rand::seq::SliceRandom;
use rand::Rng;

use super::classifier::{input_vector, Classifier};
use super::condition::{InputSpace, IntervalCondition, NUM_ALLELES};
use super::hyperparams::Hyperparams;
use super::population::{ClassifierRef, Population, PredictionArray};
use crate::env::{Action, State, NUM_ACTIONS};

pub type MatchSet = Vec<ClassifierRef>;

#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    pub action: Action,
    pub members: Vec<ClassifierRef>,
}

impl ActionSet {
    pub fn from_match_set(pop: &Population, m: &[ClassifierRef], action: Action) -> Self {
        ActionSet {
            action,
            members: m
                .iter()
                .copied()
                .filter(|r| pop.get(*r).is_some_and(|c| c.action == action))
                .collect(),
        }
    }

    /// Drops handles whose classifier has since been deleted.
    pub fn prune(&mut self, pop: &Population) {
        self.members.retain(|r| pop.get(*r).is_some());
    }
}

/// Classifier builder for covering `s` with `action`.
pub fn cover<R: Rng + ?Sized>(
    s: State,
    action: Action,
    time: u64,
    hp: &Hyperparams,
    space: &InputSpace,
    rng: &mut R,
) -> Classifier {
    let cond = IntervalCondition::covering(space, s, hp.r0, rng);
    Classifier::new(cond, action, time, hp.eps_init, hp.fit_init, space, hp.generality)
}

/// Matching classifiers at `s`, covering missing actions until at least
/// `theta_mna` distinct actions are advocated.
pub fn generate_match_set<R: Rng + ?Sized>(
    pop: &mut Population,
    s: State,
    time: u64,
    hp: &Hyperparams,
    space: &InputSpace,
    rng: &mut R,
) -> MatchSet {
    loop {
        let m: MatchSet = pop.matching(space, s).map(|(r, _)| r).collect();
        let mut present = [false; NUM_ACTIONS];
        for r in &m {
            present[pop.get(*r).expect("just matched").action.index()] = true;
        }
        let count = present.iter().filter(|p| **p).count();
        if count >= hp.theta_mna {
            return m;
        }
        let missing: Vec<Action> = Action::ALL
            .into_iter()
            .filter(|a| !present[a.index()])
            .collect();
        let action = *missing.choose(rng).expect("fewer than theta_mna actions present");
        let cl = cover(s, action, time, hp, space, rng);
        pop.insert(cl);
        delete_from_population(pop, hp, rng);
    }
}

pub fn prediction_array(
    pop: &Population,
    m: &[ClassifierRef],
    s: State,
    x0: f64,
) -> PredictionArray {
    let input = input_vector(s, x0);
    let mut num = [0.0; NUM_ACTIONS];
    let mut den = [0.0; NUM_ACTIONS];
    for c in m.iter().filter_map(|r| pop.get(*r)) {
        let a = c.action.index();
        num[a] += c.predict_input(&input) * c.fitness;
        den[a] += c.fitness;
    }
    PredictionArray(std::array::from_fn(|a| (den[a] > 0.0).then(|| num[a] / den[a])))
}

/// ε-greedy choice; greedy ties are broken uniformly at random.
///
/// # Panics
/// If the prediction array is empty.
pub fn select_action<R: Rng + ?Sized>(pa: &PredictionArray, explore_prob: f64, rng: &mut R) -> Action {
    let present: Vec<(Action, f64)> = pa.present().collect();
    assert!(!present.is_empty(), "empty prediction array");
    if rng.gen::<f64>() < explore_prob {
        return present.choose(rng).expect("nonempty").0;
    }
    let best = present.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<Action> = present
        .iter()
        .filter(|(_, v)| *v == best)
        .map(|(a, _)| *a)
        .collect();
    *ties.choose(rng).expect("at least one maximal action")
}

/// `κ` for a given adjusted error.
pub fn accuracy(adjusted_error: f64, hp: &Hyperparams) -> f64 {
    if adjusted_error < hp.eps0 {
        1.0
    } else {
        hp.alpha * (adjusted_error / hp.eps0).powf(-hp.nu)
    }
}

/// Updates every classifier of `aset` toward target `payoff` observed at `s`.
pub fn reinforce(
    pop: &mut Population,
    aset: &ActionSet,
    s: State,
    payoff: f64,
    hp: &Hyperparams,
    space: &InputSpace,
) {
    let members: Vec<ClassifierRef> = aset
        .members
        .iter()
        .copied()
        .filter(|r| pop.get(*r).is_some())
        .collect();
    if members.is_empty() {
        return;
    }
    let input = input_vector(s, hp.x0);
    let norm_sq: f64 = input.iter().map(|x| x * x).sum();
    let set_size: f64 = members
        .iter()
        .map(|r| pop.get(*r).expect("live").numerosity as f64)
        .sum();

    for r in &members {
        let c = pop.get_mut(*r).expect("live");
        c.experience += 1;
        let exp = c.experience as f64;
        let prediction = c.predict_input(&input);
        let err = payoff - prediction;
        let step = hp.eta / norm_sq * err;
        for (w, x) in c.weights.iter_mut().zip(&input) {
            *w += step * x;
        }
        if exp < 1.0 / hp.beta {
            c.epsilon += (err.abs() - c.epsilon) / exp;
        } else {
            c.epsilon += hp.beta * (err.abs() - c.epsilon);
        }
    }

    let eps_min = members
        .iter()
        .map(|r| pop.get(*r).expect("live").epsilon)
        .fold(f64::INFINITY, f64::min);

    for r in &members {
        let c = pop.get_mut(*r).expect("live");
        let exp = c.experience as f64;
        if exp < 1.0 / hp.beta_eps {
            c.mu += (eps_min - c.mu) / exp;
        } else {
            c.mu += hp.beta_eps * (eps_min - c.mu);
        }
        if exp < 1.0 / hp.beta {
            c.as_est += (set_size - c.as_est) / exp;
        } else {
            c.as_est += hp.beta * (set_size - c.as_est);
        }
    }

    update_fitness(pop, &members, hp);

    if hp.do_action_set_subsumption {
        action_set_subsumption(pop, &members, hp, space);
    }
}

fn update_fitness(pop: &mut Population, members: &[ClassifierRef], hp: &Hyperparams) {
    let kappas: Vec<f64> = members
        .iter()
        .map(|r| {
            let c = pop.get(*r).expect("live");
            accuracy(c.adjusted_error(hp.use_mu), hp) * c.numerosity as f64
        })
        .collect();
    let total: f64 = kappas.iter().sum();
    for (r, k) in members.iter().zip(kappas) {
        let c = pop.get_mut(*r).expect("live");
        c.fitness += hp.beta * (k / total - c.fitness);
    }
}

pub fn could_subsume(c: &Classifier, hp: &Hyperparams) -> bool {
    c.experience > hp.theta_sub && c.adjusted_error(hp.use_mu) < hp.eps0
}

/// `general` can absorb `specific`: same action, accurate and experienced,
/// and its condition covers every input `specific` matches.
pub fn does_subsume(general: &Classifier, specific: &Classifier, hp: &Hyperparams, space: &InputSpace) -> bool {
    general.action == specific.action
        && could_subsume(general, hp)
        && general.condition.covers(&specific.condition, space)
}

fn action_set_subsumption(pop: &mut Population, members: &[ClassifierRef], hp: &Hyperparams, space: &InputSpace) {
    let mut best: Option<ClassifierRef> = None;
    for r in members {
        let c = pop.get(*r).expect("live");
        if !could_subsume(c, hp) {
            continue;
        }
        let better = match best.and_then(|b| pop.get(b)) {
            None => true,
            Some(b) => {
                let (cc, bc) = (c.condition.cell_count(space), b.condition.cell_count(space));
                cc > bc || (cc == bc && c.id < b.id)
            }
        };
        if better {
            best = Some(*r);
        }
    }
    let Some(best) = best else { return };
    for r in members {
        if *r == best {
            continue;
        }
        let (absorb, n) = {
            let (Some(g), Some(c)) = (pop.get(best), pop.get(*r)) else { continue };
            (
                g.condition.covers(&c.condition, space) && g.condition != c.condition,
                c.numerosity,
            )
        };
        if absorb {
            pop.remove(*r);
            pop.add_numerosity(best, n);
        }
    }
}

/// True when the numerosity-weighted mean GA timestamp of `aset` lags `time` by more than `theta_ga`.
pub fn ga_due(pop: &Population, aset: &ActionSet, time: u64, hp: &Hyperparams) -> bool {
    let (mut num, mut weighted) = (0.0, 0.0);
    for c in aset.members.iter().filter_map(|r| pop.get(*r)) {
        num += c.numerosity as f64;
        weighted += c.ts as f64 * c.numerosity as f64;
    }
    num > 0.0 && time as f64 - weighted / num > hp.theta_ga
}

/// Tournament over microclassifiers: each copy enters with probability `tau`;
/// the entrant with the highest fitness per microclassifier wins.
fn tournament<R: Rng + ?Sized>(pop: &Population, members: &[ClassifierRef], hp: &Hyperparams, rng: &mut R) -> ClassifierRef {
    loop {
        let mut winner: Option<(ClassifierRef, f64)> = None;
        for r in members {
            let c = pop.get(*r).expect("live");
            let entered = (0..c.numerosity).any(|_| rng.gen::<f64>() < hp.tau);
            if entered {
                let micro_fit = c.fitness / c.numerosity as f64;
                if winner.is_none_or(|(_, f)| micro_fit > f) {
                    winner = Some((*r, micro_fit));
                }
            }
        }
        if let Some((r, _)) = winner {
            return r;
        }
    }
}

fn uniform_crossover<R: Rng + ?Sized>(a: &mut IntervalCondition, b: &mut IntervalCondition, upsilon: f64, rng: &mut R) {
    let mut x = a.alleles();
    let mut y = b.alleles();
    for i in 0..NUM_ALLELES {
        if rng.gen::<f64>() < upsilon {
            std::mem::swap(&mut x[i], &mut y[i]);
        }
    }
    *a = IntervalCondition::from_alleles(x);
    *b = IntervalCondition::from_alleles(y);
}

/// Integer perturbation in `[-m0, m0] \ {0}`.
pub fn mutation_step<R: Rng + ?Sized>(m0: i32, rng: &mut R) -> i32 {
    let k = rng.gen_range(1..=m0);
    if rng.gen::<bool>() {
        k
    } else {
        -k
    }
}

fn mutate<R: Rng + ?Sized>(c: &mut Classifier, hp: &Hyperparams, space: &InputSpace, rng: &mut R) {
    let mut alleles = c.condition.alleles();
    for allele in alleles.iter_mut() {
        if rng.gen::<f64>() < hp.mut_rate {
            *allele += mutation_step(hp.m0, rng);
        }
    }
    c.condition = IntervalCondition::from_alleles(alleles).truncated(space);
    if rng.gen::<f64>() < hp.mut_rate {
        let others: Vec<Action> = Action::ALL.into_iter().filter(|a| *a != c.action).collect();
        c.action = *others.choose(rng).expect("three other actions");
    }
}

/// One GA invocation on `aset`: selection, crossover, mutation, subsumption,
/// insertion and deletion. Resets the timestamps of the set to `time`.
pub fn run_ga<R: Rng + ?Sized>(
    pop: &mut Population,
    aset: &ActionSet,
    time: u64,
    hp: &Hyperparams,
    space: &InputSpace,
    rng: &mut R,
) {
    let members: Vec<ClassifierRef> = aset
        .members
        .iter()
        .copied()
        .filter(|r| pop.get(*r).is_some())
        .collect();
    if members.is_empty() {
        return;
    }
    for r in &members {
        pop.get_mut(*r).expect("live").ts = time;
    }

    let p1 = tournament(pop, &members, hp, rng);
    let p2 = tournament(pop, &members, hp, rng);
    let parent1 = pop.get(p1).expect("live").clone();
    let parent2 = pop.get(p2).expect("live").clone();

    let mut child1 = offspring_of(&parent1, time);
    let mut child2 = offspring_of(&parent2, time);

    if rng.gen::<f64>() < hp.chi {
        uniform_crossover(&mut child1.condition, &mut child2.condition, hp.upsilon, rng);
        let epsilon = (parent1.epsilon + parent2.epsilon) / 2.0;
        let mu = (parent1.mu + parent2.mu) / 2.0;
        let fitness = (parent1.fitness + parent2.fitness) / 2.0;
        let weights: [f64; 3] = std::array::from_fn(|i| (parent1.weights[i] + parent2.weights[i]) / 2.0);
        for child in [&mut child1, &mut child2] {
            child.epsilon = epsilon;
            child.mu = mu;
            child.fitness = fitness;
            child.weights = weights;
        }
    }

    for child in [&mut child1, &mut child2] {
        child.fitness *= 0.1;
        mutate(child, hp, space, rng);
        child.condition.truncate(space);
        child.refresh_generality(space, hp.generality);
    }

    for child in [child1, child2] {
        if hp.do_ga_subsumption {
            if does_subsume(&parent1, &child, hp, space) {
                pop.add_numerosity(p1, 1);
                continue;
            }
            if does_subsume(&parent2, &child, hp, space) {
                pop.add_numerosity(p2, 1);
                continue;
            }
        }
        pop.insert(child);
    }
    delete_from_population(pop, hp, rng);
}

fn offspring_of(parent: &Classifier, time: u64) -> Classifier {
    Classifier {
        numerosity: 1,
        experience: 0,
        ts: time,
        ..parent.clone()
    }
}

/// Deletion vote of one macroclassifier.
pub fn deletion_vote(c: &Classifier, mean_fitness: f64, hp: &Hyperparams) -> f64 {
    let base = c.as_est * c.numerosity as f64;
    let micro_fit = c.fitness / c.numerosity as f64;
    if c.experience > hp.theta_del && micro_fit < hp.delta * mean_fitness {
        base * mean_fitness / micro_fit
    } else {
        base
    }
}

/// Roulette-wheel deletion of microclassifiers until the population fits `pop_size`.
pub fn delete_from_population<R: Rng + ?Sized>(pop: &mut Population, hp: &Hyperparams, rng: &mut R) {
    while pop.micro_count() > hp.pop_size as u64 {
        let total_fit: f64 = pop.classifiers().map(|c| c.fitness).sum();
        let mean_fitness = total_fit / pop.micro_count() as f64;
        let votes: Vec<(ClassifierRef, f64)> = pop
            .iter()
            .map(|(r, c)| (r, deletion_vote(c, mean_fitness, hp)))
            .collect();
        let total: f64 = votes.iter().map(|(_, v)| v).sum();
        let point = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = votes[votes.len() - 1].0;
        for (r, v) in &votes {
            acc += v;
            if acc > point {
                chosen = *r;
                break;
            }
        }
        pop.remove_one(chosen);
    }
}
