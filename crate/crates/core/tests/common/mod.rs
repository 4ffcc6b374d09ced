#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use xcsf_gnmc::env::{Action, GridWorld, State};
use xcsf_gnmc::xcsf::{Classifier, GeneralityMode, InputSpace, Interval, IntervalCondition, Population};

/// Containment test written against the raw interval fields, independent of
/// `IntervalCondition::matches`.
pub fn covers(c: &Classifier, s: State) -> bool {
    let v = [s.x as i32, s.y as i32];
    c.condition
        .intervals
        .iter()
        .zip(v)
        .all(|(iv, v)| iv.min <= v && v <= (iv.min + iv.span).min(7))
}

fn random_classifier(rng: &mut ChaCha8Rng, space: &InputSpace, action: Action) -> Classifier {
    let intervals = std::array::from_fn(|_| {
        let min = rng.gen_range(0..=7);
        Interval::new(min, rng.gen_range(0..=7 - min))
    });
    let mut c = Classifier::new(
        IntervalCondition::new(intervals),
        action,
        0,
        1e-3,
        1e-3,
        space,
        GeneralityMode::Product,
    );
    randomise_stats(rng, &mut c);
    c
}

fn randomise_stats(rng: &mut ChaCha8Rng, c: &mut Classifier) {
    // coarse fitness values make mass ties common
    c.fitness = if rng.gen_bool(0.3) {
        [0.25, 0.5, 1.0][rng.gen_range(0..3)]
    } else {
        rng.gen_range(0.001..1.0)
    };
    c.numerosity = rng.gen_range(1..=20);
    c.experience = rng.gen_range(0..2000);
    c.epsilon = rng.gen_range(0.0..0.05);
    c.weights = std::array::from_fn(|_| rng.gen_range(-0.1..0.1));
}

/// A random gap-free population: random rectangles, patched so every
/// non-terminal `(s, a)` niche is non-empty, plus a few classifiers that only
/// match terminal cells.
pub fn synthetic_population(world: &GridWorld, seed: u64) -> Population {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = InputSpace::of_world(world);
    let mut out: Vec<Classifier> = Vec::new();
    let mut rules = HashSet::new();
    let mut push = |c: Classifier, out: &mut Vec<Classifier>| {
        if rules.insert((c.condition, c.action)) {
            out.push(c);
        }
    };
    let n = rng.gen_range(20..300);
    for _ in 0..n {
        let a = Action::ALL[rng.gen_range(0..4)];
        let c = random_classifier(&mut rng, &space, a);
        push(c, &mut out);
    }
    for &s in world.nonterminal_states() {
        for a in Action::ALL {
            if !out.iter().any(|c| c.action == a && covers(c, s)) {
                let intervals = [s.x as i32, s.y as i32].map(|v| {
                    let lo = v - rng.gen_range(0..=1).min(v);
                    let hi = (v + rng.gen_range(0..=1)).min(7);
                    Interval::new(lo, hi - lo)
                });
                let mut c = Classifier::new(
                    IntervalCondition::new(intervals),
                    a,
                    0,
                    1e-3,
                    1e-3,
                    &space,
                    GeneralityMode::Product,
                );
                randomise_stats(&mut rng, &mut c);
                push(c, &mut out);
            }
        }
    }
    for &t in world.terminal_states() {
        if rng.gen_bool(0.5) {
            let mut c = Classifier::new(
                IntervalCondition::new([Interval::new(t.x as i32, 0), Interval::new(t.y as i32, 0)]),
                Action::ALL[rng.gen_range(0..4)],
                0,
                1e-3,
                1e-3,
                &space,
                GeneralityMode::Product,
            );
            randomise_stats(&mut rng, &mut c);
            c.experience = 0;
            push(c, &mut out);
        }
    }
    // shuffle creation order so ids are unrelated to construction
    for i in (1..out.len()).rev() {
        out.swap(i, rng.gen_range(0..=i));
    }
    for (i, c) in out.iter_mut().enumerate() {
        c.id = i as u64;
    }
    Population::from_classifiers(out)
}

/// Breadth-first distance (in moves) to the goal over non-hole cells of the
/// deterministic lake; `None` for holes and unreachable cells.
pub fn bfs_goal_distance(world: &GridWorld) -> Vec<Vec<Option<u32>>> {
    let (w, h) = (world.width(), world.height());
    let mut dist = vec![vec![None; w]; h];
    let goal = world.terminal_states().iter().copied().find(|&s| world.is_goal(s)).expect("goal");
    dist[goal.y][goal.x] = Some(0);
    let mut queue = VecDeque::from([goal]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u.y][u.x].unwrap();
        for (dx, dy) in [(-1i32, 0i32), (1, 0), (0, -1), (0, 1)] {
            let (nx, ny) = (u.x as i32 + dx, u.y as i32 + dy);
            if nx < 0 || ny < 0 || nx >= w as i32 || ny >= h as i32 {
                continue;
            }
            let v = State::new(nx as usize, ny as usize);
            if world.is_terminal(v) || dist[v.y][v.x].is_some() {
                continue;
            }
            dist[v.y][v.x] = Some(d + 1);
            queue.push_back(v);
        }
    }
    dist
}
