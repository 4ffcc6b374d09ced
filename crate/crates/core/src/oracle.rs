//! Exact solution of a [`GridWorld`] by value iteration.

use std::fmt;
use std::io::Write;

use crate::env::{Action, GridWorld, State, NUM_ACTIONS};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_SWEEPS: usize = 1_000_000;
/// Tie tolerance used when deriving the optimal policy from `Q*`.
pub const ORACLE_TIE_TOL: f64 = 1e-9;

/// Anything that can be queried for `Q(s, a)`.
///
/// `None` means the source has no opinion on the pair (a coverage gap).
pub trait QFunction {
    fn q_value(&self, s: State, a: Action) -> Option<f64>;

    fn q_values(&self, s: State) -> [Option<f64>; NUM_ACTIONS] {
        Action::ALL.map(|a| self.q_value(s, a))
    }
}

/// Tabular Q-function over the non-terminal states of a world.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    width: usize,
    height: usize,
    gamma: f64,
    values: Vec<Option<[f64; NUM_ACTIONS]>>,
    domain: Vec<State>,
}

impl QTable {
    /// Zero-initialised table over `world`'s non-terminal states.
    pub fn zeros(world: &GridWorld) -> Self {
        let mut values = vec![None; world.num_cells()];
        for &s in world.nonterminal_states() {
            values[world.cell_index(s)] = Some([0.0; NUM_ACTIONS]);
        }
        QTable {
            width: world.width(),
            height: world.height(),
            gamma: world.gamma(),
            values,
            domain: world.nonterminal_states().to_vec(),
        }
    }

    /// Builds a table by evaluating `f` on every non-terminal `(s, a)`.
    pub fn from_fn(world: &GridWorld, mut f: impl FnMut(State, Action) -> f64) -> Self {
        let mut q = QTable::zeros(world);
        for &s in world.nonterminal_states() {
            for a in Action::ALL {
                q.set(s, a, f(s, a));
            }
        }
        q
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn domain(&self) -> &[State] {
        &self.domain
    }

    fn idx(&self, s: State) -> Option<usize> {
        (s.x < self.width && s.y < self.height).then(|| s.y * self.width + s.x)
    }

    pub fn get(&self, s: State, a: Action) -> Option<f64> {
        self.row(s).map(|r| r[a.index()])
    }

    pub fn row(&self, s: State) -> Option<&[f64; NUM_ACTIONS]> {
        self.idx(s).and_then(|i| self.values[i].as_ref())
    }

    /// # Panics
    /// If `s` is outside the table's domain.
    pub fn set(&mut self, s: State, a: Action, v: f64) {
        let i = self.idx(s).expect("state outside grid");
        self.values[i].as_mut().expect("state outside table domain")[a.index()] = v;
    }

    pub fn max_value(&self, s: State) -> Option<f64> {
        self.row(s)
            .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    /// Writes a `#schema=q_table.v1` line, then `x,y,action,value` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "#schema=q_table.v1").map_err(|e| Error::io("<qtable csv>", e))?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "action", "value"])?;
        for &s in &self.domain {
            let row = self.row(s).expect("domain state has a row");
            for a in Action::ALL {
                w.write_record([
                    s.x.to_string(),
                    s.y.to_string(),
                    a.to_string(),
                    format!("{}", row[a.index()]),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("<qtable csv>", e))?;
        Ok(())
    }
}

impl QFunction for QTable {
    fn q_value(&self, s: State, a: Action) -> Option<f64> {
        self.get(s, a)
    }
}

/// Set of actions advocated in one state, one bit per action in `[L, D, R, U]` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Advocacy(u8);

impl Advocacy {
    pub const NONE: Advocacy = Advocacy(0);
    pub const ALL: Advocacy = Advocacy((1 << NUM_ACTIONS) - 1);

    pub fn from_bits(bits: [bool; NUM_ACTIONS]) -> Self {
        let mut v = 0u8;
        for (i, b) in bits.iter().enumerate() {
            if *b {
                v |= 1 << i;
            }
        }
        Advocacy(v)
    }

    pub fn single(a: Action) -> Self {
        Advocacy(1 << a.index())
    }

    pub fn bits(self) -> [bool; NUM_ACTIONS] {
        std::array::from_fn(|i| self.0 & (1 << i) != 0)
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn contains(self, a: Action) -> bool {
        self.0 & (1 << a.index()) != 0
    }

    pub fn insert(&mut self, a: Action) {
        self.0 |= 1 << a.index();
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersect(self, other: Advocacy) -> Advocacy {
        Advocacy(self.0 & other.0)
    }

    pub fn complement(self) -> Advocacy {
        Advocacy(!self.0 & Self::ALL.0)
    }

    pub fn actions(self) -> impl Iterator<Item = Action> {
        Action::ALL.into_iter().filter(move |a| self.contains(*a))
    }
}

impl fmt::Display for Advocacy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.bits();
        write!(f, "[{},{},{},{}]", b[0] as u8, b[1] as u8, b[2] as u8, b[3] as u8)
    }
}

/// Per-state advocacy vectors over the non-terminal states of a world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdvocacyPolicy {
    width: usize,
    vectors: Vec<Option<Advocacy>>,
    domain: Vec<State>,
}

impl AdvocacyPolicy {
    pub fn from_fn(world: &GridWorld, mut f: impl FnMut(State) -> Advocacy) -> Self {
        let mut vectors = vec![None; world.num_cells()];
        for &s in world.nonterminal_states() {
            vectors[world.cell_index(s)] = Some(f(s));
        }
        AdvocacyPolicy {
            width: world.width(),
            vectors,
            domain: world.nonterminal_states().to_vec(),
        }
    }

    pub fn get(&self, s: State) -> Option<Advocacy> {
        if s.x >= self.width {
            return None;
        }
        self.vectors.get(s.y * self.width + s.x).copied().flatten()
    }

    pub fn domain(&self) -> &[State] {
        &self.domain
    }

    pub fn iter(&self) -> impl Iterator<Item = (State, Advocacy)> + '_ {
        self.domain
            .iter()
            .map(move |&s| (s, self.get(s).expect("domain state has a vector")))
    }
}

/// Advocacy derived from a Q-function: bit `i` set iff `Q(s, a_i) >= max - tie_tol`.
///
/// Actions with no prediction are never advocated; a state with no predictions
/// at all gets an empty vector.
pub fn greedy_advocacy<Q: QFunction + ?Sized>(
    world: &GridWorld,
    q: &Q,
    tie_tol: f64,
) -> AdvocacyPolicy {
    AdvocacyPolicy::from_fn(world, |s| advocacy_of(&q.q_values(s), tie_tol))
}

pub(crate) fn advocacy_of(row: &[Option<f64>; NUM_ACTIONS], tie_tol: f64) -> Advocacy {
    let best = row
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut adv = Advocacy::NONE;
    if best == f64::NEG_INFINITY {
        return adv;
    }
    for a in Action::ALL {
        if let Some(v) = row[a.index()] {
            if v >= best - tie_tol {
                adv.insert(a);
            }
        }
    }
    adv
}

/// Outcome of a value-iteration run.
#[derive(Debug, Clone)]
pub struct Solution {
    pub q: QTable,
    pub sweeps: usize,
    pub final_delta: f64,
}

/// Synchronous value iteration on Q starting from the zero table.
///
/// Terminal states contribute value 0. Stops once the sup-norm change of a
/// sweep drops below `tol`.
pub fn value_iteration(world: &GridWorld, tol: f64) -> Result<QTable> {
    value_iteration_capped(world, tol, DEFAULT_MAX_SWEEPS).map(|s| s.q)
}

pub fn value_iteration_capped(world: &GridWorld, tol: f64, max_sweeps: usize) -> Result<Solution> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    let model = TabularModel::new(world)?;
    let mut q = QTable::zeros(world);
    let mut delta = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        let next = model.backup(&q);
        delta = sup_diff(&q, &next);
        q = next;
        if delta < tol {
            return Ok(Solution {
                q,
                sweeps: sweep,
                final_delta: delta,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_sweeps,
        delta,
    })
}

/// Largest `|Q(s,a) - (T Q)(s,a)|` over the table's domain.
pub fn bellman_residual(world: &GridWorld, q: &QTable) -> Result<f64> {
    let model = TabularModel::new(world)?;
    Ok(sup_diff(q, &model.backup(q)))
}

/// `Q*` together with the optimal advocacy policy.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub q_star: QTable,
    pub pi_star: AdvocacyPolicy,
}

impl GroundTruth {
    pub fn solve(world: &GridWorld) -> Result<Self> {
        let q_star = value_iteration(world, 1e-12)?;
        let pi_star = greedy_advocacy(world, &q_star, ORACLE_TIE_TOL);
        Ok(GroundTruth { q_star, pi_star })
    }
}

fn sup_diff(a: &QTable, b: &QTable) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .filter_map(|(x, y)| Some((x.as_ref()?, y.as_ref()?)))
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}

/// Precomputed transition model: for each `(s, a)`, `(next cell, prob, reward, terminal)`.
struct TabularModel<'w> {
    world: &'w GridWorld,
    outcomes: Vec<Vec<(State, f64, f64, bool)>>,
}

impl<'w> TabularModel<'w> {
    fn new(world: &'w GridWorld) -> Result<Self> {
        let mut outcomes = Vec::with_capacity(world.nonterminal_states().len() * NUM_ACTIONS);
        for &s in world.nonterminal_states() {
            for a in Action::ALL {
                let dist = world.successor_distribution(s, a)?;
                outcomes.push(
                    dist.into_iter()
                        .map(|(t, p)| {
                            let tr = world.transition_to(t);
                            (t, p, tr.reward, tr.terminal)
                        })
                        .collect(),
                );
            }
        }
        Ok(TabularModel { world, outcomes })
    }

    fn backup(&self, q: &QTable) -> QTable {
        let gamma = self.world.gamma();
        let mut next = QTable::zeros(self.world);
        let mut k = 0;
        for &s in self.world.nonterminal_states() {
            for a in Action::ALL {
                let v: f64 = self.outcomes[k]
                    .iter()
                    .map(|&(t, p, r, terminal)| {
                        let future = if terminal {
                            0.0
                        } else {
                            q.max_value(t).expect("non-terminal successor")
                        };
                        p * (r + gamma * future)
                    })
                    .sum();
                next.set(s, a, v);
                k += 1;
            }
        }
        next
    }
}
