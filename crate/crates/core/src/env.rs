//! FrozenLake-style gridworlds with exact transition semantics.
//!
//! Coordinates are `(x, y)` with `(0, 0)` in the top-left corner, `x` growing
//! rightward and `y` growing downward. Actions are always ordered
//! `[Left, Down, Right, Up]`; advocacy vectors and serialized populations rely
//! on that ordering.

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_ACTIONS: usize = 4;

/// The canonical FrozenLake8x8 map.
pub const FROZEN_LAKE_8X8: [&str; 8] = [
    "SFFFFFFF", "FFFFFFFF", "FFFHFFFF", "FFFFFHFF", "FFFHFFFF", "FHHFFFHF", "FHFFHFHF", "FFFHFFFG",
];

/// Discount used for both FrozenLake variants.
pub const DEFAULT_GAMMA: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct State {
    pub x: usize,
    pub y: usize,
}

impl State {
    pub const fn new(x: usize, y: usize) -> Self {
        State { x, y }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Left,
    Down,
    Right,
    Up,
}

impl Action {
    pub const ALL: [Action; NUM_ACTIONS] = [Action::Left, Action::Down, Action::Right, Action::Up];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }

    /// Unit displacement `(dx, dy)`.
    pub fn delta(self) -> (isize, isize) {
        match self {
            Action::Left => (-1, 0),
            Action::Down => (0, 1),
            Action::Right => (1, 0),
            Action::Up => (0, -1),
        }
    }

    /// The two directions perpendicular to `self`, counter-clockwise neighbour first.
    pub fn perpendicular(self) -> [Action; 2] {
        let i = self.index();
        [
            Action::ALL[(i + NUM_ACTIONS - 1) % NUM_ACTIONS],
            Action::ALL[(i + 1) % NUM_ACTIONS],
        ]
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Action::Left => "L",
            Action::Down => "D",
            Action::Right => "R",
            Action::Up => "U",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tile {
    Frozen,
    Hole,
    Goal,
}

impl Tile {
    pub fn is_terminal(self) -> bool {
        !matches!(self, Tile::Frozen)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub next_state: State,
    pub reward: f64,
    pub terminal: bool,
}

/// Immutable tabular MDP over a rectangular grid.
#[derive(Debug, Clone)]
pub struct GridWorld {
    width: usize,
    height: usize,
    tiles: Vec<Tile>,
    p_slip: f64,
    gamma: f64,
    nonterminal: Vec<State>,
    terminal: Vec<State>,
}

impl GridWorld {
    /// FrozenLake8x8 with the given slip probability and γ = 0.95.
    pub fn frozen_lake_8x8(p_slip: f64) -> Result<Self> {
        Self::from_rows(&FROZEN_LAKE_8X8, p_slip, DEFAULT_GAMMA)
    }

    /// Deterministic FrozenLake8x8.
    pub fn deterministic() -> Self {
        Self::frozen_lake_8x8(0.0).expect("embedded map is valid")
    }

    /// FrozenLake8x8 with `p_slip = 0.1`.
    pub fn slippery() -> Self {
        Self::frozen_lake_8x8(0.1).expect("embedded map is valid")
    }

    /// Parses a map from text: one line per row, characters from `{F, H, G, S}`.
    /// Blank lines and surrounding whitespace are ignored.
    pub fn parse_map(text: &str, p_slip: f64, gamma: f64) -> Result<Self> {
        let rows: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        Self::from_rows(&rows, p_slip, gamma)
    }

    pub fn load_map(path: &Path, p_slip: f64, gamma: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_map(&text, p_slip, gamma)
    }

    pub fn from_rows<S: AsRef<str>>(rows: &[S], p_slip: f64, gamma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p_slip) {
            return Err(Error::InvalidMap(format!("p_slip {p_slip} outside [0, 1)")));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidMap(format!("gamma {gamma} outside [0, 1]")));
        }
        let height = rows.len();
        if height == 0 {
            return Err(Error::InvalidMap("map has no rows".into()));
        }
        let width = rows[0].as_ref().chars().count();
        let mut tiles = Vec::with_capacity(width * height);
        for (y, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.chars().count() != width {
                return Err(Error::InvalidMap(format!(
                    "row {y} has {} cells, expected {width}",
                    row.chars().count()
                )));
            }
            for ch in row.chars() {
                tiles.push(match ch {
                    'F' | 'S' => Tile::Frozen,
                    'H' => Tile::Hole,
                    'G' => Tile::Goal,
                    other => {
                        return Err(Error::InvalidMap(format!(
                            "unexpected character {other:?} in row {y}"
                        )))
                    }
                });
            }
        }
        let goals = tiles.iter().filter(|t| **t == Tile::Goal).count();
        if goals != 1 {
            return Err(Error::InvalidMap(format!("expected exactly one goal, found {goals}")));
        }
        let mut nonterminal = Vec::new();
        let mut terminal = Vec::new();
        for y in 0..height {
            for x in 0..width {
                let s = State::new(x, y);
                if tiles[y * width + x].is_terminal() {
                    terminal.push(s);
                } else {
                    nonterminal.push(s);
                }
            }
        }
        Ok(GridWorld {
            width,
            height,
            tiles,
            p_slip,
            gamma,
            nonterminal,
            terminal,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn p_slip(&self) -> f64 {
        self.p_slip
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn num_cells(&self) -> usize {
        self.width * self.height
    }

    /// Row-major cell index of `s`.
    pub fn cell_index(&self, s: State) -> usize {
        s.y * self.width + s.x
    }

    pub fn tile(&self, s: State) -> Tile {
        self.tiles[self.cell_index(s)]
    }

    pub fn contains(&self, s: State) -> bool {
        s.x < self.width && s.y < self.height
    }

    pub fn is_terminal(&self, s: State) -> bool {
        self.tile(s).is_terminal()
    }

    pub fn is_goal(&self, s: State) -> bool {
        self.tile(s) == Tile::Goal
    }

    /// Non-terminal (frozen) states in row-major order.
    pub fn nonterminal_states(&self) -> &[State] {
        &self.nonterminal
    }

    pub fn terminal_states(&self) -> &[State] {
        &self.terminal
    }

    /// Deterministic move; moves off the grid leave the agent in place.
    pub fn move_from(&self, s: State, a: Action) -> State {
        let (dx, dy) = a.delta();
        let nx = s.x as isize + dx;
        let ny = s.y as isize + dy;
        if nx < 0 || ny < 0 || nx >= self.width as isize || ny >= self.height as isize {
            s
        } else {
            State::new(nx as usize, ny as usize)
        }
    }

    /// Distribution over next states for taking `a` in non-terminal `s`.
    ///
    /// The intended direction carries `1 - p_slip`, each perpendicular direction
    /// `p_slip / 2`. Entries landing on the same cell are merged, keeping the
    /// order of first appearance (intended, then the two slips).
    pub fn successor_distribution(&self, s: State, a: Action) -> Result<Vec<(State, f64)>> {
        self.check_nonterminal(s)?;
        let mut out: Vec<(State, f64)> = Vec::with_capacity(3);
        let mut push = |next: State, p: f64| {
            if p <= 0.0 {
                return;
            }
            match out.iter_mut().find(|(t, _)| *t == next) {
                Some(entry) => entry.1 += p,
                None => out.push((next, p)),
            }
        };
        push(self.move_from(s, a), 1.0 - self.p_slip);
        let [left, right] = a.perpendicular();
        push(self.move_from(s, left), self.p_slip / 2.0);
        push(self.move_from(s, right), self.p_slip / 2.0);
        Ok(out)
    }

    /// Samples one environment transition.
    ///
    /// Always draws exactly one uniform variate from `rng`, so the random stream
    /// advances identically regardless of `p_slip`.
    pub fn step<R: Rng + ?Sized>(&self, s: State, a: Action, rng: &mut R) -> Result<Transition> {
        let dist = self.successor_distribution(s, a)?;
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut next = dist[dist.len() - 1].0;
        for &(t, p) in &dist {
            acc += p;
            if u < acc {
                next = t;
                break;
            }
        }
        Ok(self.transition_to(next))
    }

    pub fn transition_to(&self, next: State) -> Transition {
        Transition {
            next_state: next,
            reward: if self.is_goal(next) { 1.0 } else { 0.0 },
            terminal: self.is_terminal(next),
        }
    }

    fn check_nonterminal(&self, s: State) -> Result<()> {
        if !self.contains(s) {
            return Err(Error::Precondition(format!("state {s} lies outside the grid")));
        }
        if self.is_terminal(s) {
            return Err(Error::Precondition(format!("state {s} is terminal")));
        }
        Ok(())
    }

    /// Renders the layout back to its text form (start marker omitted).
    pub fn to_map_string(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(match self.tile(State::new(x, y)) {
                    Tile::Frozen => 'F',
                    Tile::Hole => 'H',
                    Tile::Goal => 'G',
                });
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn approx_dist(got: &[(State, f64)], want: &[(State, f64)]) {
        assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
        for ((gs, gp), (ws, wp)) in got.iter().zip(want) {
            assert_eq!(gs, ws);
            assert!((gp - wp).abs() < 1e-12, "{gp} vs {wp}");
        }
    }

    #[test]
    fn layout_matches_frozen_lake() {
        let w = GridWorld::deterministic();
        assert_eq!(w.nonterminal_states().len(), 53);
        assert_eq!(w.terminal_states().len(), 11);
        assert!(w.is_goal(State::new(7, 7)));
        assert!(!w.is_terminal(State::new(0, 0)));
        let holes: Vec<State> = w
            .terminal_states()
            .iter()
            .copied()
            .filter(|s| !w.is_goal(*s))
            .collect();
        let expected = [
            (3, 2),
            (5, 3),
            (3, 4),
            (1, 5),
            (2, 5),
            (6, 5),
            (1, 6),
            (4, 6),
            (6, 6),
            (3, 7),
        ];
        assert_eq!(
            holes,
            expected.iter().map(|&(x, y)| State::new(x, y)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn deterministic_move_into_goal() {
        let w = GridWorld::deterministic();
        let d = w.successor_distribution(State::new(6, 7), Action::Right).unwrap();
        approx_dist(&d, &[(State::new(7, 7), 1.0)]);
    }

    #[test]
    fn slip_at_corner_collapses_blocked_moves() {
        let w = GridWorld::slippery();
        let d = w.successor_distribution(State::new(0, 0), Action::Left).unwrap();
        approx_dist(&d, &[(State::new(0, 0), 0.95), (State::new(0, 1), 0.05)]);
    }

    #[test]
    fn slip_in_open_cell() {
        let w = GridWorld::slippery();
        let d = w.successor_distribution(State::new(3, 3), Action::Down).unwrap();
        approx_dist(
            &d,
            &[
                (State::new(3, 4), 0.9),
                (State::new(2, 3), 0.05),
                (State::new(4, 3), 0.05),
            ],
        );
    }

    #[test]
    fn terminal_query_is_rejected() {
        let w = GridWorld::slippery();
        assert!(matches!(
            w.successor_distribution(State::new(7, 7), Action::Up),
            Err(Error::Precondition(_))
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(w.step(State::new(3, 2), Action::Up, &mut rng).is_err());
    }

    #[test]
    fn step_examples() {
        let w = GridWorld::deterministic();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = w.step(State::new(6, 7), Action::Right, &mut rng).unwrap();
        assert_eq!(t.next_state, State::new(7, 7));
        assert_eq!(t.reward, 1.0);
        assert!(t.terminal);
        let t = w.step(State::new(0, 0), Action::Up, &mut rng).unwrap();
        assert_eq!(t.next_state, State::new(0, 0));
        assert_eq!(t.reward, 0.0);
        assert!(!t.terminal);
    }

    #[test]
    fn hole_gives_zero_reward_and_terminates() {
        let w = GridWorld::deterministic();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = w.step(State::new(3, 1), Action::Down, &mut rng).unwrap();
        assert_eq!(t.next_state, State::new(3, 2));
        assert_eq!(t.reward, 0.0);
        assert!(t.terminal);
    }

    #[test]
    fn distributions_are_normalised() {
        for w in [GridWorld::deterministic(), GridWorld::slippery()] {
            for &s in w.nonterminal_states() {
                for a in Action::ALL {
                    let d = w.successor_distribution(s, a).unwrap();
                    let total: f64 = d.iter().map(|(_, p)| p).sum();
                    assert!((total - 1.0).abs() < 1e-12);
                    if w.p_slip() == 0.0 {
                        assert_eq!(d.len(), 1);
                    }
                }
            }
        }
    }

    #[test]
    fn map_parsing_round_trips() {
        let w = GridWorld::deterministic();
        let text = w.to_map_string();
        let back = GridWorld::parse_map(&text, 0.0, 0.95).unwrap();
        assert_eq!(back.to_map_string(), text);
        assert_eq!(back.nonterminal_states(), w.nonterminal_states());
    }

    #[test]
    fn map_validation() {
        assert!(GridWorld::parse_map("FF\nFF\n", 0.0, 0.9).is_err());
        assert!(GridWorld::parse_map("FG\nGF\n", 0.0, 0.9).is_err());
        assert!(GridWorld::parse_map("FG\nF\n", 0.0, 0.9).is_err());
        assert!(GridWorld::parse_map("FX\nFG\n", 0.0, 0.9).is_err());
        assert!(GridWorld::parse_map("SG\n", 1.0, 0.9).is_err());
        assert!(GridWorld::parse_map("SG\n", 0.5, 0.9).is_ok());
    }
}
