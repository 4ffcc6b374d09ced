//! Integer min/span interval conditions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{GridWorld, State};

/// Input dimensionality of gridworld states.
pub const DIMS: usize = 2;
/// Number of condition alleles (`min`, `span` per dimension).
pub const NUM_ALLELES: usize = 2 * DIMS;

/// How a condition's generality is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GeneralityMode {
    /// Fraction of the discrete input space covered (product of per-dimension fractions).
    #[default]
    Product,
    /// Mean over dimensions of the covered fraction of that dimension.
    MeanWidth,
}

/// Inclusive integer box `[0, max_i]` per input dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputSpace {
    pub max: [i32; DIMS],
}

impl InputSpace {
    pub fn of_world(world: &GridWorld) -> Self {
        InputSpace {
            max: [world.width() as i32 - 1, world.height() as i32 - 1],
        }
    }

    pub fn extent(&self, dim: usize) -> i32 {
        self.max[dim] + 1
    }
}

pub fn state_coords(s: State) -> [i32; DIMS] {
    [s.x as i32, s.y as i32]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub min: i32,
    pub span: i32,
}

impl Interval {
    pub fn new(min: i32, span: i32) -> Self {
        Interval { min, span }
    }

    /// Upper bound after truncation to `[.., domain_max]`.
    pub fn upper(&self, domain_max: i32) -> i32 {
        (self.min + self.span).min(domain_max)
    }

    pub fn contains(&self, v: i32, domain_max: i32) -> bool {
        self.min <= v && v <= self.upper(domain_max)
    }

    /// Number of integer points covered inside `[0, domain_max]`.
    pub fn width(&self, domain_max: i32) -> i32 {
        (self.upper(domain_max) - self.min.max(0) + 1).max(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntervalCondition {
    pub intervals: [Interval; DIMS],
}

impl IntervalCondition {
    pub fn new(intervals: [Interval; DIMS]) -> Self {
        IntervalCondition { intervals }
    }

    pub fn from_alleles(alleles: [i32; NUM_ALLELES]) -> Self {
        IntervalCondition {
            intervals: std::array::from_fn(|d| Interval::new(alleles[2 * d], alleles[2 * d + 1])),
        }
    }

    pub fn alleles(&self) -> [i32; NUM_ALLELES] {
        std::array::from_fn(|i| {
            let iv = self.intervals[i / 2];
            if i % 2 == 0 {
                iv.min
            } else {
                iv.span
            }
        })
    }

    pub fn matches(&self, space: &InputSpace, s: State) -> bool {
        let c = state_coords(s);
        self.intervals
            .iter()
            .zip(c)
            .zip(space.max)
            .all(|((iv, v), m)| iv.contains(v, m))
    }

    /// Covering interval: `[s_i - lower_i, s_i + upper_i]` clipped to the grid.
    pub fn covering<R: Rng + ?Sized>(space: &InputSpace, s: State, r0: i32, rng: &mut R) -> Self {
        let c = state_coords(s);
        IntervalCondition {
            intervals: std::array::from_fn(|d| {
                let below = rng.gen_range(0..=r0);
                let above = rng.gen_range(0..=r0);
                let lo = (c[d] - below).max(0);
                let hi = (c[d] + above).min(space.max[d]);
                Interval::new(lo, hi - lo)
            }),
        }
    }

    /// Clamps alleles so that `0 <= min <= max_i` and `min + span <= max_i`.
    pub fn truncate(&mut self, space: &InputSpace) {
        for (iv, &m) in self.intervals.iter_mut().zip(&space.max) {
            iv.min = iv.min.clamp(0, m);
            iv.span = iv.span.clamp(0, m - iv.min);
        }
    }

    pub fn truncated(mut self, space: &InputSpace) -> Self {
        self.truncate(space);
        self
    }

    /// Number of grid cells matched.
    pub fn cell_count(&self, space: &InputSpace) -> i64 {
        self.intervals
            .iter()
            .zip(space.max)
            .map(|(iv, m)| iv.width(m) as i64)
            .product()
    }

    pub fn generality(&self, space: &InputSpace, mode: GeneralityMode) -> f64 {
        match mode {
            GeneralityMode::Product => {
                let total: i64 = (0..DIMS).map(|d| space.extent(d) as i64).product();
                self.cell_count(space) as f64 / total as f64
            }
            GeneralityMode::MeanWidth => {
                let sum: f64 = self
                    .intervals
                    .iter()
                    .enumerate()
                    .map(|(d, iv)| iv.width(space.max[d]) as f64 / space.extent(d) as f64)
                    .sum();
                sum / DIMS as f64
            }
        }
    }

    /// True if every point matched by `other` is matched by `self`.
    pub fn covers(&self, other: &IntervalCondition, space: &InputSpace) -> bool {
        self.intervals
            .iter()
            .zip(&other.intervals)
            .zip(space.max)
            .all(|((g, s), m)| {
                if s.width(m) == 0 {
                    return true;
                }
                g.min.max(0) <= s.min.max(0) && g.upper(m) >= s.upper(m)
            })
    }
}
