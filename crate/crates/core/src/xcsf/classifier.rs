use serde::{Deserialize, Serialize};

use super::condition::{GeneralityMode, InputSpace, IntervalCondition, DIMS};
use crate::env::{Action, State};

/// Length of the prediction input vector `(x0, s_1, .., s_d)`.
pub const INPUT_LEN: usize = DIMS + 1;

pub fn input_vector(s: State, x0: f64) -> [f64; INPUT_LEN] {
    [x0, s.x as f64, s.y as f64]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    /// Creation order; stable across persistence and used as the final tie-break.
    pub id: u64,
    pub condition: IntervalCondition,
    pub action: Action,
    /// Linear prediction weights, bias weight first.
    pub weights: [f64; INPUT_LEN],
    pub epsilon: f64,
    pub mu: f64,
    pub fitness: f64,
    pub numerosity: u32,
    pub experience: u64,
    pub as_est: f64,
    pub ts: u64,
    pub generality: f64,
}

impl Classifier {
    /// Fresh classifier as produced by covering.
    pub fn new(
        condition: IntervalCondition,
        action: Action,
        time: u64,
        eps_init: f64,
        fit_init: f64,
        space: &InputSpace,
        mode: GeneralityMode,
    ) -> Self {
        Classifier {
            id: 0,
            condition,
            action,
            weights: [0.0; INPUT_LEN],
            epsilon: eps_init,
            mu: 0.0,
            fitness: fit_init,
            numerosity: 1,
            experience: 0,
            as_est: 1.0,
            ts: time,
            generality: condition.generality(space, mode),
        }
    }

    pub fn predict_input(&self, input: &[f64; INPUT_LEN]) -> f64 {
        self.weights.iter().zip(input).map(|(w, x)| w * x).sum()
    }

    pub fn predict(&self, s: State, x0: f64) -> f64 {
        self.predict_input(&input_vector(s, x0))
    }

    pub fn matches(&self, space: &InputSpace, s: State) -> bool {
        self.condition.matches(space, s)
    }

    /// Error used for accuracy: `max(ε - μ, 0)` when μ tracking is on, `ε` otherwise.
    pub fn adjusted_error(&self, use_mu: bool) -> f64 {
        if use_mu {
            (self.epsilon - self.mu).max(0.0)
        } else {
            self.epsilon
        }
    }

    pub fn refresh_generality(&mut self, space: &InputSpace, mode: GeneralityMode) {
        self.generality = self.condition.generality(space, mode);
    }

    pub fn same_rule(&self, other: &Classifier) -> bool {
        self.action == other.action && self.condition == other.condition
    }
}

/// Line-oriented persistence record for one macroclassifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierRecord {
    pub mins: Vec<i32>,
    pub spans: Vec<i32>,
    pub action: Action,
    pub weights: Vec<f64>,
    pub epsilon: f64,
    pub mu: f64,
    pub fitness: f64,
    pub numerosity: u32,
    pub experience: u64,
    pub as_est: f64,
    pub ts: u64,
    pub generality: f64,
}

impl From<&Classifier> for ClassifierRecord {
    fn from(c: &Classifier) -> Self {
        ClassifierRecord {
            mins: c.condition.intervals.iter().map(|iv| iv.min).collect(),
            spans: c.condition.intervals.iter().map(|iv| iv.span).collect(),
            action: c.action,
            weights: c.weights.to_vec(),
            epsilon: c.epsilon,
            mu: c.mu,
            fitness: c.fitness,
            numerosity: c.numerosity,
            experience: c.experience,
            as_est: c.as_est,
            ts: c.ts,
            generality: c.generality,
        }
    }
}

impl ClassifierRecord {
    pub fn into_classifier(self, id: u64) -> Result<Classifier, String> {
        if self.mins.len() != DIMS || self.spans.len() != DIMS {
            return Err(format!(
                "expected {DIMS} mins and spans, got {} and {}",
                self.mins.len(),
                self.spans.len()
            ));
        }
        if self.spans.iter().any(|s| *s < 0) {
            return Err("negative span".into());
        }
        let weights: [f64; INPUT_LEN] = self
            .weights
            .as_slice()
            .try_into()
            .map_err(|_| format!("expected {INPUT_LEN} weights, got {}", self.weights.len()))?;
        if self.numerosity == 0 {
            return Err("numerosity must be positive".into());
        }
        if !(self.fitness > 0.0) {
            return Err(format!("fitness must be positive, got {}", self.fitness));
        }
        let condition = IntervalCondition::new(std::array::from_fn(|d| {
            super::condition::Interval::new(self.mins[d], self.spans[d])
        }));
        Ok(Classifier {
            id,
            condition,
            action: self.action,
            weights,
            epsilon: self.epsilon,
            mu: self.mu,
            fitness: self.fitness,
            numerosity: self.numerosity,
            experience: self.experience,
            as_est: self.as_est,
            ts: self.ts,
            generality: self.generality,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xcsf::condition::Interval;

    #[test]
    fn prediction_is_dot_product_with_constant_input() {
        let space = InputSpace { max: [7, 7] };
        let cond = IntervalCondition::new([Interval::new(0, 7), Interval::new(0, 7)]);
        let mut c = Classifier::new(cond, Action::Left, 0, 1e-3, 1e-3, &space, GeneralityMode::Product);
        assert_eq!(c.predict(State::new(5, 2), 10.0), 0.0);
        c.weights = [0.05, 0.01, -0.02];
        assert!((c.predict(State::new(3, 4), 10.0) - 0.45).abs() < 1e-12);
    }

    #[test]
    fn record_rejects_malformed_input() {
        let space = InputSpace { max: [7, 7] };
        let cond = IntervalCondition::new([Interval::new(1, 2), Interval::new(3, 0)]);
        let c = Classifier::new(cond, Action::Up, 4, 1e-3, 1e-3, &space, GeneralityMode::Product);
        let rec = ClassifierRecord::from(&c);
        assert_eq!(rec.clone().into_classifier(0).unwrap(), c);
        let mut bad = rec.clone();
        bad.weights.pop();
        assert!(bad.into_classifier(0).is_err());
        let mut bad = rec;
        bad.numerosity = 0;
        assert!(bad.into_classifier(0).is_err());
    }
}
