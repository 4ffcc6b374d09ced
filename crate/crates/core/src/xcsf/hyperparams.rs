use serde::{Deserialize, Serialize};

use super::condition::GeneralityMode;
use crate::error::{Error, Result};

/// XCSF hyperparameters. Defaults are the FrozenLake8x8 training settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    /// Population cap in microclassifiers (`N`).
    pub pop_size: usize,
    /// Learning rate for error, action-set size and fitness (`β`).
    pub beta: f64,
    /// Learning rate of the minimum-error estimate μ (`β_ε`).
    pub beta_eps: f64,
    /// Accuracy fall-off scale (`α`).
    pub alpha: f64,
    /// Target absolute error (`ε₀`).
    pub eps0: f64,
    /// Accuracy exponent (`ν`).
    pub nu: f64,
    /// Reinforcement discount (`γ`).
    pub gamma: f64,
    pub theta_ga: f64,
    /// Tournament inclusion probability (`τ`).
    pub tau: f64,
    /// Crossover probability (`χ`).
    pub chi: f64,
    /// Per-allele swap probability in uniform crossover (`υ`).
    pub upsilon: f64,
    /// Per-allele (and action) mutation probability.
    pub mut_rate: f64,
    pub theta_del: u64,
    /// Deletion fitness fraction (`δ`).
    pub delta: f64,
    pub theta_sub: u64,
    pub eps_init: f64,
    pub fit_init: f64,
    pub theta_mna: usize,
    pub do_ga_subsumption: bool,
    pub do_action_set_subsumption: bool,
    /// Covering stretch bound.
    pub r0: i32,
    /// Mutation step bound.
    pub m0: i32,
    /// Constant input prepended to the prediction input vector.
    pub x0: f64,
    /// NLMS learning rate (`η`).
    pub eta: f64,
    /// ε-greedy exploration probability during training.
    pub explore_prob: f64,
    /// Step cap per training episode.
    pub episode_step_cap: u64,
    /// Use the μ minimum-error estimate when computing accuracy.
    pub use_mu: bool,
    pub generality: GeneralityMode,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            pop_size: 5000,
            beta: 0.1,
            beta_eps: 0.05,
            alpha: 0.1,
            eps0: 0.01,
            nu: 5.0,
            gamma: 0.95,
            theta_ga: 50.0,
            tau: 0.5,
            chi: 1.0,
            upsilon: 0.5,
            mut_rate: 0.05,
            theta_del: 50,
            delta: 0.1,
            theta_sub: 50,
            eps_init: 1e-3,
            fit_init: 1e-3,
            theta_mna: 4,
            do_ga_subsumption: true,
            do_action_set_subsumption: false,
            r0: 4,
            m0: 4,
            x0: 10.0,
            eta: 0.1,
            explore_prob: 0.5,
            episode_step_cap: 200,
            use_mu: true,
            generality: GeneralityMode::Product,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        fn bad(name: &'static str, reason: impl Into<String>) -> Result<()> {
            Err(Error::InvalidHyperparameter {
                name,
                reason: reason.into(),
            })
        }
        fn unit(name: &'static str, v: f64) -> Result<()> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                bad(name, format!("{v} not in [0, 1]"))
            }
        }
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                bad(name, format!("{v} must be positive and finite"))
            }
        }
        if self.pop_size == 0 {
            return bad("pop_size", "must be at least 1");
        }
        positive("beta", self.beta)?;
        unit("beta", self.beta)?;
        positive("beta_eps", self.beta_eps)?;
        unit("beta_eps", self.beta_eps)?;
        positive("alpha", self.alpha)?;
        positive("eps0", self.eps0)?;
        positive("nu", self.nu)?;
        unit("gamma", self.gamma)?;
        if !(self.theta_ga >= 0.0) {
            return bad("theta_ga", "must be non-negative");
        }
        positive("tau", self.tau)?;
        unit("tau", self.tau)?;
        unit("chi", self.chi)?;
        unit("upsilon", self.upsilon)?;
        unit("mut_rate", self.mut_rate)?;
        unit("delta", self.delta)?;
        if !(self.eps_init >= 0.0) {
            return bad("eps_init", "must be non-negative");
        }
        positive("fit_init", self.fit_init)?;
        if self.theta_mna == 0 || self.theta_mna > crate::env::NUM_ACTIONS {
            return bad("theta_mna", format!("{} not in 1..=4", self.theta_mna));
        }
        if self.r0 < 0 {
            return bad("r0", "must be non-negative");
        }
        if self.m0 < 1 {
            return bad("m0", "must be at least 1");
        }
        if self.x0 == 0.0 || !self.x0.is_finite() {
            return bad("x0", "must be finite and non-zero");
        }
        positive("eta", self.eta)?;
        unit("explore_prob", self.explore_prob)?;
        if self.episode_step_cap == 0 {
            return bad("episode_step_cap", "must be at least 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        Hyperparams::default().validate().unwrap();
    }

    #[test]
    fn invalid_values_are_named() {
        let hp = Hyperparams {
            tau: 0.0,
            ..Default::default()
        };
        match hp.validate() {
            Err(Error::InvalidHyperparameter { name, .. }) => assert_eq!(name, "tau"),
            other => panic!("{other:?}"),
        }
        let hp = Hyperparams {
            theta_mna: 5,
            ..Default::default()
        };
        assert!(matches!(
            hp.validate(),
            Err(Error::InvalidHyperparameter { name: "theta_mna", .. })
        ));
    }

    #[test]
    fn toml_round_trip_uses_flat_keys() {
        let hp = Hyperparams::default();
        let text = toml::to_string(&hp).unwrap();
        assert!(text.contains("pop_size = 5000"));
        assert!(text.contains("beta_eps = 0.05"));
        let back: Hyperparams = toml::from_str(&text).unwrap();
        assert_eq!(back, hp);
        let partial: Hyperparams = toml::from_str("eps0 = 0.02\n").unwrap();
        assert_eq!(partial.eps0, 0.02);
        assert_eq!(partial.pop_size, 5000);
        assert!(toml::from_str::<Hyperparams>("bogus = 1\n").is_err());
    }
}
