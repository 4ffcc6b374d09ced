//! Experiment orchestration and CSV emission.

pub mod config;
pub mod csvio;
pub mod experiment;
pub mod seeds;

pub use config::{EnvVariant, ExperimentConfig};
pub use experiment::{
    default_groups, evaluate_instances, load_instances, run_compaction_sweep, run_stg_groups,
    run_training_experiment, write_state_report, Instance, StgGroup, StgRow, SweepRow, TrainingRun,
};
pub use seeds::derive_seed;
