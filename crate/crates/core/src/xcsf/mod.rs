//! XCSF with integer interval conditions, linear NLMS predictions and μ-adjusted accuracy.

pub mod classifier;
pub mod condition;
pub mod hyperparams;
pub mod population;
pub mod system;
pub mod train;

pub use classifier::{input_vector, Classifier, ClassifierRecord};
pub use condition::{GeneralityMode, InputSpace, Interval, IntervalCondition};
pub use hyperparams::Hyperparams;
pub use population::{ClassifierRef, Population, PopulationPredictor, PredictionArray};
pub use system::{
    delete_from_population, generate_match_set, prediction_array, reinforce, run_ga, select_action,
    ActionSet, MatchSet,
};
pub use train::{train, TraceMonitor, TracePoint, TrainOutcome, Xcsf};
