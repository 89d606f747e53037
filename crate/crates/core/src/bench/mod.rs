//! Synthetic dictionary recovery: ground-truth generation, the recovery
//! metric, and a parallel, seed-deterministic experiment runner.

mod data;
mod experiment;
mod presets;

pub use data::{add_noise, gen_ground_truth, recovery_error, GroundTruth, SparsityModel};
pub use experiment::{
    algorithm_seed, noise_seed, run_experiment, run_trial, truth_seed, AlgorithmRun,
    ExperimentResult, ExperimentSpec, MeanRecord, RunOptions, TrialRecord,
};
pub use presets::{preset, PRESET_NAMES};
