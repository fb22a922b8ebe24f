//! Sparsity-aware set-membership adaptive filters with adjustable penalties,
//! their classical baselines, and a Monte-Carlo system-identification harness.

pub mod experiment;
pub mod filters;
pub mod penalty;
pub mod signal;

pub use experiment::{
    run_monte_carlo, run_trial, AlgorithmDescriptor, AlgorithmKind, ExperimentConfig,
    ExperimentError, LearningCurve,
};
pub use filters::{
    AdaptiveFilter, AdpState, AlphaMode, FilterError, FilterWeights, Sample, StepOutcome,
};
pub use penalty::{PenaltyError, PenaltySpec};
