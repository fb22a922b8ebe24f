//! Monte-Carlo system-identification experiments.
//!
//! A trial draws one excitation sequence, one noise sequence and one plant per
//! phase, then feeds the *same* `(x, d)` stream to every algorithm. Learning
//! curves are ensemble averages over trials.
//!
//! # Seeding
//!
//! All randomness derives from `master_seed` through [`splitmix64`]:
//!
//! ```text
//! trial_seed(t)     = splitmix64(master_seed + GOLDEN · (t + 1))
//! input seed        = splitmix64(trial_seed(t) ^ STREAM_INPUT)
//! noise seed        = splitmix64(trial_seed(t) ^ STREAM_NOISE)
//! plant seed, phase p:
//!   fixed plants    = splitmix64(splitmix64(master_seed ^ STREAM_PLANT) + GOLDEN · (p + 1))
//!   redrawn plants  = splitmix64(splitmix64(trial_seed(t) ^ STREAM_PLANT) + GOLDEN · (p + 1))
//! ```
//!
//! with wrapping arithmetic. Each seed initializes a ChaCha8 generator.

use std::fmt;
use std::ops::Range;

use rayon::prelude::*;
use thiserror::Error;

use crate::filters::{
    AdaptiveFilter, AdpState, AlphaMode, FilterError, FilterWeights, Nlms, OracleSmNlms, Pnlms,
    PnlmsParams, Sample, SmNlms, StepOutcome,
};
use crate::penalty::PenaltySpec;
use crate::signal::{
    gen_desired, gen_input, make_system_with, white_noise, InputModel, NoiseModel, PhaseSchedule,
    Regressor, SignalError, SystemSpec, DEFAULT_SPARSE_SUPPORT, DEFAULT_TAPS,
};

pub const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
pub const STREAM_INPUT: u64 = 0x494E_5055_5400_0001;
pub const STREAM_NOISE: u64 = 0x4E4F_4953_4500_0002;
pub const STREAM_PLANT: u64 = 0x504C_414E_5400_0003;

/// Fraction of each phase, counted from its end, treated as steady state.
pub const DEFAULT_STEADY_STATE_FRACTION: f64 = 0.2;
pub const DEFAULT_ALPHA_MAX: f64 = 1e-3;

/// Trials are processed in blocks of this size; partial sums are combined in
/// trial order so the result does not depend on thread scheduling.
const TRIAL_BLOCK: usize = 32;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error("all {runs} trials of `{label}` failed; first failure: {first}")]
    AllTrialsFailed {
        label: String,
        runs: usize,
        first: TrialFailure,
    },
}

/// A trial that stopped early.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("trial {trial} failed at iteration {iteration}: {source}")]
pub struct TrialFailure {
    pub trial: usize,
    pub iteration: usize,
    pub source: FilterError,
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(master_seed: u64, trial_index: usize) -> u64 {
    splitmix64(master_seed.wrapping_add(GOLDEN.wrapping_mul(trial_index as u64 + 1)))
}

fn phase_seed(base: u64, phase: usize) -> u64 {
    splitmix64(splitmix64(base ^ STREAM_PLANT).wrapping_add(GOLDEN.wrapping_mul(phase as u64 + 1)))
}

/// What to run, independent of any trial.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgorithmKind {
    Nlms {
        mu: f64,
        delta_reg: f64,
    },
    Pnlms(PnlmsParams),
    SmNlms,
    OracleSmNlms,
    /// Penalized SM-NLMS; [`AlphaMode::Frozen`] gives the fixed-penalty family.
    Penalized {
        penalty: PenaltySpec,
        alpha0: f64,
        alpha_max: f64,
        alpha_mode: AlphaMode,
        nonnegative_alpha: bool,
    },
}

impl AlgorithmKind {
    pub fn default_label(&self) -> String {
        match self {
            AlgorithmKind::Nlms { .. } => "NLMS".into(),
            AlgorithmKind::Pnlms(_) => "PNLMS".into(),
            AlgorithmKind::SmNlms => "SM-NLMS".into(),
            AlgorithmKind::OracleSmNlms => "Oracle-SM-NLMS".into(),
            AlgorithmKind::Penalized {
                penalty,
                alpha_mode,
                ..
            } => {
                let family = match penalty {
                    PenaltySpec::L1 => "ZA",
                    PenaltySpec::LogSum { .. } => "RZA",
                    PenaltySpec::ExpL0 { .. } => "EZA",
                };
                match alpha_mode {
                    AlphaMode::Frozen => format!("{family}-SM-NLMS"),
                    AlphaMode::PosteriorGradient => format!("{family}-SM-NLMS-ADP"),
                    AlphaMode::PosteriorError => format!("{family}-SM-NLMS-ADP-E"),
                }
            }
        }
    }

    /// Whether updates are data-selective.
    pub fn is_set_membership(&self) -> bool {
        !matches!(self, AlgorithmKind::Nlms { .. } | AlgorithmKind::Pnlms(_))
    }
}

/// An algorithm with the name it is reported under.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmDescriptor {
    pub label: String,
    pub kind: AlgorithmKind,
}

impl AlgorithmDescriptor {
    pub fn new(kind: AlgorithmKind) -> Self {
        AlgorithmDescriptor {
            label: kind.default_label(),
            kind,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Fresh filter with zero weights.
    pub fn build(
        &self,
        taps: usize,
        gamma: f64,
        initial_plant: &SystemSpec,
    ) -> Result<Box<dyn TrackedFilter>, FilterError> {
        let weights = FilterWeights::zeros(taps);
        Ok(match &self.kind {
            AlgorithmKind::Nlms { mu, delta_reg } => Box::new(Nlms {
                weights,
                mu_bar: *mu,
                delta_reg: *delta_reg,
            }),
            AlgorithmKind::Pnlms(params) => {
                params.validate()?;
                Box::new(Pnlms {
                    weights,
                    params: *params,
                })
            }
            AlgorithmKind::SmNlms => Box::new(SmNlms { weights, gamma }),
            AlgorithmKind::OracleSmNlms => Box::new(OracleSmNlms {
                weights,
                gamma,
                support_mask: initial_plant.support_mask(),
            }),
            AlgorithmKind::Penalized {
                penalty,
                alpha0,
                alpha_max,
                alpha_mode,
                nonnegative_alpha,
            } => {
                let mut state =
                    AdpState::new(taps, *penalty, gamma, *alpha0, *alpha_max, *alpha_mode)?;
                state.nonnegative_alpha = *nonnegative_alpha;
                Box::new(state)
            }
        })
    }
}

/// An [`AdaptiveFilter`] that can be told when the plant changes.
///
/// Only the oracle uses this: it is handed the true support of each plant.
pub trait TrackedFilter: AdaptiveFilter {
    fn plant_changed(&mut self, _plant: &SystemSpec) {}
}

impl TrackedFilter for Nlms {}
impl TrackedFilter for Pnlms {}
impl TrackedFilter for SmNlms {}
impl TrackedFilter for AdpState {}
impl TrackedFilter for OracleSmNlms {
    /// Adopts the new support and zeroes every weight outside it.
    fn plant_changed(&mut self, plant: &SystemSpec) {
        self.support_mask = plant.support_mask();
        let projected = self
            .weights
            .as_slice()
            .iter()
            .zip(&self.support_mask)
            .map(|(&w, &on)| if on { w } else { 0.0 })
            .collect();
        self.weights = FilterWeights::from_vec(projected);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub schedule: PhaseSchedule,
    pub input: InputModel,
    pub noise: NoiseModel,
    pub algorithms: Vec<AlgorithmDescriptor>,
    pub runs: usize,
    pub master_seed: u64,
    /// Error bound `γ` shared by every set-membership algorithm.
    pub gamma: f64,
    pub taps: usize,
    pub sparse_support: Vec<usize>,
    /// Draw fresh plants for every trial instead of one set for the experiment.
    pub redraw_per_trial: bool,
    pub steady_state_fraction: f64,
}

impl ExperimentConfig {
    /// Defaults for everything except the schedule and the algorithm list.
    pub fn new(schedule: PhaseSchedule, algorithms: Vec<AlgorithmDescriptor>) -> Self {
        let noise = NoiseModel::default();
        ExperimentConfig {
            schedule,
            input: InputModel::default(),
            noise,
            algorithms,
            runs: 200,
            master_seed: 1,
            gamma: default_gamma(noise.sigma_n),
            taps: DEFAULT_TAPS,
            sparse_support: DEFAULT_SPARSE_SUPPORT.to_vec(),
            redraw_per_trial: false,
            steady_state_fraction: DEFAULT_STEADY_STATE_FRACTION,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return bad(format!(
                "gamma must be finite and positive, got {}",
                self.gamma
            ));
        }
        if self.algorithms.is_empty() {
            return bad("algorithm list is empty".into());
        }
        if self.taps == 0 {
            return bad("taps must be at least 1".into());
        }
        if !(self.noise.sigma_n.is_finite() && self.noise.sigma_n > 0.0) {
            return bad(format!(
                "sigma_n must be finite and positive, got {}",
                self.noise.sigma_n
            ));
        }
        if !(self.input.input_power.is_finite() && self.input.input_power > 0.0) {
            return bad(format!(
                "input power must be finite and positive, got {}",
                self.input.input_power
            ));
        }
        if !(self.steady_state_fraction > 0.0 && self.steady_state_fraction <= 1.0) {
            return bad(format!(
                "steady_state_fraction must lie in (0, 1], got {}",
                self.steady_state_fraction
            ));
        }
        let mut labels: Vec<&str> = self.algorithms.iter().map(|a| a.label.as_str()).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return bad(format!("duplicate algorithm label `{}`", w[0]));
        }
        for (p, phase) in self.schedule.phases().iter().enumerate() {
            make_system_with(phase.system, self.taps, &self.sparse_support, p as u64)?;
        }
        let probe = make_system_with(
            self.schedule.phases()[0].system,
            self.taps,
            &self.sparse_support,
            0,
        )?;
        for algo in &self.algorithms {
            algo.build(self.taps, self.gamma, &probe)?;
        }
        Ok(())
    }

    /// Output SNR of the first plant: `P_x ‖h‖² / σ_n²`, in dB.
    pub fn snr_db(&self) -> f64 {
        // Plants are normalized to unit energy.
        10.0 * (self.input.input_power / (self.noise.sigma_n * self.noise.sigma_n)).log10()
    }

    /// Stable 64-bit FNV-1a digest of the configuration.
    pub fn digest(&self) -> u64 {
        let text = format!("{self:?}");
        text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
        })
    }

    pub fn plants(&self, trial_index: usize) -> Result<Vec<SystemSpec>, SignalError> {
        let base = if self.redraw_per_trial {
            trial_seed(self.master_seed, trial_index)
        } else {
            self.master_seed
        };
        self.schedule
            .phases()
            .iter()
            .enumerate()
            .map(|(p, phase)| {
                make_system_with(
                    phase.system,
                    self.taps,
                    &self.sparse_support,
                    phase_seed(base, p),
                )
            })
            .collect()
    }
}

/// `γ = √5 σ_n`.
pub fn default_gamma(sigma_n: f64) -> f64 {
    5f64.sqrt() * sigma_n
}

/// Everything random about one trial. Shared by all algorithms.
#[derive(Debug, Clone)]
pub struct TrialData {
    pub trial: usize,
    pub input: Vec<f64>,
    /// Unit-variance measurement noise draws.
    pub noise: Vec<f64>,
    pub plants: Vec<SystemSpec>,
}

pub fn trial_data(config: &ExperimentConfig, trial_index: usize) -> Result<TrialData, SignalError> {
    let n = config.schedule.total_iterations();
    let seed = trial_seed(config.master_seed, trial_index);
    Ok(TrialData {
        trial: trial_index,
        input: gen_input(&config.input, n, splitmix64(seed ^ STREAM_INPUT)),
        noise: white_noise(n, splitmix64(seed ^ STREAM_NOISE)),
        plants: config.plants(trial_index)?,
    })
}

/// Iterates the `(x(i), d(i))` stream of a trial along with the active plant.
pub fn for_each_sample(
    config: &ExperimentConfig,
    data: &TrialData,
    mut f: impl FnMut(usize, usize, Sample<'_>) -> Result<(), FilterError>,
) -> Result<(), TrialFailure> {
    let mut regressor = Regressor::new(config.taps);
    let ranges = config.schedule.ranges();
    for (p, range) in ranges.into_iter().enumerate() {
        let plant = &data.plants[p];
        for i in range {
            let x = regressor.push(data.input[i]);
            let d = gen_desired(plant, x, &config.noise, data.noise[i])
                .expect("regressor length equals plant length");
            f(i, p, Sample::new(x, d)).map_err(|source| TrialFailure {
                trial: data.trial,
                iteration: i,
                source,
            })?;
        }
    }
    Ok(())
}

/// Per-iteration record of one algorithm on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    /// `e(i)²` with the a priori error.
    pub sq_error: Vec<f64>,
    /// `‖w(i) - h(i)‖²` after the step.
    pub sq_deviation: Vec<f64>,
    pub updated: Vec<bool>,
}

impl TrialRecord {
    fn with_capacity(n: usize) -> Self {
        TrialRecord {
            sq_error: Vec::with_capacity(n),
            sq_deviation: Vec::with_capacity(n),
            updated: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.updated.len()
    }

    pub fn is_empty(&self) -> bool {
        self.updated.is_empty()
    }
}

/// Runs one algorithm over a prepared trial, also handing each outcome to
/// `observe`.
pub fn run_on_data_with(
    config: &ExperimentConfig,
    algo: &AlgorithmDescriptor,
    data: &TrialData,
    mut observe: impl FnMut(usize, &Sample<'_>, &StepOutcome),
) -> Result<TrialRecord, TrialFailure> {
    let mut filter = algo
        .build(config.taps, config.gamma, &data.plants[0])
        .map_err(|source| TrialFailure {
            trial: data.trial,
            iteration: 0,
            source,
        })?;
    let mut record = TrialRecord::with_capacity(config.schedule.total_iterations());
    let mut active_phase = 0;
    for_each_sample(config, data, |i, p, sample| {
        if p != active_phase {
            active_phase = p;
            filter.plant_changed(&data.plants[p]);
        }
        let out = filter.step(&sample)?;
        observe(i, &sample, &out);
        let msd = filter
            .weights()
            .iter()
            .zip(&data.plants[p].taps)
            .map(|(w, h)| (w - h) * (w - h))
            .sum();
        record.sq_error.push(out.e_prior * out.e_prior);
        record.sq_deviation.push(msd);
        record.updated.push(out.updated);
        Ok(())
    })?;
    Ok(record)
}

pub fn run_on_data(
    config: &ExperimentConfig,
    algo: &AlgorithmDescriptor,
    data: &TrialData,
) -> Result<TrialRecord, TrialFailure> {
    run_on_data_with(config, algo, data, |_, _, _| {})
}

/// One full pass of the schedule for one algorithm.
pub fn run_trial(
    config: &ExperimentConfig,
    algo: &AlgorithmDescriptor,
    trial_index: usize,
) -> Result<TrialRecord, ExperimentError> {
    let data = trial_data(config, trial_index)?;
    Ok(run_on_data(config, algo, &data).map_err(|f| f.source)?)
}

/// Ensemble-averaged curves of one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub label: String,
    pub algorithm: AlgorithmKind,
    pub mse: Vec<f64>,
    pub msd: Vec<f64>,
    /// Fraction of successful trials that updated at each iteration.
    pub updated_frac: Vec<f64>,
    pub successful_runs: usize,
    pub failed_runs: usize,
    pub phase_ranges: Vec<Range<usize>>,
    pub config_digest: u64,
}

/// Update statistics over a record or curve.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateRate {
    pub overall: f64,
    pub per_phase: Vec<f64>,
}

/// Fraction of iterations with an update, overall and per phase.
pub fn update_rate(updated: &[bool], phases: &[Range<usize>]) -> UpdateRate {
    let frac = |s: &[bool]| {
        if s.is_empty() {
            0.0
        } else {
            s.iter().filter(|u| **u).count() as f64 / s.len() as f64
        }
    };
    UpdateRate {
        overall: frac(updated),
        per_phase: phases.iter().map(|r| frac(&updated[r.clone()])).collect(),
    }
}

/// Last `fraction` of a range (at least one iteration).
pub fn steady_state_window(range: &Range<usize>, fraction: f64) -> Range<usize> {
    let len = range.end - range.start;
    let tail = ((len as f64 * fraction).round() as usize).clamp(1, len.max(1));
    range.end - tail..range.end
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn to_db(v: f64) -> f64 {
    10.0 * v.log10()
}

impl LearningCurve {
    pub fn len(&self) -> usize {
        self.mse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mse.is_empty()
    }

    fn window(&self, phase: usize, fraction: f64) -> Range<usize> {
        steady_state_window(&self.phase_ranges[phase], fraction)
    }

    pub fn steady_state_mse(&self, phase: usize, fraction: f64) -> f64 {
        mean(&self.mse[self.window(phase, fraction)])
    }

    pub fn steady_state_msd(&self, phase: usize, fraction: f64) -> f64 {
        mean(&self.msd[self.window(phase, fraction)])
    }

    pub fn steady_state_update_rate(&self, phase: usize, fraction: f64) -> f64 {
        mean(&self.updated_frac[self.window(phase, fraction)])
    }

    pub fn phase_update_rate(&self, phase: usize) -> f64 {
        mean(&self.updated_frac[self.phase_ranges[phase].clone()])
    }

    pub fn overall_update_rate(&self) -> f64 {
        mean(&self.updated_frac)
    }

    /// Iterations from the start of `phase` until the averaged MSD first drops
    /// to `threshold_db` or below.
    pub fn iterations_to_msd(&self, phase: usize, threshold_db: f64) -> Option<usize> {
        let r = self.phase_ranges[phase].clone();
        let threshold = 10f64.powf(threshold_db / 10.0);
        self.msd[r.clone()]
            .iter()
            .position(|&v| v <= threshold)
            .map(|k| k + 1)
    }

    pub fn phase_summary(&self, fraction: f64) -> Vec<PhaseSummary> {
        (0..self.phase_ranges.len())
            .map(|p| PhaseSummary {
                phase: p,
                mse_db: to_db(self.steady_state_mse(p, fraction)),
                msd_db: to_db(self.steady_state_msd(p, fraction)),
                update_rate: self.phase_update_rate(p),
                steady_update_rate: self.steady_state_update_rate(p, fraction),
            })
            .collect()
    }
}

/// Steady-state figures of one phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSummary {
    pub phase: usize,
    pub mse_db: f64,
    pub msd_db: f64,
    pub update_rate: f64,
    pub steady_update_rate: f64,
}

impl fmt::Display for PhaseSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "phase {}: MSE {:.2} dB, MSD {:.2} dB, updates {:.1}% (steady {:.1}%)",
            self.phase,
            self.mse_db,
            self.msd_db,
            100.0 * self.update_rate,
            100.0 * self.steady_update_rate
        )
    }
}

struct Accumulator {
    mse: Vec<f64>,
    msd: Vec<f64>,
    updates: Vec<u64>,
    ok: usize,
    failures: Vec<TrialFailure>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Accumulator {
            mse: vec![0.0; n],
            msd: vec![0.0; n],
            updates: vec![0; n],
            ok: 0,
            failures: Vec::new(),
        }
    }

    fn add(&mut self, result: Result<TrialRecord, TrialFailure>) {
        match result {
            Ok(rec) => {
                for (acc, v) in self.mse.iter_mut().zip(&rec.sq_error) {
                    *acc += v;
                }
                for (acc, v) in self.msd.iter_mut().zip(&rec.sq_deviation) {
                    *acc += v;
                }
                for (acc, u) in self.updates.iter_mut().zip(&rec.updated) {
                    *acc += *u as u64;
                }
                self.ok += 1;
            }
            Err(failure) => {
                log::warn!("{failure}");
                self.failures.push(failure);
            }
        }
    }
}

/// Runs every algorithm on `config.runs` paired trials and averages.
///
/// Trials execute in parallel; sums are formed in trial order.
pub fn run_monte_carlo(config: &ExperimentConfig) -> Result<Vec<LearningCurve>, ExperimentError> {
    config.validate()?;
    let n = config.schedule.total_iterations();
    let mut accs: Vec<Accumulator> = config
        .algorithms
        .iter()
        .map(|_| Accumulator::new(n))
        .collect();

    let mut start = 0;
    while start < config.runs {
        let end = (start + TRIAL_BLOCK).min(config.runs);
        let block: Vec<Vec<Result<TrialRecord, TrialFailure>>> = (start..end)
            .into_par_iter()
            .map(|t| {
                let data = trial_data(config, t)?;
                Ok(config
                    .algorithms
                    .iter()
                    .map(|a| run_on_data(config, a, &data))
                    .collect())
            })
            .collect::<Result<_, SignalError>>()?;
        for per_algo in block {
            for (acc, result) in accs.iter_mut().zip(per_algo) {
                acc.add(result);
            }
        }
        start = end;
    }

    let phase_ranges = config.schedule.ranges();
    let digest = config.digest();
    config
        .algorithms
        .iter()
        .zip(accs)
        .map(|(algo, acc)| {
            if acc.ok == 0 {
                return Err(ExperimentError::AllTrialsFailed {
                    label: algo.label.clone(),
                    runs: config.runs,
                    first: acc.failures[0].clone(),
                });
            }
            let k = acc.ok as f64;
            Ok(LearningCurve {
                label: algo.label.clone(),
                algorithm: algo.kind.clone(),
                mse: acc.mse.iter().map(|v| v / k).collect(),
                msd: acc.msd.iter().map(|v| v / k).collect(),
                updated_frac: acc.updates.iter().map(|&u| u as f64 / k).collect(),
                successful_runs: acc.ok,
                failed_runs: acc.failures.len(),
                phase_ranges: phase_ranges.clone(),
                config_digest: digest,
            })
        })
        .collect()
}
