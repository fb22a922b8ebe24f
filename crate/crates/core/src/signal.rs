//! Synthetic system-identification world: FIR plants, excitation and noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

pub const DEFAULT_TAPS: usize = 64;
/// Nonzero tap positions of the default sparse plant.
pub const DEFAULT_SPARSE_SUPPORT: [usize; 4] = [5, 21, 37, 53];
pub const DEFAULT_SIGMA_N: f64 = 0.04;

/// `x(i) = 0.7 x(i-1) + v(i)`
pub const AR1_COEFFS: [f64; 1] = [0.7];
/// `x(i) = 0.8 x(i-1) + 0.19 x(i-2) + 0.09 x(i-3) - 0.5 x(i-4) + v(i)`
pub const AR4_COEFFS: [f64; 4] = [0.8, 0.19, 0.09, -0.5];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("dimension mismatch: plant has {expected} taps, regressor has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("support index {index} out of range for {taps} taps")]
    SupportOutOfRange { index: usize, taps: usize },
    #[error("invalid signal parameter: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    /// A handful of nonzero taps.
    Sparse,
    /// Every other tap nonzero.
    SemiSparse,
    /// All taps nonzero.
    Dense,
}

impl SystemKind {
    pub fn name(&self) -> &'static str {
        match self {
            SystemKind::Sparse => "sparse",
            SystemKind::SemiSparse => "semi_sparse",
            SystemKind::Dense => "dense",
        }
    }
}

/// An unknown FIR plant.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub kind: SystemKind,
    pub taps: Vec<f64>,
    /// Indices of the nonzero taps, ascending.
    pub support: Vec<usize>,
}

impl SystemSpec {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn support_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.taps.len()];
        for &m in &self.support {
            mask[m] = true;
        }
        mask
    }
}

/// Plant with the default 64 taps and default sparse support.
pub fn make_system(kind: SystemKind, seed: u64) -> SystemSpec {
    make_system_with(kind, DEFAULT_TAPS, &DEFAULT_SPARSE_SUPPORT, seed)
        .expect("default plant layout is valid")
}

/// Draws unit-Gaussian values on the support of `kind` and normalizes the
/// plant to unit energy.
pub fn make_system_with(
    kind: SystemKind,
    taps: usize,
    sparse_support: &[usize],
    seed: u64,
) -> Result<SystemSpec, SignalError> {
    if taps == 0 {
        return Err(SignalError::Invalid("plant needs at least one tap".into()));
    }
    let mut support: Vec<usize> = match kind {
        SystemKind::Sparse => sparse_support.to_vec(),
        SystemKind::SemiSparse => (0..taps).step_by(2).collect(),
        SystemKind::Dense => (0..taps).collect(),
    };
    support.sort_unstable();
    support.dedup();
    if let Some(&index) = support.iter().find(|&&m| m >= taps) {
        return Err(SignalError::SupportOutOfRange { index, taps });
    }
    if support.is_empty() {
        return Err(SignalError::Invalid("plant support is empty".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; taps];
    for &m in &support {
        // A draw of exactly zero would shrink the support.
        let mut v: f64 = StandardNormal.sample(&mut rng);
        while v == 0.0 {
            v = StandardNormal.sample(&mut rng);
        }
        values[m] = v;
    }
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    values.iter_mut().for_each(|v| *v /= norm);
    Ok(SystemSpec {
        kind,
        taps: values,
        support,
    })
}

/// One segment of a piecewise-stationary experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase {
    pub system: SystemKind,
    pub iterations: usize,
}

/// Ordered phases; the plant switches at phase boundaries without resetting
/// the filter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseSchedule {
    phases: Vec<Phase>,
}

impl PhaseSchedule {
    pub fn new(phases: Vec<Phase>) -> Result<Self, SignalError> {
        if phases.is_empty() {
            return Err(SignalError::Invalid("schedule has no phases".into()));
        }
        if let Some(p) = phases.iter().find(|p| p.iterations == 0) {
            return Err(SignalError::Invalid(format!(
                "{} phase has zero iterations",
                p.system.name()
            )));
        }
        Ok(PhaseSchedule { phases })
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn total_iterations(&self) -> usize {
        self.phases.iter().map(|p| p.iterations).sum()
    }

    /// Half-open iteration ranges, one per phase.
    pub fn ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.phases
            .iter()
            .map(|p| {
                let r = start..start + p.iterations;
                start = r.end;
                r
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputKind {
    WhiteGaussian,
    Ar1,
    Ar4,
}

impl InputKind {
    pub fn ar_coefficients(&self) -> &'static [f64] {
        match self {
            InputKind::WhiteGaussian => &[],
            InputKind::Ar1 => &AR1_COEFFS,
            InputKind::Ar4 => &AR4_COEFFS,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InputKind::WhiteGaussian => "white",
            InputKind::Ar1 => "ar1",
            InputKind::Ar4 => "ar4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputModel {
    pub kind: InputKind,
    pub input_power: f64,
}

impl Default for InputModel {
    fn default() -> Self {
        InputModel {
            kind: InputKind::WhiteGaussian,
            input_power: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Standard deviation of the additive measurement noise.
    pub sigma_n: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            sigma_n: DEFAULT_SIGMA_N,
        }
    }
}

/// `n` unit-variance Gaussian draws.
pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    StandardNormal.sample_iter(&mut rng).take(n).collect()
}

/// All-pole filter `x(i) = Σ_k a_k x(i-k) + v(i)` with zero initial history.
pub fn ar_filter(coeffs: &[f64], v: &[f64]) -> Vec<f64> {
    let mut x: Vec<f64> = Vec::with_capacity(v.len());
    for (i, &vi) in v.iter().enumerate() {
        let feedback: f64 = coeffs
            .iter()
            .enumerate()
            .filter(|(k, _)| *k < i)
            .map(|(k, a)| a * x[i - 1 - k])
            .sum();
        x.push(feedback + vi);
    }
    x
}

/// Excitation sequence of length `n`.
///
/// AR sequences are rescaled so their empirical mean power equals
/// `input_power`.
pub fn gen_input(model: &InputModel, n: usize, seed: u64) -> Vec<f64> {
    let v = white_noise(n, seed);
    match model.kind {
        InputKind::WhiteGaussian => {
            let s = model.input_power.sqrt();
            v.into_iter().map(|x| x * s).collect()
        }
        kind => {
            let mut x = ar_filter(kind.ar_coefficients(), &v);
            let power = x.iter().map(|v| v * v).sum::<f64>() / n.max(1) as f64;
            if power > 0.0 {
                let s = (model.input_power / power).sqrt();
                x.iter_mut().for_each(|v| *v *= s);
            }
            x
        }
    }
}

/// `d = tapsᵀ x + σ_n ν`, with `ν` a unit-variance noise draw.
pub fn gen_desired(
    system: &SystemSpec,
    x_window: &[f64],
    noise: &NoiseModel,
    noise_sample: f64,
) -> Result<f64, SignalError> {
    if x_window.len() != system.taps.len() {
        return Err(SignalError::DimensionMismatch {
            expected: system.taps.len(),
            got: x_window.len(),
        });
    }
    let clean: f64 = system.taps.iter().zip(x_window).map(|(h, x)| h * x).sum();
    Ok(clean + noise.sigma_n * noise_sample)
}

/// Tapped delay line `[x(i), x(i-1), …, x(i-M+1)]`, zero-padded at start-up.
#[derive(Debug, Clone)]
pub struct Regressor {
    window: Vec<f64>,
}

impl Regressor {
    pub fn new(taps: usize) -> Self {
        Regressor {
            window: vec![0.0; taps],
        }
    }

    pub fn push(&mut self, sample: f64) -> &[f64] {
        if !self.window.is_empty() {
            self.window.rotate_right(1);
            self.window[0] = sample;
        }
        &self.window
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }
}
