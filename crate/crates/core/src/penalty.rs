//! Sparsity-promoting penalty functions and their (sub)gradients.
//!
//! Three penalties are supported, all separable over the coefficients:
//!
//! ```text
//! L1      f(w) = Σ |w_m|                     ∂f/∂w_m = sign(w_m)
//! LogSum  f(w) = Σ log(1 + |w_m| / ε')       ∂f/∂w_m = sign(w_m) / (ε' + |w_m|)
//! ExpL0   f(w) = Σ (1 - exp(-β |w_m|))       ∂f/∂w_m = β exp(-β |w_m|) sign(w_m)
//! ```
//!
//! `ExpL0` is a smooth surrogate of the `l0` pseudo-norm. Throughout, `sign(0) = 0`,
//! so the zero vector is a fixed point of every attractor term.

use thiserror::Error;

/// Default log-sum shrinkage constant `ε'`.
pub const DEFAULT_EPSILON_PRIME: f64 = 10.0;
/// Default exponential sharpness `β` of the `l0` surrogate.
pub const DEFAULT_BETA: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PenaltyError {
    #[error("log-sum epsilon' must be finite and positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("exponential beta must be finite and positive, got {0}")]
    InvalidBeta(f64),
    #[error("non-finite weight component {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
}

/// Which penalty `f_l` is applied, with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltySpec {
    L1,
    LogSum { epsilon_prime: f64 },
    ExpL0 { beta: f64 },
}

impl PenaltySpec {
    pub fn log_sum(epsilon_prime: f64) -> Result<Self, PenaltyError> {
        let spec = PenaltySpec::LogSum { epsilon_prime };
        spec.validate()?;
        Ok(spec)
    }

    pub fn exp_l0(beta: f64) -> Result<Self, PenaltyError> {
        let spec = PenaltySpec::ExpL0 { beta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), PenaltyError> {
        match *self {
            PenaltySpec::L1 => Ok(()),
            PenaltySpec::LogSum { epsilon_prime } => {
                if epsilon_prime.is_finite() && epsilon_prime > 0.0 {
                    Ok(())
                } else {
                    Err(PenaltyError::InvalidEpsilon(epsilon_prime))
                }
            }
            PenaltySpec::ExpL0 { beta } => {
                if beta.is_finite() && beta > 0.0 {
                    Ok(())
                } else {
                    Err(PenaltyError::InvalidBeta(beta))
                }
            }
        }
    }

    /// Per-coefficient penalty contribution.
    #[inline]
    pub fn value_component(&self, w: f64) -> f64 {
        match *self {
            PenaltySpec::L1 => w.abs(),
            PenaltySpec::LogSum { epsilon_prime } => (w.abs() / epsilon_prime).ln_1p(),
            PenaltySpec::ExpL0 { beta } => -(-beta * w.abs()).exp_m1(),
        }
    }

    /// Per-coefficient derivative of [`value_component`](Self::value_component).
    #[inline]
    pub fn gradient_component(&self, w: f64) -> f64 {
        let s = sign(w);
        if s == 0.0 {
            return 0.0;
        }
        match *self {
            PenaltySpec::L1 => s,
            PenaltySpec::LogSum { epsilon_prime } => s / (epsilon_prime + w.abs()),
            PenaltySpec::ExpL0 { beta } => beta * (-beta * w.abs()).exp() * s,
        }
    }

    /// `∇f(w) · x` without materializing the gradient.
    pub fn gradient_dot(&self, w: &[f64], x: &[f64]) -> f64 {
        w.iter()
            .zip(x)
            .map(|(&wm, &xm)| self.gradient_component(wm) * xm)
            .sum()
    }
}

/// `sign` with `sign(0) = 0`.
#[inline]
pub fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Gradient vector `p_f` of a penalty, one entry per weight.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyGradient(Vec<f64>);

impl PenaltyGradient {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

fn check_finite(w: &[f64]) -> Result<(), PenaltyError> {
    match w.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(PenaltyError::NonFinite {
            index,
            value: w[index],
        }),
        None => Ok(()),
    }
}

/// Evaluates `f_l(w)`.
pub fn penalty_value(spec: &PenaltySpec, w: &[f64]) -> Result<f64, PenaltyError> {
    spec.validate()?;
    check_finite(w)?;
    Ok(w.iter().map(|&wm| spec.value_component(wm)).sum())
}

/// Evaluates `∂f_l/∂w` elementwise.
pub fn penalty_gradient(spec: &PenaltySpec, w: &[f64]) -> Result<PenaltyGradient, PenaltyError> {
    spec.validate()?;
    check_finite(w)?;
    Ok(PenaltyGradient(
        w.iter().map(|&wm| spec.gradient_component(wm)).collect(),
    ))
}
