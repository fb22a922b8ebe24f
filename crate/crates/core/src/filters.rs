//! Adaptive FIR filters as per-sample state transitions.
//!
//! Every algorithm follows the same model:
//!
//! ```text
//! y(i) = w(i-1)ᵀ x(i)
//! e(i) = d(i) - y(i)
//! ```
//!
//! and differs only in how `w(i)` is formed. Set-membership (SM) variants
//! update only when `|e(i)| > γ` and pick the step so that the a posteriori
//! error lands exactly on the bound, `|d(i) - w(i)ᵀx(i)| = γ`.
//!
//! The penalized SM step ([`adp_step`]) subtracts a zero attractor
//! `ρ(i) p_f(i)` with `ρ(i) = μ(i) α(i)` and `p_f` the penalty gradient at
//! `w(i-1)`:
//!
//! ```text
//! μ(i)   = e (1 - γ/|e|) / (e ‖x‖² - α(i) p_fᵀx)
//! w(i)   = w(i-1) + μ(i) e x - μ(i) α(i) p_f
//! α(i+1) = e (γ/|e| + μ(i) ‖x‖² - 1) / (μ(i) p_fᵀx)
//! ```
//!
//! With `α = 0` this is exactly SM-NLMS. Note that feeding the same `p_fᵀx`
//! into both formulas returns `α(i+1) = α(i)`, so [`AlphaMode`] selects what
//! is fed into the `α` recursion.

use log::debug;
use thiserror::Error;

use crate::penalty::{PenaltyError, PenaltySpec, DEFAULT_BETA, DEFAULT_EPSILON_PRIME};

/// Denominator magnitude below which a ratio is treated as degenerate.
pub const DEFAULT_DENOM_GUARD: f64 = 1e-12;

/// An adjustable step is rejected when it exceeds the SM-NLMS step by this factor.
pub const STEP_SIZE_RATIO_LIMIT: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("dimension mismatch: filter has {expected} taps, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("regressor has zero energy but |e| = {error} exceeds the bound")]
    DegenerateRegressor { error: f64 },
    #[error("filter diverged: non-finite weight at tap {tap}")]
    Divergence { tap: usize },
    #[error("invalid filter configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
}

pub type Result<T> = std::result::Result<T, FilterError>;

/// Adaptive coefficient vector `w(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterWeights(Vec<f64>);

impl FilterWeights {
    pub fn zeros(taps: usize) -> Self {
        FilterWeights(vec![0.0; taps])
    }

    pub fn from_vec(w: Vec<f64>) -> Self {
        FilterWeights(w)
    }

    pub fn as_slice(&self) -> &[f64] {
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

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.0.len() {
            return Err(FilterError::DimensionMismatch {
                expected: self.0.len(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Builds `w + δ` where `δ_m = delta(m)`, rejecting non-finite results.
    fn updated(&self, delta: impl Fn(usize) -> f64) -> Result<FilterWeights> {
        let mut next = Vec::with_capacity(self.0.len());
        for (m, &wm) in self.0.iter().enumerate() {
            let v = wm + delta(m);
            if !v.is_finite() {
                return Err(FilterError::Divergence { tap: m });
            }
            next.push(v);
        }
        Ok(FilterWeights(next))
    }
}

/// One data pair: regressor `x(i)` and desired response `d(i)`.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub x: &'a [f64],
    pub d: f64,
}

impl<'a> Sample<'a> {
    pub fn new(x: &'a [f64], d: f64) -> Self {
        Sample { x, d }
    }

    pub fn energy(&self) -> f64 {
        dot(self.x, self.x)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub updated: bool,
    /// Step size `μ(i)`; zero when no update took place.
    pub mu: f64,
    /// Attractor strength `ρ(i) = μ(i) α(i)`.
    pub rho: f64,
    pub e_prior: f64,
    /// Error with the returned weights. Equals `e_prior` when not updated.
    pub e_post: f64,
    pub alpha_next: f64,
    /// A step-size or `α` guard replaced the closed-form value.
    pub guard_fired: bool,
}

impl StepOutcome {
    fn idle(e: f64, alpha: f64) -> Self {
        StepOutcome {
            updated: false,
            mu: 0.0,
            rho: 0.0,
            e_prior: e,
            e_post: e,
            alpha_next: alpha,
            guard_fired: false,
        }
    }
}

/// `e(i) = d(i) - wᵀx(i)`.
pub fn a_priori_error(weights: &FilterWeights, sample: &Sample<'_>) -> Result<f64> {
    weights.check_dim(sample.x)?;
    Ok(sample.d - dot(weights.as_slice(), sample.x))
}

/// SM-NLMS step size: `(1 - γ/|e|)/‖x‖²` when `|e| > γ`, else zero.
pub fn sm_step_size(e: f64, gamma: f64, x_norm_sq: f64) -> Result<f64> {
    if e.abs() <= gamma {
        return Ok(0.0);
    }
    if x_norm_sq <= 0.0 {
        return Err(FilterError::DegenerateRegressor { error: e });
    }
    Ok((1.0 - gamma / e.abs()) / x_norm_sq)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(FilterError::InvalidConfig(format!(
            "error bound must be finite and positive, got {gamma}"
        )))
    }
}

/// Set-membership NLMS.
pub fn sm_nlms_step(
    weights: &FilterWeights,
    sample: &Sample<'_>,
    gamma: f64,
) -> Result<(FilterWeights, StepOutcome)> {
    let e = a_priori_error(weights, sample)?;
    if e.abs() <= gamma {
        return Ok((weights.clone(), StepOutcome::idle(e, 0.0)));
    }
    let mu = sm_step_size(e, gamma, sample.energy())?;
    let next = weights.updated(|m| mu * e * sample.x[m])?;
    let e_post = sample.d - dot(next.as_slice(), sample.x);
    Ok((
        next,
        StepOutcome {
            updated: true,
            mu,
            rho: 0.0,
            e_prior: e,
            e_post,
            alpha_next: 0.0,
            guard_fired: false,
        },
    ))
}

/// Step size chosen by [`adp_step_size`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveStep {
    pub mu: f64,
    /// The closed form was rejected and the SM-NLMS step used instead.
    pub fallback: bool,
}

/// Step size of the penalized SM update.
///
/// Falls back to [`sm_step_size`] when the denominator is smaller than
/// `denom_guard`, or the closed form is negative or more than
/// [`STEP_SIZE_RATIO_LIMIT`] times the SM-NLMS step. Callers gate on `|e| > γ`.
pub fn adp_step_size(
    e: f64,
    gamma: f64,
    x_norm_sq: f64,
    alpha: f64,
    grad_dot_x: f64,
    denom_guard: f64,
) -> Result<AdaptiveStep> {
    let sm = sm_step_size(e, gamma, x_norm_sq)?;
    let denom = e * x_norm_sq - alpha * grad_dot_x;
    if denom.abs() >= denom_guard {
        let mu = e * (1.0 - gamma / e.abs()) / denom;
        if mu.is_finite() && mu >= 0.0 && mu <= STEP_SIZE_RATIO_LIMIT * sm {
            return Ok(AdaptiveStep {
                mu,
                fallback: false,
            });
        }
    }
    Ok(AdaptiveStep {
        mu: sm,
        fallback: true,
    })
}

/// Unclamped-then-clamped regularization recursion.
///
/// Returns `None` when `|μ p_fᵀx| < denom_guard`; the caller then keeps its
/// current `α`. The result is clamped to `[-alpha_max, alpha_max]`.
pub fn alpha_update(
    e: f64,
    gamma: f64,
    mu: f64,
    x_norm_sq: f64,
    grad_dot_x: f64,
    alpha_max: f64,
    denom_guard: f64,
) -> Option<f64> {
    let denom = mu * grad_dot_x;
    if denom.abs() < denom_guard || e == 0.0 {
        return None;
    }
    let raw = e * (gamma / e.abs() + mu * x_norm_sq - 1.0) / denom;
    if !raw.is_finite() {
        return None;
    }
    Some(raw.clamp(-alpha_max, alpha_max))
}

/// How `α(i+1)` is obtained after an update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaMode {
    /// Recursion with the penalty gradient re-evaluated at the updated weights.
    #[default]
    PosteriorGradient,
    /// Recursion with the a posteriori error in place of the a priori one.
    PosteriorError,
    /// `α` never changes: the fixed-penalty algorithms.
    Frozen,
}

/// State of a penalized set-membership filter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdpState {
    pub weights: FilterWeights,
    pub alpha: f64,
    pub penalty: PenaltySpec,
    pub gamma: f64,
    pub alpha_max: f64,
    pub alpha_mode: AlphaMode,
    /// Clamp `α` to `[0, alpha_max]` instead of `[-alpha_max, alpha_max]`.
    pub nonnegative_alpha: bool,
    pub denom_guard: f64,
}

impl AdpState {
    pub fn new(
        taps: usize,
        penalty: PenaltySpec,
        gamma: f64,
        alpha0: f64,
        alpha_max: f64,
        alpha_mode: AlphaMode,
    ) -> Result<Self> {
        penalty.validate()?;
        check_gamma(gamma)?;
        if !(alpha_max.is_finite() && alpha_max > 0.0) {
            return Err(FilterError::InvalidConfig(format!(
                "alpha_max must be finite and positive, got {alpha_max}"
            )));
        }
        if !(0.0..=alpha_max).contains(&alpha0) {
            return Err(FilterError::InvalidConfig(format!(
                "alpha0 = {alpha0} outside [0, {alpha_max}]"
            )));
        }
        Ok(AdpState {
            weights: FilterWeights::zeros(taps),
            alpha: alpha0,
            penalty,
            gamma,
            alpha_max,
            alpha_mode,
            nonnegative_alpha: false,
            denom_guard: DEFAULT_DENOM_GUARD,
        })
    }

    fn clamp_alpha(&self, a: f64) -> f64 {
        let lo = if self.nonnegative_alpha {
            0.0
        } else {
            -self.alpha_max
        };
        a.clamp(lo, self.alpha_max)
    }
}

/// ZA-SM-NLMS-ADP: `l1` attractor with adjustable penalty.
pub fn make_za_adp(taps: usize, gamma: f64, alpha0: f64, alpha_max: f64) -> Result<AdpState> {
    AdpState::new(
        taps,
        PenaltySpec::L1,
        gamma,
        alpha0,
        alpha_max,
        AlphaMode::PosteriorGradient,
    )
}

/// RZA-SM-NLMS-ADP: log-sum (reweighted) attractor with adjustable penalty.
pub fn make_rza_adp(
    taps: usize,
    gamma: f64,
    alpha0: f64,
    alpha_max: f64,
    eps_prime: f64,
) -> Result<AdpState> {
    AdpState::new(
        taps,
        PenaltySpec::log_sum(eps_prime)?,
        gamma,
        alpha0,
        alpha_max,
        AlphaMode::PosteriorGradient,
    )
}

/// EZA-SM-NLMS-ADP: exponential `l0`-surrogate attractor with adjustable penalty.
pub fn make_eza_adp(
    taps: usize,
    gamma: f64,
    alpha0: f64,
    alpha_max: f64,
    beta: f64,
) -> Result<AdpState> {
    AdpState::new(
        taps,
        PenaltySpec::exp_l0(beta)?,
        gamma,
        alpha0,
        alpha_max,
        AlphaMode::PosteriorGradient,
    )
}

/// Default penalty for each attractor family.
pub fn default_penalty(kind: AttractorKind) -> PenaltySpec {
    match kind {
        AttractorKind::Za => PenaltySpec::L1,
        AttractorKind::Rza => PenaltySpec::LogSum {
            epsilon_prime: DEFAULT_EPSILON_PRIME,
        },
        AttractorKind::Eza => PenaltySpec::ExpL0 { beta: DEFAULT_BETA },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttractorKind {
    Za,
    Rza,
    Eza,
}

/// One penalized set-membership update.
///
/// Returns the next state; the input state is never modified, so an error
/// leaves the caller's state intact.
pub fn adp_step(state: &AdpState, sample: &Sample<'_>) -> Result<(AdpState, StepOutcome)> {
    let e = a_priori_error(&state.weights, sample)?;
    if e.abs() <= state.gamma {
        return Ok((state.clone(), StepOutcome::idle(e, state.alpha)));
    }
    let penalty = state.penalty;
    let w = state.weights.as_slice();
    let x_norm_sq = sample.energy();
    let grad_dot_x = penalty.gradient_dot(w, sample.x);
    let step = adp_step_size(
        e,
        state.gamma,
        x_norm_sq,
        state.alpha,
        grad_dot_x,
        state.denom_guard,
    )?;
    let mu = step.mu;
    let rho = mu * state.alpha;
    let next_w = state
        .weights
        .updated(|m| mu * e * sample.x[m] - rho * penalty.gradient_component(w[m]))?;
    let e_post = sample.d - dot(next_w.as_slice(), sample.x);

    // The recursion's numerator equals α μ p_fᵀx only for the closed-form step,
    // and carries no information when the attractor was inactive.
    let informative = !step.fallback && (mu * grad_dot_x).abs() >= state.denom_guard;
    let proposed = match state.alpha_mode {
        AlphaMode::Frozen => None,
        _ if !informative => None,
        AlphaMode::PosteriorGradient => {
            let g_post = penalty.gradient_dot(next_w.as_slice(), sample.x);
            alpha_update(
                e,
                state.gamma,
                mu,
                x_norm_sq,
                g_post,
                state.alpha_max,
                state.denom_guard,
            )
        }
        AlphaMode::PosteriorError => alpha_update(
            e_post,
            state.gamma,
            mu,
            x_norm_sq,
            grad_dot_x,
            state.alpha_max,
            state.denom_guard,
        ),
    };
    let alpha_guard = state.alpha_mode != AlphaMode::Frozen && informative && proposed.is_none();
    let alpha_next = state.clamp_alpha(proposed.unwrap_or(state.alpha));

    let next = AdpState {
        weights: next_w,
        alpha: alpha_next,
        ..state.clone()
    };
    Ok((
        next,
        StepOutcome {
            updated: true,
            mu,
            rho,
            e_prior: e,
            e_post,
            alpha_next,
            guard_fired: step.fallback || alpha_guard,
        },
    ))
}

/// Normalized LMS; always updates.
pub fn nlms_step(
    weights: &FilterWeights,
    sample: &Sample<'_>,
    mu_bar: f64,
    delta_reg: f64,
) -> Result<(FilterWeights, StepOutcome)> {
    let e = a_priori_error(weights, sample)?;
    let scale = mu_bar * e / (sample.energy() + delta_reg);
    let next = weights.updated(|m| scale * sample.x[m])?;
    let e_post = sample.d - dot(next.as_slice(), sample.x);
    Ok((
        next,
        StepOutcome {
            updated: true,
            mu: mu_bar,
            rho: 0.0,
            e_prior: e,
            e_post,
            alpha_next: 0.0,
            guard_fired: false,
        },
    ))
}

/// Proportionate NLMS parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnlmsParams {
    pub mu: f64,
    /// Proportionality floor relative to the largest coefficient.
    pub rho_prop: f64,
    /// Floor used while all coefficients are still small.
    pub delta_p: f64,
    pub delta_reg: f64,
}

impl Default for PnlmsParams {
    fn default() -> Self {
        PnlmsParams {
            mu: 0.5,
            rho_prop: 0.01,
            delta_p: 0.01,
            delta_reg: 1e-8,
        }
    }
}

impl PnlmsParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mu", self.mu),
            ("rho_prop", self.rho_prop),
            ("delta_p", self.delta_p),
            ("delta_reg", self.delta_reg),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(FilterError::InvalidConfig(format!(
                    "PNLMS {name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Normalized proportionate gains `g_m`, averaging to one.
pub fn pnlms_gains(w: &[f64], params: &PnlmsParams) -> Vec<f64> {
    let max_abs = w.iter().fold(params.delta_p, |acc, v| acc.max(v.abs()));
    let floor = params.rho_prop * max_abs;
    let raw: Vec<f64> = w.iter().map(|v| floor.max(v.abs())).collect();
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    raw.into_iter().map(|g| g / mean).collect()
}

pub fn pnlms_step(
    weights: &FilterWeights,
    sample: &Sample<'_>,
    params: &PnlmsParams,
) -> Result<(FilterWeights, StepOutcome)> {
    let e = a_priori_error(weights, sample)?;
    let gains = pnlms_gains(weights.as_slice(), params);
    let gx: Vec<f64> = gains.iter().zip(sample.x).map(|(g, x)| g * x).collect();
    let scale = params.mu * e / (dot(sample.x, &gx) + params.delta_reg);
    let next = weights.updated(|m| scale * gx[m])?;
    let e_post = sample.d - dot(next.as_slice(), sample.x);
    Ok((
        next,
        StepOutcome {
            updated: true,
            mu: params.mu,
            rho: 0.0,
            e_prior: e,
            e_post,
            alpha_next: 0.0,
            guard_fired: false,
        },
    ))
}

/// SM-NLMS restricted to a known support.
///
/// Taps outside `support_mask` are never touched; the step is normalized by
/// the regressor energy on the support so the bound still holds exactly.
pub fn oracle_sm_nlms_step(
    weights: &FilterWeights,
    sample: &Sample<'_>,
    gamma: f64,
    support_mask: &[bool],
) -> Result<(FilterWeights, StepOutcome)> {
    if support_mask.len() != weights.len() {
        return Err(FilterError::DimensionMismatch {
            expected: weights.len(),
            got: support_mask.len(),
        });
    }
    let e = a_priori_error(weights, sample)?;
    if e.abs() <= gamma {
        return Ok((weights.clone(), StepOutcome::idle(e, 0.0)));
    }
    let masked_energy: f64 = sample
        .x
        .iter()
        .zip(support_mask)
        .filter(|(_, &on)| on)
        .map(|(x, _)| x * x)
        .sum();
    if masked_energy <= 0.0 {
        debug!("oracle SM-NLMS: |e| = {e} exceeds bound but support carries no energy");
        return Ok((weights.clone(), StepOutcome::idle(e, 0.0)));
    }
    let mu = sm_step_size(e, gamma, masked_energy)?;
    let next = weights.updated(|m| {
        if support_mask[m] {
            mu * e * sample.x[m]
        } else {
            0.0
        }
    })?;
    let e_post = sample.d - dot(next.as_slice(), sample.x);
    Ok((
        next,
        StepOutcome {
            updated: true,
            mu,
            rho: 0.0,
            e_prior: e,
            e_post,
            alpha_next: 0.0,
            guard_fired: false,
        },
    ))
}

/// Common interface used by the experiment runner.
pub trait AdaptiveFilter: Send {
    fn step(&mut self, sample: &Sample<'_>) -> Result<StepOutcome>;
    fn weights(&self) -> &[f64];
}

#[derive(Debug, Clone)]
pub struct Nlms {
    pub weights: FilterWeights,
    pub mu_bar: f64,
    pub delta_reg: f64,
}

#[derive(Debug, Clone)]
pub struct Pnlms {
    pub weights: FilterWeights,
    pub params: PnlmsParams,
}

#[derive(Debug, Clone)]
pub struct SmNlms {
    pub weights: FilterWeights,
    pub gamma: f64,
}

#[derive(Debug, Clone)]
pub struct OracleSmNlms {
    pub weights: FilterWeights,
    pub gamma: f64,
    pub support_mask: Vec<bool>,
}

impl AdaptiveFilter for Nlms {
    fn step(&mut self, sample: &Sample<'_>) -> Result<StepOutcome> {
        let (w, out) = nlms_step(&self.weights, sample, self.mu_bar, self.delta_reg)?;
        self.weights = w;
        Ok(out)
    }
    fn weights(&self) -> &[f64] {
        self.weights.as_slice()
    }
}

impl AdaptiveFilter for Pnlms {
    fn step(&mut self, sample: &Sample<'_>) -> Result<StepOutcome> {
        let (w, out) = pnlms_step(&self.weights, sample, &self.params)?;
        self.weights = w;
        Ok(out)
    }
    fn weights(&self) -> &[f64] {
        self.weights.as_slice()
    }
}

impl AdaptiveFilter for SmNlms {
    fn step(&mut self, sample: &Sample<'_>) -> Result<StepOutcome> {
        let (w, out) = sm_nlms_step(&self.weights, sample, self.gamma)?;
        self.weights = w;
        Ok(out)
    }
    fn weights(&self) -> &[f64] {
        self.weights.as_slice()
    }
}

impl AdaptiveFilter for OracleSmNlms {
    fn step(&mut self, sample: &Sample<'_>) -> Result<StepOutcome> {
        let (w, out) = oracle_sm_nlms_step(&self.weights, sample, self.gamma, &self.support_mask)?;
        self.weights = w;
        Ok(out)
    }
    fn weights(&self) -> &[f64] {
        self.weights.as_slice()
    }
}

impl AdaptiveFilter for AdpState {
    fn step(&mut self, sample: &Sample<'_>) -> Result<StepOutcome> {
        let (next, out) = adp_step(self, sample)?;
        *self = next;
        Ok(out)
    }
    fn weights(&self) -> &[f64] {
        self.weights.as_slice()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn w(v: &[f64]) -> FilterWeights {
        FilterWeights::from_vec(v.to_vec())
    }

    #[test]
    fn a_priori_error_examples() {
        let x = [1.0, 2.0];
        assert_eq!(
            a_priori_error(&w(&[0.0, 0.0]), &Sample::new(&x, 3.0)).unwrap(),
            3.0
        );
        assert_eq!(
            a_priori_error(&w(&[1.0, 1.0]), &Sample::new(&x, 3.0)).unwrap(),
            0.0
        );
        let e = a_priori_error(&w(&[0.5]), &Sample::new(&[2.0], 0.3)).unwrap();
        assert!(close(e, -0.7, 1e-15));
    }

    #[test]
    fn a_priori_error_rejects_length_mismatch() {
        let err = a_priori_error(&w(&[0.0; 3]), &Sample::new(&[1.0, 2.0], 0.0)).unwrap_err();
        assert!(matches!(
            err,
            FilterError::DimensionMismatch {
                expected: 3,
                got: 2
            }
        ));
    }

    #[test]
    fn sm_step_size_examples() {
        assert_eq!(sm_step_size(0.05, 0.0894, 3.0).unwrap(), 0.0);
        assert_eq!(sm_step_size(2.0, 1.0, 1.0).unwrap(), 0.5);
        assert_eq!(sm_step_size(1.0, 0.0, 2.0).unwrap(), 0.5);
        assert!(matches!(
            sm_step_size(1.0, 0.1, 0.0),
            Err(FilterError::DegenerateRegressor { .. })
        ));
        // Inside the bound a zero regressor is fine.
        assert_eq!(sm_step_size(0.01, 0.1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn sm_nlms_step_examples() {
        let (next, out) =
            sm_nlms_step(&w(&[0.0, 0.0]), &Sample::new(&[1.0, 0.0], 1.0), 0.5).unwrap();
        assert_eq!(next.as_slice(), &[0.5, 0.0]);
        assert!(out.updated);
        assert!(close(out.e_post, 0.5, 1e-15));

        let (next, out) =
            sm_nlms_step(&w(&[0.0, 0.0]), &Sample::new(&[1.0, 0.0], 0.3), 0.5).unwrap();
        assert_eq!(next.as_slice(), &[0.0, 0.0]);
        assert!(!out.updated);
        assert_eq!(out.mu, 0.0);

        let (next, out) = sm_nlms_step(&w(&[1.0]), &Sample::new(&[1.0], 1.0), 0.1).unwrap();
        assert_eq!(next.as_slice(), &[1.0]);
        assert!(!out.updated);
    }

    #[test]
    fn adp_step_size_examples() {
        let s = adp_step_size(2.0, 1.0, 1.0, 0.0, 0.0, DEFAULT_DENOM_GUARD).unwrap();
        assert_eq!(
            s,
            AdaptiveStep {
                mu: 0.5,
                fallback: false
            }
        );
        let s = adp_step_size(2.0, 1.0, 1.0, 0.5, 1.0, DEFAULT_DENOM_GUARD).unwrap();
        assert!(close(s.mu, 1.0 / 1.5, 1e-12));
        let s = adp_step_size(0.5, 0.1, 1.0, 0.01, 1.0, DEFAULT_DENOM_GUARD).unwrap();
        assert!(close(s.mu, 0.4 / 0.49, 1e-12));
        assert!(!s.fallback);
    }

    #[test]
    fn adp_step_size_guard() {
        // Zero denominator.
        let s = adp_step_size(1.0, 0.5, 1.0, 1.0, 1.0, DEFAULT_DENOM_GUARD).unwrap();
        assert_eq!(
            s,
            AdaptiveStep {
                mu: 0.5,
                fallback: true
            }
        );
        // Negative closed form.
        let s = adp_step_size(1.0, 0.5, 1.0, 2.0, 1.0, DEFAULT_DENOM_GUARD).unwrap();
        assert!(s.fallback);
        assert_eq!(s.mu, 0.5);
        // More than ten times the SM step.
        let s = adp_step_size(1.0, 0.5, 1.0, 0.95, 1.0, DEFAULT_DENOM_GUARD).unwrap();
        assert!(s.fallback);
    }

    #[test]
    fn alpha_update_examples() {
        let a = alpha_update(2.0, 1.0, 0.5, 1.0, 1.0, 1e-3, DEFAULT_DENOM_GUARD).unwrap();
        assert_eq!(a, 0.0);
        let a = alpha_update(2.0, 1.0, 0.6, 1.0, 1.0, 1.0, DEFAULT_DENOM_GUARD).unwrap();
        assert!(close(a, 1.0 / 3.0, 1e-12));
        let a = alpha_update(2.0, 1.0, 0.6, 1.0, 1.0, 1e-3, DEFAULT_DENOM_GUARD).unwrap();
        assert_eq!(a, 1e-3);
        let a = alpha_update(-2.0, 1.0, 0.6, 1.0, 1.0, 1e-3, DEFAULT_DENOM_GUARD).unwrap();
        assert_eq!(a, -1e-3);
        assert!(alpha_update(2.0, 1.0, 0.6, 1.0, 0.0, 1.0, DEFAULT_DENOM_GUARD).is_none());
    }

    #[test]
    fn adp_step_hand_computed() {
        let mut st = AdpState::new(1, PenaltySpec::L1, 0.1, 0.01, 1.0, AlphaMode::Frozen).unwrap();
        st.weights = w(&[0.5]);
        let (next, out) = adp_step(&st, &Sample::new(&[1.0], 1.0)).unwrap();
        // e = 0.5, p·x = 1, μ = 0.4 / 0.49.
        assert!(close(out.mu, 0.816_326_530_612_244_9, 1e-12));
        assert!(close(next.weights.as_slice()[0], 0.9, 1e-12));
        assert!(close(out.e_post, 0.1, 1e-12));
        assert!(close(out.rho, out.mu * 0.01, 1e-15));
        assert_eq!(next.alpha, 0.01);
        assert!(!out.guard_fired);
    }

    #[test]
    fn adp_from_zero_weights_matches_sm_nlms() {
        let x = [0.3, -1.2, 0.7];
        let s = Sample::new(&x, 2.0);
        let (sm, sm_out) = sm_nlms_step(&FilterWeights::zeros(3), &s, 0.2).unwrap();
        for kind in [AttractorKind::Za, AttractorKind::Rza, AttractorKind::Eza] {
            for mode in [
                AlphaMode::PosteriorGradient,
                AlphaMode::PosteriorError,
                AlphaMode::Frozen,
            ] {
                let st = AdpState::new(3, default_penalty(kind), 0.2, 5e-4, 1e-3, mode).unwrap();
                let (next, out) = adp_step(&st, &s).unwrap();
                assert_eq!(next.weights, sm, "{kind:?} {mode:?}");
                assert_eq!(out.mu, sm_out.mu);
                assert_eq!(next.alpha, 5e-4);
            }
        }
    }

    #[test]
    fn adp_inside_bound_keeps_alpha_and_weights() {
        let mut st = make_eza_adp(2, 0.5, 2e-4, 1e-3, 5.0).unwrap();
        st.weights = w(&[0.2, 0.1]);
        let (next, out) = adp_step(&st, &Sample::new(&[1.0, 1.0], 0.4)).unwrap();
        assert_eq!(next, st);
        assert!(!out.updated);
        assert_eq!(out.alpha_next, 2e-4);
    }

    #[test]
    fn adp_state_validation() {
        assert!(AdpState::new(2, PenaltySpec::L1, 0.0, 0.0, 1e-3, AlphaMode::Frozen).is_err());
        assert!(AdpState::new(2, PenaltySpec::L1, 0.1, 2e-3, 1e-3, AlphaMode::Frozen).is_err());
        assert!(AdpState::new(2, PenaltySpec::L1, 0.1, 0.0, 0.0, AlphaMode::Frozen).is_err());
        assert!(make_rza_adp(2, 0.1, 0.0, 1e-3, 0.0).is_err());
        assert!(make_eza_adp(2, 0.1, 0.0, 1e-3, -1.0).is_err());
    }

    #[test]
    fn nonnegative_alpha_clamp() {
        let mut st = make_za_adp(1, 0.1, 1e-4, 1e-3).unwrap();
        assert_eq!(st.clamp_alpha(-5.0), -1e-3);
        st.nonnegative_alpha = true;
        assert_eq!(st.clamp_alpha(-5.0), 0.0);
        assert_eq!(st.clamp_alpha(5.0), 1e-3);
    }

    #[test]
    fn nlms_examples() {
        let (next, out) = nlms_step(&w(&[0.0]), &Sample::new(&[1.0], 1.0), 0.5, 0.0).unwrap();
        assert_eq!(next.as_slice(), &[0.5]);
        assert!(out.updated);
        let (next, _) =
            nlms_step(&w(&[0.3, 0.1]), &Sample::new(&[0.0, 0.0], 1.0), 0.5, 1e-8).unwrap();
        assert_eq!(next.as_slice(), &[0.3, 0.1]);
    }

    #[test]
    fn pnlms_gain_examples() {
        let g = pnlms_gains(&[1.0, 0.0], &PnlmsParams::default());
        assert!(close(g[0], 1.980198, 1e-6));
        assert!(close(g[1], 0.019802, 1e-6));
        assert!(close(g.iter().sum::<f64>(), 2.0, 1e-12));
    }

    #[test]
    fn pnlms_with_equal_weights_is_nlms() {
        let params = PnlmsParams::default();
        let weights = w(&[0.4, 0.4, 0.4]);
        let s = Sample::new(&[0.2, -0.5, 1.1], 0.7);
        let (a, _) = pnlms_step(&weights, &s, &params).unwrap();
        let (b, _) = nlms_step(&weights, &s, params.mu, params.delta_reg).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn pnlms_params_validate() {
        assert!(PnlmsParams::default().validate().is_ok());
        let bad = PnlmsParams {
            rho_prop: 0.0,
            ..PnlmsParams::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn oracle_examples() {
        let x = [1.0, 1.0];
        let s = Sample::new(&x, 1.0);
        let (full, _) = oracle_sm_nlms_step(&w(&[0.0, 0.0]), &s, 0.1, &[true, true]).unwrap();
        let (sm, _) = sm_nlms_step(&w(&[0.0, 0.0]), &s, 0.1).unwrap();
        assert_eq!(full, sm);

        let (none, out) = oracle_sm_nlms_step(&w(&[0.0, 0.0]), &s, 0.1, &[false, false]).unwrap();
        assert_eq!(none.as_slice(), &[0.0, 0.0]);
        assert!(!out.updated);

        let (half, out) =
            oracle_sm_nlms_step(&w(&[0.0, 0.0]), &Sample::new(&x, 1.0), 0.5, &[true, false])
                .unwrap();
        assert_eq!(half.as_slice(), &[0.5, 0.0]);
        assert!(close(out.e_post, 0.5, 1e-15));

        assert!(matches!(
            oracle_sm_nlms_step(&w(&[0.0, 0.0]), &s, 0.1, &[true]),
            Err(FilterError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn divergence_is_reported() {
        let err = nlms_step(&w(&[0.0]), &Sample::new(&[1.0], 1.0), f64::INFINITY, 0.0).unwrap_err();
        assert!(matches!(err, FilterError::Divergence { tap: 0 }));
    }

    #[test]
    fn trait_objects_step_in_place() {
        let mut f: Box<dyn AdaptiveFilter> = Box::new(SmNlms {
            weights: FilterWeights::zeros(2),
            gamma: 0.5,
        });
        f.step(&Sample::new(&[1.0, 0.0], 1.0)).unwrap();
        assert_eq!(f.weights(), &[0.5, 0.0]);
    }
}
