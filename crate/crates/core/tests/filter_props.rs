use proptest::prelude::*;

use smadp_core::filters::{
    adp_step, adp_step_size, alpha_update, oracle_sm_nlms_step, sm_nlms_step, sm_step_size,
    AdpState, AlphaMode, FilterWeights, Sample, DEFAULT_DENOM_GUARD, STEP_SIZE_RATIO_LIMIT,
};
use smadp_core::penalty::PenaltySpec;

const TAPS: usize = 8;

fn penalty() -> impl Strategy<Value = PenaltySpec> {
    prop_oneof![
        Just(PenaltySpec::L1),
        Just(PenaltySpec::LogSum {
            epsilon_prime: 10.0
        }),
        Just(PenaltySpec::ExpL0 { beta: 5.0 }),
    ]
}

fn mode() -> impl Strategy<Value = AlphaMode> {
    prop_oneof![
        Just(AlphaMode::PosteriorGradient),
        Just(AlphaMode::PosteriorError),
        Just(AlphaMode::Frozen),
    ]
}

fn vector() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, TAPS)
}

/// A stream of `(x, d)` pairs with `x` away from zero energy.
fn stream(len: usize) -> impl Strategy<Value = Vec<(Vec<f64>, f64)>> {
    prop::collection::vec(
        (prop::collection::vec(-1.0f64..1.0, TAPS), -2.0f64..2.0)
            .prop_filter("regressor energy", |(x, _)| {
                x.iter().map(|v| v * v).sum::<f64>() > 1e-3
            }),
        len,
    )
}

fn adp(
    penalty: PenaltySpec,
    mode: AlphaMode,
    alpha0: f64,
    alpha_max: f64,
    w: Vec<f64>,
) -> AdpState {
    let mut st = AdpState::new(TAPS, penalty, 0.1, alpha0, alpha_max, mode).unwrap();
    st.weights = FilterWeights::from_vec(w);
    st
}

proptest! {
    #[test]
    fn sm_nlms_lands_on_the_bound(w in vector(), x in vector(), d in -3.0f64..3.0, gamma in 0.01f64..1.0) {
        prop_assume!(x.iter().map(|v| v * v).sum::<f64>() > 1e-3);
        let (_, out) = sm_nlms_step(&FilterWeights::from_vec(w), &Sample::new(&x, d), gamma).unwrap();
        if out.updated {
            prop_assert!((out.e_post.abs() - gamma).abs() <= 1e-9 * gamma);
            prop_assert_eq!(out.e_post.signum(), out.e_prior.signum());
        } else {
            prop_assert!(out.e_prior.abs() <= gamma);
        }
    }

    #[test]
    fn adp_lands_on_the_bound(
        penalty in penalty(), mode in mode(), w in vector(), x in vector(),
        d in -3.0f64..3.0, alpha in -1e-2f64..1e-2,
    ) {
        prop_assume!(x.iter().map(|v| v * v).sum::<f64>() > 1e-3);
        let mut st = adp(penalty, mode, 0.0, 1e-2, w);
        st.alpha = alpha;
        let (_, out) = adp_step(&st, &Sample::new(&x, d)).unwrap();
        if out.updated && !out.guard_fired {
            prop_assert!((out.e_post.abs() - st.gamma).abs() <= 1e-9 * st.gamma);
        }
    }

    #[test]
    fn oracle_lands_on_the_bound(w in vector(), x in vector(), d in -3.0f64..3.0, mask in prop::collection::vec(any::<bool>(), TAPS)) {
        let (next, out) = oracle_sm_nlms_step(&FilterWeights::from_vec(w.clone()), &Sample::new(&x, d), 0.1, &mask).unwrap();
        if out.updated {
            prop_assert!((out.e_post.abs() - 0.1).abs() <= 1e-9 * 0.1);
        }
        for m in 0..TAPS {
            if !mask[m] {
                prop_assert_eq!(next.as_slice()[m], w[m]);
            }
        }
    }

    #[test]
    fn inside_the_bound_nothing_changes(
        penalty in penalty(), mode in mode(), w in vector(), x in vector(),
        u in -1.0f64..=1.0, alpha in 0.0f64..1e-3,
    ) {
        let gamma = 0.1;
        let d = w.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + u * gamma;
        let st = adp(penalty, mode, alpha, 1e-3, w.clone());
        let s = Sample::new(&x, d);
        let e = d - w.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        prop_assume!(e.abs() <= gamma);
        let (next, out) = adp_step(&st, &s).unwrap();
        prop_assert_eq!(&next, &st);
        prop_assert!(!out.updated);
        let (next, _) = sm_nlms_step(&st.weights, &s, gamma).unwrap();
        prop_assert_eq!(&next, &st.weights);
    }

    #[test]
    fn zero_alpha_reproduces_sm_nlms(penalty in penalty(), mode in mode(), data in stream(60)) {
        let mut st = adp(penalty, mode, 0.0, 1e-3, vec![0.0; TAPS]);
        let mut sm = FilterWeights::zeros(TAPS);
        for (x, d) in &data {
            let s = Sample::new(x, *d);
            let (next_sm, _) = sm_nlms_step(&sm, &s, st.gamma).unwrap();
            let (mut next, _) = adp_step(&st, &s).unwrap();
            next.alpha = 0.0;
            let norm = next_sm.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            let diff = next_sm.as_slice().iter().zip(next.weights.as_slice())
                .map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            prop_assert!(diff <= 1e-12 * norm);
            sm = next_sm;
            st = next;
        }
    }

    #[test]
    fn alpha_recursion_fixed_point(
        gamma in 0.01f64..1.0, ratio in 1.05f64..10.0, positive in any::<bool>(),
        xn in 0.5f64..5.0, gdx in 0.1f64..5.0, alpha in 0.01f64..1.0, flip in any::<bool>(),
    ) {
        let e = if positive { ratio * gamma } else { -ratio * gamma };
        let alpha = if flip { -alpha } else { alpha };
        let step = adp_step_size(e, gamma, xn, alpha, gdx, DEFAULT_DENOM_GUARD).unwrap();
        prop_assume!(!step.fallback);
        let back = alpha_update(e, gamma, step.mu, xn, gdx, f64::MAX, DEFAULT_DENOM_GUARD).unwrap();
        prop_assert!((back - alpha).abs() <= 1e-10 * alpha.abs());
    }

    #[test]
    fn alpha_stays_bounded(
        penalty in penalty(), mode in mode(), alpha_max in 1e-4f64..1e-1, nonneg in any::<bool>(),
        data in stream(80),
    ) {
        let mut st = adp(penalty, mode, alpha_max / 10.0, alpha_max, vec![0.0; TAPS]);
        st.nonnegative_alpha = nonneg;
        for (x, d) in &data {
            let (next, out) = adp_step(&st, &Sample::new(x, *d)).unwrap();
            prop_assert!(next.alpha.abs() <= alpha_max);
            if nonneg {
                prop_assert!(next.alpha >= 0.0);
            }
            prop_assert_eq!(out.alpha_next, next.alpha);
            st = next;
        }
    }

    #[test]
    fn step_size_range(
        e in -5.0f64..5.0, gamma in 0.01f64..1.0, xn in 0.01f64..10.0,
        alpha in -1.0f64..1.0, gdx in -5.0f64..5.0,
    ) {
        prop_assume!(e.abs() > gamma);
        let sm = sm_step_size(e, gamma, xn).unwrap();
        let step = adp_step_size(e, gamma, xn, alpha, gdx, DEFAULT_DENOM_GUARD).unwrap();
        prop_assert!(step.mu >= 0.0);
        prop_assert!(step.mu <= STEP_SIZE_RATIO_LIMIT * sm * (1.0 + 1e-15));
    }
}
