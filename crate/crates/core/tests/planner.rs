use approx::assert_abs_diff_eq;
use mtp_core::baselines::{mppi_step, ps_step, MppiConfig, PsConfig};
use mtp_core::env::{DoubleIntegrator, DoubleIntegratorParams, Pendulum, PendulumParams};
use mtp_core::planner::{initial_distribution, plan_step, softmax_weights};
use mtp_core::{Environment, GaussianControlDistribution, Interpolation, PlannerConfig, PlannerRng};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

const SAMPLES: usize = 32;
const HORIZON: usize = 15;
const STD: f64 = 0.7;

fn corner_config(elites: usize) -> PlannerConfig {
    PlannerConfig {
        layers: 4,
        nodes: 8,
        samples: SAMPLES,
        horizon: HORIZON,
        mixing: 0.0,
        elites,
        temperature: 0.5,
        smoothing: 0.0,
        min_std: 0.05,
        init_std: STD,
        interpolation: Interpolation::Akima,
        adapt_std: false,
        softmax: true,
    }
}

fn random_state(env: &impl Environment, rng: &mut PlannerRng) -> Vec<f64> {
    (0..env.state_dim()).map(|_| rng.random_range(-1.5..1.5)).collect()
}

/// Runs `steps` receding iterations of MTP and a baseline side by side from the
/// same random states, with both planners drawing from identical RNG streams.
fn corner_run<E: Environment + Clone>(
    env: &E,
    cfg: &PlannerConfig,
    steps: usize,
    baseline: impl Fn(&[f64], &GaussianControlDistribution, &[E], &mut PlannerRng) -> GaussianControlDistribution,
) {
    let models = vec![env.clone()];
    let mut mtp = initial_distribution(HORIZON, env.control_limits(), STD);
    let mut base = mtp.clone();
    let mut states = PlannerRng::seed_from_u64(99);
    for step in 0..steps {
        let x = random_state(env, &mut states);
        let mut r1 = PlannerRng::seed_from_u64(step as u64);
        let mut r2 = r1.clone();
        let (_, next, _) = plan_step(&x, &mtp, cfg, &models, &mut r1).unwrap();
        let b = baseline(&x, &base, &models, &mut r2);
        assert_eq!(next.mean, b.mean, "mean differs at step {step}");
        assert_eq!(next.std, b.std, "std differs at step {step}");
        mtp = next;
        base = b;
        mtp.shift(1);
        base.shift(1);
    }
}

#[test]
fn single_elite_without_mixing_is_predictive_sampling() {
    let env = DoubleIntegrator::new(DoubleIntegratorParams::default()).unwrap();
    let ps = PsConfig {
        samples: SAMPLES,
        horizon: HORIZON,
        std: STD,
    };
    corner_run(&env, &corner_config(1), 50, |x, d, m, r| {
        ps_step(x, d, &ps, m, r).unwrap().1
    });
}

#[test]
fn all_elites_with_fixed_std_is_mppi() {
    let env = Pendulum::new(PendulumParams::default()).unwrap();
    let mppi = MppiConfig {
        samples: SAMPLES,
        horizon: HORIZON,
        temperature: 0.5,
        std: STD,
    };
    corner_run(&env, &corner_config(SAMPLES), 50, |x, d, m, r| {
        mppi_step(x, d, &mppi, m, r).unwrap().1
    });
}

#[test]
fn two_elite_weights_match_closed_form() {
    let lambda = 0.3;
    let w = softmax_weights(&[0.0, lambda * 2f64.ln()], lambda).unwrap();
    assert_abs_diff_eq!(w[0], 2.0 / 3.0, epsilon = 1e-12);
    assert_abs_diff_eq!(w[1], 1.0 / 3.0, epsilon = 1e-12);
}

#[test]
fn softmax_survives_extreme_magnitudes() {
    let w = softmax_weights(&[1e300, -1e300, 0.0, f64::INFINITY], 1e-3).unwrap();
    assert_eq!(w, vec![0.0, 1.0, 0.0, 0.0]);
    assert!(softmax_weights(&[f64::INFINITY; 3], 1.0).is_none());
}

#[test]
fn mixing_one_keeps_nominal_last_and_samples_tensor_rows() {
    let env = DoubleIntegrator::new(DoubleIntegratorParams::default()).unwrap();
    let cfg = PlannerConfig {
        mixing: 1.0,
        ..corner_config(4)
    };
    assert_eq!(cfg.tensor_count(), SAMPLES - 1);
    let dist = initial_distribution(HORIZON, env.control_limits(), STD);
    let mut rng = PlannerRng::seed_from_u64(5);
    let (u, next, diag) = plan_step(&env.initial_state(), &dist, &cfg, std::slice::from_ref(&env), &mut rng).unwrap();
    assert_eq!(diag.costs.len(), SAMPLES);
    assert!(env.control_limits().contains(&u));
    assert!(next.std.iter().all(|&s| s == STD));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn softmax_weights_lie_on_the_simplex(
        costs in prop::collection::vec(
            prop_oneof![-1e300..1e300f64, -10.0..10.0f64, Just(f64::INFINITY)],
            1..16,
        ),
        lambda in 1e-6..1e3f64,
    ) {
        match softmax_weights(&costs, lambda) {
            None => prop_assert!(costs.iter().all(|c| !c.is_finite())),
            Some(w) => {
                prop_assert!(w.iter().all(|v| v.is_finite() && *v >= 0.0 && *v <= 1.0));
                prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                let best = costs.iter().copied().fold(f64::INFINITY, f64::min);
                let i = costs.iter().position(|&c| c == best).unwrap();
                prop_assert!(w[i] >= 1.0 / costs.len() as f64 - 1e-12);
            }
        }
    }
}
