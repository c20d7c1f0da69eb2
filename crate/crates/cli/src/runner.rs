//! Receding-horizon episodes for any configured environment and planner.

use mtp_core::baselines::{CemPlanner, MppiPlanner, PsPlanner};
use mtp_core::env::{DomainRandomizer, DoubleIntegrator, Navigation, Pendulum, ZeroCost, MAX_RANDOMIZATION_TRIES};
use mtp_core::{
    ControlLimits, Environment, GaussianControlDistribution, Interpolation, MtpPlanner, PlanOutput, Planner,
    PlannerConfig, PlannerRng, Randomizable, StepDiagnostics,
};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::CliError;

/// Environment plus the start-state handling the harness needs.
pub trait Task: Environment + Randomizable + Clone {
    /// Initial state with the start position jittered by `U(-width, width)`.
    fn jittered_start<R: Rng + ?Sized>(&self, width: f64, rng: &mut R) -> Result<Vec<f64>, CliError>;
}

fn jitter_entries<R: Rng + ?Sized>(x: &mut [f64], idx: std::ops::Range<usize>, width: f64, rng: &mut R) {
    if width > 0.0 {
        for i in idx {
            x[i] += rng.random_range(-width..width);
        }
    }
}

impl Task for Navigation {
    fn jittered_start<R: Rng + ?Sized>(&self, width: f64, rng: &mut R) -> Result<Vec<f64>, CliError> {
        if width <= 0.0 {
            return Ok(self.initial_state());
        }
        let s = self.layout().start;
        for _ in 0..MAX_RANDOMIZATION_TRIES {
            let p = [
                s[0] + rng.random_range(-width..width),
                s[1] + rng.random_range(-width..width),
            ];
            if let Ok(env) = self.with_start(p) {
                return Ok(env.initial_state());
            }
        }
        Err(CliError::Runtime("no free start position within the jitter box".into()))
    }
}

impl Task for DoubleIntegrator {
    fn jittered_start<R: Rng + ?Sized>(&self, width: f64, rng: &mut R) -> Result<Vec<f64>, CliError> {
        let mut x = self.initial_state();
        jitter_entries(&mut x, 0..self.control_dim(), width, rng);
        Ok(x)
    }
}

impl Task for Pendulum {
    fn jittered_start<R: Rng + ?Sized>(&self, width: f64, rng: &mut R) -> Result<Vec<f64>, CliError> {
        let mut x = self.initial_state();
        jitter_entries(&mut x, 0..1, width, rng);
        Ok(x)
    }
}

impl Task for ZeroCost {
    fn jittered_start<R: Rng + ?Sized>(&self, width: f64, rng: &mut R) -> Result<Vec<f64>, CliError> {
        let mut x = self.initial_state();
        let n = x.len();
        jitter_entries(&mut x, 0..n, width, rng);
        Ok(x)
    }
}

/// Any planner the harness can build by name.
#[derive(Debug, Clone)]
pub enum AnyPlanner {
    Mtp(MtpPlanner),
    Cem(CemPlanner),
    Mppi(MppiPlanner),
    Ps(PsPlanner),
}

impl<E: Environment> Planner<E> for AnyPlanner {
    fn name(&self) -> String {
        match self {
            AnyPlanner::Mtp(p) => Planner::<E>::name(p),
            AnyPlanner::Cem(p) => Planner::<E>::name(p),
            AnyPlanner::Mppi(p) => Planner::<E>::name(p),
            AnyPlanner::Ps(p) => Planner::<E>::name(p),
        }
    }

    fn plan(&mut self, state: &[f64], models: &[E], rng: &mut PlannerRng) -> mtp_core::Result<PlanOutput> {
        match self {
            AnyPlanner::Mtp(p) => p.plan(state, models, rng),
            AnyPlanner::Cem(p) => p.plan(state, models, rng),
            AnyPlanner::Mppi(p) => p.plan(state, models, rng),
            AnyPlanner::Ps(p) => p.plan(state, models, rng),
        }
    }

    fn shift(&mut self, steps: usize) {
        match self {
            AnyPlanner::Mtp(p) => Planner::<E>::shift(p, steps),
            AnyPlanner::Cem(p) => Planner::<E>::shift(p, steps),
            AnyPlanner::Mppi(p) => Planner::<E>::shift(p, steps),
            AnyPlanner::Ps(p) => Planner::<E>::shift(p, steps),
        }
    }

    fn distribution(&self) -> &GaussianControlDistribution {
        match self {
            AnyPlanner::Mtp(p) => Planner::<E>::distribution(p),
            AnyPlanner::Cem(p) => Planner::<E>::distribution(p),
            AnyPlanner::Mppi(p) => Planner::<E>::distribution(p),
            AnyPlanner::Ps(p) => Planner::<E>::distribution(p),
        }
    }
}

/// The MTP config a `mtp-*` planner name resolves to.
pub fn mtp_config(cfg: &ExperimentConfig, name: &str) -> Option<PlannerConfig> {
    let interpolation = match name {
        "mtp-linear" => Interpolation::Linear,
        "mtp-bspline" => Interpolation::BSpline {
            degree: cfg.planner.bspline_degree,
        },
        "mtp-akima" => Interpolation::Akima,
        _ => return None,
    };
    Some(PlannerConfig {
        interpolation,
        ..cfg.planner.mtp.clone()
    })
}

pub fn build_planner(cfg: &ExperimentConfig, name: &str, limits: &ControlLimits) -> Result<AnyPlanner, CliError> {
    let p = &cfg.planner;
    let built = match name {
        "cem" => CemPlanner::new(p.cem.clone(), limits).map(AnyPlanner::Cem),
        "mppi" => MppiPlanner::new(p.mppi.clone(), limits).map(AnyPlanner::Mppi),
        "ps" => PsPlanner::new(p.ps.clone(), limits).map(AnyPlanner::Ps),
        _ => match mtp_config(cfg, name) {
            Some(c) => MtpPlanner::new(c, limits).map(AnyPlanner::Mtp),
            None => return Err(CliError::Config(format!("unknown planner `{name}`"))),
        },
    };
    built.map_err(|e| CliError::Config(format!("planner `{name}`: {e}")))
}

/// `(samples, horizon)` of a named planner.
pub fn planner_budget(cfg: &ExperimentConfig, name: &str) -> (usize, usize) {
    let p = &cfg.planner;
    match name {
        "cem" => (p.cem.samples, p.cem.horizon),
        "mppi" => (p.mppi.samples, p.mppi.horizon),
        "ps" => (p.ps.samples, p.ps.horizon),
        _ => (p.mtp.samples, p.mtp.horizon),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub seed: u64,
    pub steps: Vec<StepDiagnostics>,
    pub success: bool,
    /// Controls executed before success first held; `max_steps + 1` if it never did.
    pub steps_to_success: usize,
    /// Running cost accumulated along the executed trajectory.
    pub final_cost: f64,
    pub mean_entropy: f64,
    pub states: Vec<Vec<f64>>,
}

/// Stream `stream` of the ChaCha generator keyed by `seed`.
pub fn seed_stream(seed: u64, stream: u64) -> PlannerRng {
    let mut rng = PlannerRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const PLANNER_STREAM: u64 = 0;
const MODEL_STREAM: u64 = 1;
const START_STREAM: u64 = 2;

/// Runs `planner` on `env` from a jittered start for up to `max_steps` controls.
///
/// Candidates are scored under `R` perturbed copies of `env`; the executed
/// system is `env` itself.
pub fn run_episode<E: Task>(
    env: &E,
    planner: &mut AnyPlanner,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<EpisodeResult, CliError> {
    let mut randomizer = DomainRandomizer::new(env.clone(), cfg.models());
    for spec in cfg.perturbations() {
        randomizer = randomizer.perturb(spec.parameter.clone(), spec.perturbation);
    }
    let models = randomizer
        .sample(&mut seed_stream(seed, MODEL_STREAM))
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut x = env.jittered_start(cfg.start_jitter(), &mut seed_stream(seed, START_STREAM))?;
    let mut rng = seed_stream(seed, PLANNER_STREAM);
    let max_steps = cfg.experiment.max_steps;
    let mut steps = Vec::new();
    let mut states = vec![x.clone()];
    let mut final_cost = 0.0;
    let mut next = vec![0.0; x.len()];
    let mut success_at = env.is_success(&x).then_some(0);
    for step in 0..max_steps {
        if success_at.is_some() {
            break;
        }
        let PlanOutput {
            control,
            mut diagnostics,
        } = planner
            .plan(&x, &models, &mut rng)
            .map_err(|e| CliError::Runtime(format!("step {step}: {e}")))?;
        diagnostics.step = step;
        diagnostics.elapsed = step as f64 * env.dt();
        final_cost += env.running_cost(&x, &control);
        env.step(&x, &control, &mut next);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Runtime(format!("state diverged at step {step}")));
        }
        std::mem::swap(&mut x, &mut next);
        states.push(x.clone());
        steps.push(diagnostics);
        Planner::<E>::shift(planner, 1);
        if env.is_success(&x) {
            success_at = Some(step + 1);
        }
    }
    let mean_entropy = if steps.is_empty() {
        0.0
    } else {
        steps.iter().map(|d| d.entropy).sum::<f64>() / steps.len() as f64
    };
    Ok(EpisodeResult {
        seed,
        steps,
        success: success_at.is_some(),
        steps_to_success: success_at.unwrap_or(max_steps + 1),
        final_cost,
        mean_entropy,
        states,
    })
}

/// Runs one episode per seed in parallel; results come back in seed order.
pub fn run_seeds<E: Task>(env: &E, cfg: &ExperimentConfig, planner_name: &str) -> Result<Vec<EpisodeResult>, CliError> {
    let template = build_planner(cfg, planner_name, env.control_limits())?;
    cfg.experiment
        .seeds
        .par_iter()
        .map(|&seed| {
            let mut planner = template.clone();
            run_episode(env, &mut planner, cfg, seed)
        })
        .collect()
}

/// Builds the configured environment and hands it to `f`.
pub fn with_env<T>(cfg: &ExperimentConfig, f: impl EnvVisitor<T>) -> Result<T, CliError> {
    let e = &cfg.env;
    let cfg_err = |err: mtp_core::Error| CliError::Config(format!("environment: {err}"));
    match cfg.experiment.env.as_str() {
        "navigation" => {
            let layout = e
                .navigation
                .layout
                .clone()
                .unwrap_or_else(mtp_core::env::NavigationLayout::u_trap);
            f.visit(&Navigation::new(layout, e.navigation.params).map_err(cfg_err)?)
        }
        "double-integrator" => f.visit(&DoubleIntegrator::new(e.double_integrator.clone()).map_err(cfg_err)?),
        "pendulum" => f.visit(&Pendulum::new(e.pendulum).map_err(cfg_err)?),
        "zero" => f.visit(&ZeroCost::new(e.zero.control_dim, e.zero.dt).map_err(cfg_err)?),
        other => Err(CliError::Config(format!("unknown environment `{other}`"))),
    }
}

/// Generic callback over the concrete environment type.
pub trait EnvVisitor<T> {
    fn visit<E: Task + Send + Sync>(self, env: &E) -> Result<T, CliError>;
}
