//! Analytic environments and domain randomization.

mod double_integrator;
mod navigation;
mod pendulum;

pub use double_integrator::{DoubleIntegrator, DoubleIntegratorParams};
pub use navigation::{Navigation, NavigationLayout, NavigationParams, Rect};
pub use pendulum::{wrap_angle, Pendulum, PendulumParams};

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::ControlLimits;

/// Discrete-time dynamics with running and terminal costs.
///
/// Implementations must be pure: the same `(state, control)` always yields the
/// same next state and cost.
pub trait Environment: Send + Sync {
    fn state_dim(&self) -> usize;
    fn control_dim(&self) -> usize;
    fn control_limits(&self) -> &ControlLimits;
    /// Seconds per control step.
    fn dt(&self) -> f64;
    fn step(&self, state: &[f64], control: &[f64], next: &mut [f64]);
    fn running_cost(&self, state: &[f64], control: &[f64]) -> f64;
    fn terminal_cost(&self, state: &[f64]) -> f64;
    fn is_success(&self, state: &[f64]) -> bool;
    fn initial_state(&self) -> Vec<f64>;
}

/// Named scalar parameters that domain randomization may perturb.
pub trait Randomizable: Sized {
    fn parameter(&self, name: &str) -> Option<f64>;
    /// Returns a copy with `name` set to `value`, or an error if the value is
    /// not physical for this model.
    fn with_parameter(&self, name: &str, value: f64) -> Result<Self>;
}

/// Distribution of the perturbed value around the base value `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Perturbation {
    /// `v * (1 + U(-fraction, fraction))`
    Relative { fraction: f64 },
    /// `v + U(-width, width)`
    Additive { width: f64 },
    /// `v + N(0, std^2)`
    Gaussian { std: f64 },
}

impl Perturbation {
    fn sample<R: Rng + ?Sized>(&self, base: f64, rng: &mut R) -> Result<f64> {
        let bad = |what: &str| Error::Config(format!("perturbation {what} must be finite and >= 0"));
        Ok(match *self {
            Perturbation::Relative { fraction } => {
                if !(fraction >= 0.0 && fraction.is_finite()) {
                    return Err(bad("fraction"));
                }
                if fraction == 0.0 {
                    base
                } else {
                    base * (1.0 + Uniform::new(-fraction, fraction).unwrap().sample(rng))
                }
            }
            Perturbation::Additive { width } => {
                if !(width >= 0.0 && width.is_finite()) {
                    return Err(bad("width"));
                }
                if width == 0.0 {
                    base
                } else {
                    base + Uniform::new(-width, width).unwrap().sample(rng)
                }
            }
            Perturbation::Gaussian { std } => {
                if !(std >= 0.0 && std.is_finite()) {
                    return Err(bad("std"));
                }
                if std == 0.0 {
                    base
                } else {
                    base + Normal::new(0.0, std).unwrap().sample(rng)
                }
            }
        })
    }
}

/// Produces `count` perturbed copies of a base model.
#[derive(Debug, Clone)]
pub struct DomainRandomizer<E> {
    pub base: E,
    pub perturbations: Vec<(String, Perturbation)>,
    pub count: usize,
}

/// Attempts per parameter before giving up on a non-physical draw.
pub const MAX_RANDOMIZATION_TRIES: usize = 100;

impl<E: Randomizable + Clone> DomainRandomizer<E> {
    pub fn new(base: E, count: usize) -> Self {
        Self {
            base,
            perturbations: Vec::new(),
            count,
        }
    }

    pub fn perturb(mut self, name: impl Into<String>, perturbation: Perturbation) -> Self {
        self.perturbations.push((name.into(), perturbation));
        self
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<E>> {
        randomize_models(self, rng)
    }
}

/// Draws `randomizer.count` independent perturbed models.
pub fn randomize_models<E, R>(randomizer: &DomainRandomizer<E>, rng: &mut R) -> Result<Vec<E>>
where
    E: Randomizable + Clone,
    R: Rng + ?Sized,
{
    if randomizer.count == 0 {
        return Err(Error::Config("randomized model count must be >= 1".into()));
    }
    for (name, _) in &randomizer.perturbations {
        if randomizer.base.parameter(name).is_none() {
            return Err(Error::Config(format!("unknown model parameter `{name}`")));
        }
    }
    let mut models = Vec::with_capacity(randomizer.count);
    for _ in 0..randomizer.count {
        let mut model = randomizer.base.clone();
        for (name, pert) in &randomizer.perturbations {
            let base = randomizer.base.parameter(name).expect("checked above");
            let mut accepted = None;
            for _ in 0..MAX_RANDOMIZATION_TRIES {
                let value = pert.sample(base, rng)?;
                if let Ok(m) = model.with_parameter(name, value) {
                    accepted = Some(m);
                    break;
                }
            }
            model = accepted.ok_or_else(|| Error::Randomization {
                parameter: name.clone(),
                tries: MAX_RANDOMIZATION_TRIES,
            })?;
        }
        models.push(model);
    }
    Ok(models)
}

/// Single integrator with zero cost everywhere; useful as a null task.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroCost {
    limits: ControlLimits,
    dt: f64,
}

impl ZeroCost {
    pub fn new(control_dim: usize, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Config("dt must be positive".into()));
        }
        Ok(Self {
            limits: ControlLimits::symmetric(control_dim, 1.0)?,
            dt,
        })
    }
}

impl Environment for ZeroCost {
    fn state_dim(&self) -> usize {
        self.limits.dim()
    }
    fn control_dim(&self) -> usize {
        self.limits.dim()
    }
    fn control_limits(&self) -> &ControlLimits {
        &self.limits
    }
    fn dt(&self) -> f64 {
        self.dt
    }
    fn step(&self, state: &[f64], control: &[f64], next: &mut [f64]) {
        for ((n, x), u) in next.iter_mut().zip(state).zip(control) {
            *n = x + u * self.dt;
        }
    }
    fn running_cost(&self, _: &[f64], _: &[f64]) -> f64 {
        0.0
    }
    fn terminal_cost(&self, _: &[f64]) -> f64 {
        0.0
    }
    fn is_success(&self, _: &[f64]) -> bool {
        false
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![0.0; self.limits.dim()]
    }
}

impl Randomizable for ZeroCost {
    fn parameter(&self, name: &str) -> Option<f64> {
        (name == "dt").then_some(self.dt)
    }
    fn with_parameter(&self, name: &str, value: f64) -> Result<Self> {
        match name {
            "dt" if value > 0.0 => Ok(Self {
                dt: value,
                ..self.clone()
            }),
            "dt" => Err(Error::Environment("dt must be positive".into())),
            _ => Err(Error::Config(format!("unknown parameter `{name}`"))),
        }
    }
}
