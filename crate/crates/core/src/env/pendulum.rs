use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Environment, Randomizable};
use crate::error::{Error, Result};
use crate::types::ControlLimits;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PendulumParams {
    pub mass: f64,
    pub length: f64,
    pub gravity: f64,
    pub damping: f64,
    pub max_torque: f64,
    pub dt: f64,
    /// Integration substeps per control step.
    pub substeps: usize,
    pub w_angle: f64,
    pub w_velocity: f64,
    pub w_control: f64,
    pub terminal_weight: f64,
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            length: 1.0,
            gravity: 9.81,
            damping: 0.1,
            max_torque: 3.0,
            dt: 0.05,
            substeps: 5,
            w_angle: 1.0,
            w_velocity: 0.1,
            w_control: 0.001,
            terminal_weight: 1.0,
        }
    }
}

/// Torque-limited pendulum. State `(theta, omega)` with `theta = 0` hanging
/// down and `theta = pi` upright.
///
/// `theta'' = -(g / l) sin(theta) + u / (m l^2) - b * theta'`, integrated with
/// semi-implicit Euler substeps.
#[derive(Debug, Clone, PartialEq)]
pub struct Pendulum {
    params: PendulumParams,
    limits: ControlLimits,
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

impl Pendulum {
    pub fn new(params: PendulumParams) -> Result<Self> {
        if !(params.mass > 0.0 && params.length > 0.0) {
            return Err(Error::Environment("mass and length must be positive".into()));
        }
        if !(params.dt > 0.0) || params.substeps == 0 {
            return Err(Error::Config("pendulum dt and substeps must be positive".into()));
        }
        if !(params.damping >= 0.0) {
            return Err(Error::Environment("damping must be >= 0".into()));
        }
        let hold = params.mass * params.gravity * params.length;
        if !(params.max_torque > 0.0 && params.max_torque < hold) {
            return Err(Error::Config(format!(
                "torque limit {} must be positive and below m g l = {hold} so swing-up needs pumping",
                params.max_torque
            )));
        }
        let limits = ControlLimits::symmetric(1, params.max_torque)?;
        Ok(Self { params, limits })
    }

    pub fn params(&self) -> &PendulumParams {
        &self.params
    }

    /// Angle away from upright, in `[0, pi]`.
    pub fn angle_error(theta: f64) -> f64 {
        wrap_angle(theta - PI).abs()
    }

    fn state_cost(&self, state: &[f64]) -> f64 {
        let e = Self::angle_error(state[0]);
        self.params.w_angle * e * e + self.params.w_velocity * state[1] * state[1]
    }
}

impl Environment for Pendulum {
    fn state_dim(&self) -> usize {
        2
    }

    fn control_dim(&self) -> usize {
        1
    }

    fn control_limits(&self) -> &ControlLimits {
        &self.limits
    }

    fn dt(&self) -> f64 {
        self.params.dt
    }

    fn step(&self, state: &[f64], control: &[f64], next: &mut [f64]) {
        let p = &self.params;
        let h = p.dt / p.substeps as f64;
        let inertia = p.mass * p.length * p.length;
        let (mut theta, mut omega) = (state[0], state[1]);
        for _ in 0..p.substeps {
            let acc = -(p.gravity / p.length) * theta.sin() + control[0] / inertia - p.damping * omega;
            omega += h * acc;
            theta += h * omega;
        }
        next[0] = theta;
        next[1] = omega;
    }

    fn running_cost(&self, state: &[f64], control: &[f64]) -> f64 {
        self.state_cost(state) + self.params.w_control * control[0] * control[0]
    }

    fn terminal_cost(&self, state: &[f64]) -> f64 {
        self.params.terminal_weight * self.state_cost(state)
    }

    fn is_success(&self, state: &[f64]) -> bool {
        Self::angle_error(state[0]) < 0.2 && state[1].abs() < 1.0
    }

    fn initial_state(&self) -> Vec<f64> {
        vec![0.0, 0.0]
    }
}

impl Randomizable for Pendulum {
    fn parameter(&self, name: &str) -> Option<f64> {
        let p = &self.params;
        match name {
            "mass" => Some(p.mass),
            "length" => Some(p.length),
            "damping" => Some(p.damping),
            "gravity" => Some(p.gravity),
            _ => None,
        }
    }

    fn with_parameter(&self, name: &str, value: f64) -> Result<Self> {
        let mut p = self.params;
        match name {
            "mass" => p.mass = value,
            "length" => p.length = value,
            "damping" => p.damping = value,
            "gravity" => p.gravity = value,
            _ => return Err(Error::Config(format!("unknown parameter `{name}`"))),
        }
        Self::new(p)
    }
}
