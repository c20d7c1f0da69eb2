use serde::{Deserialize, Serialize};

use super::{Environment, Randomizable};
use crate::error::{Error, Result};
use crate::types::ControlLimits;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DoubleIntegratorParams {
    pub start: Vec<f64>,
    pub goal: Vec<f64>,
    pub w_position: f64,
    pub w_velocity: f64,
    pub w_control: f64,
    pub terminal_weight: f64,
    pub dt: f64,
    pub max_accel: f64,
    /// Input gain (inverse mass).
    pub gain: f64,
    pub success_radius: f64,
    pub success_speed: f64,
}

impl Default for DoubleIntegratorParams {
    fn default() -> Self {
        Self {
            start: vec![-1.0, 0.5],
            goal: vec![0.0, 0.0],
            w_position: 1.0,
            w_velocity: 0.1,
            w_control: 0.01,
            terminal_weight: 1.0,
            dt: 0.05,
            max_accel: 1.0,
            gain: 1.0,
            success_radius: 0.1,
            success_speed: 0.2,
        }
    }
}

/// Independent double integrators, one per axis. State is `(p_1..p_k, v_1..v_k)`.
///
/// Zero-order-hold discretization: `p' = p + v dt + u dt^2 / 2`, `v' = v + u dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleIntegrator {
    params: DoubleIntegratorParams,
    limits: ControlLimits,
}

impl DoubleIntegrator {
    pub fn new(params: DoubleIntegratorParams) -> Result<Self> {
        if !(params.dt > 0.0) {
            return Err(Error::Config("double integrator dt must be positive".into()));
        }
        if params.start.len() != params.goal.len() || params.goal.is_empty() {
            return Err(Error::Config("start and goal need the same non-zero length".into()));
        }
        if !(params.gain > 0.0) {
            return Err(Error::Environment("gain must be positive".into()));
        }
        let limits = ControlLimits::symmetric(params.goal.len(), params.max_accel)?;
        Ok(Self { params, limits })
    }

    pub fn params(&self) -> &DoubleIntegratorParams {
        &self.params
    }

    fn axes(&self) -> usize {
        self.params.goal.len()
    }

    fn state_cost(&self, state: &[f64]) -> f64 {
        let k = self.axes();
        let p = &self.params;
        let mut pos = 0.0;
        let mut vel = 0.0;
        for a in 0..k {
            pos += (state[a] - p.goal[a]).powi(2);
            vel += state[k + a].powi(2);
        }
        p.w_position * pos + p.w_velocity * vel
    }
}

impl Environment for DoubleIntegrator {
    fn state_dim(&self) -> usize {
        2 * self.axes()
    }

    fn control_dim(&self) -> usize {
        self.axes()
    }

    fn control_limits(&self) -> &ControlLimits {
        &self.limits
    }

    fn dt(&self) -> f64 {
        self.params.dt
    }

    fn step(&self, state: &[f64], control: &[f64], next: &mut [f64]) {
        let k = self.axes();
        let dt = self.params.dt;
        for a in 0..k {
            let acc = self.params.gain * control[a];
            next[a] = state[a] + state[k + a] * dt + 0.5 * acc * dt * dt;
            next[k + a] = state[k + a] + acc * dt;
        }
    }

    fn running_cost(&self, state: &[f64], control: &[f64]) -> f64 {
        let u2: f64 = control.iter().map(|u| u * u).sum();
        self.state_cost(state) + self.params.w_control * u2
    }

    fn terminal_cost(&self, state: &[f64]) -> f64 {
        self.params.terminal_weight * self.state_cost(state)
    }

    fn is_success(&self, state: &[f64]) -> bool {
        let k = self.axes();
        let p = &self.params;
        let dist = (0..k).map(|a| (state[a] - p.goal[a]).powi(2)).sum::<f64>().sqrt();
        let speed = (0..k).map(|a| state[k + a].powi(2)).sum::<f64>().sqrt();
        dist < p.success_radius && speed < p.success_speed
    }

    fn initial_state(&self) -> Vec<f64> {
        let mut x = self.params.start.clone();
        x.extend(std::iter::repeat_n(0.0, self.axes()));
        x
    }
}

impl Randomizable for DoubleIntegrator {
    fn parameter(&self, name: &str) -> Option<f64> {
        match name {
            "gain" => Some(self.params.gain),
            "dt" => Some(self.params.dt),
            _ => None,
        }
    }

    fn with_parameter(&self, name: &str, value: f64) -> Result<Self> {
        let mut params = self.params.clone();
        match name {
            "gain" => params.gain = value,
            "dt" => params.dt = value,
            _ => return Err(Error::Config(format!("unknown parameter `{name}`"))),
        }
        Self::new(params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coasting_advances_by_velocity() {
        let env = DoubleIntegrator::new(DoubleIntegratorParams::default()).unwrap();
        let mut next = [0.0; 4];
        env.step(&[0.2, -0.1, 0.5, -1.0], &[0.0, 0.0], &mut next);
        assert_eq!(next, [0.2 + 0.5 * 0.05, -0.1 - 1.0 * 0.05, 0.5, -1.0]);
    }

    #[test]
    fn resting_at_goal_costs_nothing() {
        let env = DoubleIntegrator::new(DoubleIntegratorParams::default()).unwrap();
        assert_eq!(env.running_cost(&[0.0, 0.0, 0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert_eq!(env.terminal_cost(&[0.0, 0.0, 0.0, 0.0]), 0.0);
        assert!(env.is_success(&[0.0, 0.0, 0.0, 0.0]));
    }
}
