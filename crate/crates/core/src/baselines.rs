//! Reference planners: cross-entropy method, MPPI-style path integral, and
//! predictive sampling.

use ndarray::{Array2, Array3, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::planner::{
    evaluate_candidates, initial_distribution, mix_samples, rank_candidates, sample_local, softmax_weights,
    weighted_moments, PlanOutput, Planner, StepDiagnostics,
};
use crate::types::{ControlLimits, GaussianControlDistribution};
use crate::PlannerRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CemConfig {
    pub samples: usize,
    pub horizon: usize,
    pub elites: usize,
    /// `mu <- alpha mu + (1 - alpha) mu_new`.
    pub smoothing: f64,
    pub min_std: f64,
    pub init_std: f64,
    /// Divide the elite moments by `B` and `B - 1` instead of `E` and `E - 1`.
    pub eq4_literal: bool,
}

impl Default for CemConfig {
    fn default() -> Self {
        Self {
            samples: 256,
            horizon: 20,
            elites: 10,
            smoothing: 0.0,
            min_std: 0.05,
            init_std: 1.0,
            eq4_literal: false,
        }
    }
}

impl CemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.horizon == 0 {
            return Err(Error::Config("samples and horizon must be positive".into()));
        }
        if self.elites == 0 || self.elites > self.samples {
            return Err(Error::Config(format!(
                "elites {} must lie in [1, {}]",
                self.elites, self.samples
            )));
        }
        if !(0.0..1.0).contains(&self.smoothing) {
            return Err(Error::Config(format!("smoothing {} outside [0, 1)", self.smoothing)));
        }
        if !(self.min_std > 0.0) || !(self.init_std >= 0.0) {
            return Err(Error::Config("min_std must be > 0 and init_std >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MppiConfig {
    pub samples: usize,
    pub horizon: usize,
    pub temperature: f64,
    /// Fixed exploration noise.
    pub std: f64,
}

impl Default for MppiConfig {
    fn default() -> Self {
        Self {
            samples: 256,
            horizon: 20,
            temperature: 0.1,
            std: 1.0,
        }
    }
}

impl MppiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.horizon == 0 {
            return Err(Error::Config("samples and horizon must be positive".into()));
        }
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::Config(format!("temperature {} must be > 0", self.temperature)));
        }
        if !(self.std > 0.0) {
            return Err(Error::Config(format!("noise std {} must be > 0", self.std)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsConfig {
    pub samples: usize,
    pub horizon: usize,
    pub std: f64,
}

impl Default for PsConfig {
    fn default() -> Self {
        Self {
            samples: 256,
            horizon: 20,
            std: 1.0,
        }
    }
}

impl PsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 || self.horizon == 0 {
            return Err(Error::Config(
                "predictive sampling needs at least 2 samples and a positive horizon".into(),
            ));
        }
        if !(self.std > 0.0) {
            return Err(Error::Config(format!("noise std {} must be > 0", self.std)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BaselineKind {
    Cem(CemConfig),
    Mppi(MppiConfig),
    Ps(PsConfig),
}

impl BaselineKind {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::Cem(_) => "cem",
            BaselineKind::Mppi(_) => "mppi",
            BaselineKind::Ps(_) => "ps",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BaselineKind::Cem(c) => c.validate(),
            BaselineKind::Mppi(c) => c.validate(),
            BaselineKind::Ps(c) => c.validate(),
        }
    }
}

fn shared_limits<E: Environment>(models: &[E], dist: &GaussianControlDistribution) -> Result<ControlLimits> {
    let limits = models
        .first()
        .ok_or_else(|| Error::Config("planning needs at least one model".into()))?
        .control_limits()
        .clone();
    if dist.control_dim() != limits.dim() {
        return Err(Error::Shape(format!(
            "distribution control dim {} vs model {}",
            dist.control_dim(),
            limits.dim()
        )));
    }
    Ok(limits)
}

fn check_horizon(dist: &GaussianControlDistribution, horizon: usize) -> Result<()> {
    if dist.horizon() != horizon {
        return Err(Error::Shape(format!(
            "distribution horizon {} vs configured {horizon}",
            dist.horizon()
        )));
    }
    Ok(())
}

/// One CEM iteration: `B` Gaussian samples, unweighted elite moments, smoothing.
pub fn cem_step<E: Environment, R: Rng + ?Sized>(
    x0: &[f64],
    dist: &GaussianControlDistribution,
    config: &CemConfig,
    models: &[E],
    rng: &mut R,
) -> Result<(Vec<f64>, GaussianControlDistribution, StepDiagnostics)> {
    config.validate()?;
    check_horizon(dist, config.horizon)?;
    let limits = shared_limits(models, dist)?;
    let controls = sample_local(dist, config.samples, &limits, rng);
    let costs = evaluate_candidates(controls.view(), models, x0)?;
    let ranked = rank_candidates(costs.summed.view());
    let elites = &ranked[..config.elites];
    let degenerate = !costs.summed[elites[0]].is_finite();
    let diagnostics = StepDiagnostics::from_costs(costs.summed.view(), elites.to_vec(), degenerate);
    if degenerate {
        log::warn!("all CEM candidates diverged; holding the distribution");
        return Ok((dist.mean.row(0).to_vec(), dist.clone(), diagnostics));
    }
    let (new_mean, new_std) = cem_moments(controls.view(), elites, config);
    let a = config.smoothing;
    let (mut mean, std) = if a == 0.0 {
        (new_mean, new_std)
    } else {
        (
            &dist.mean * a + &new_mean * (1.0 - a),
            &dist.std * a + &new_std * (1.0 - a),
        )
    };
    limits.clamp_sequence(&mut mean);
    let next = GaussianControlDistribution { mean, std };
    Ok((next.mean.row(0).to_vec(), next, diagnostics))
}

/// Unweighted mean and floored std of `controls[elites]`.
pub fn cem_moments(
    controls: ndarray::ArrayView3<'_, f64>,
    elites: &[usize],
    config: &CemConfig,
) -> (Array2<f64>, Array2<f64>) {
    let e = elites.len();
    let (mean_div, var_div) = if config.eq4_literal {
        (config.samples as f64, config.samples.saturating_sub(1) as f64)
    } else {
        (e as f64, e.saturating_sub(1) as f64)
    };
    let (_, h, n) = controls.dim();
    let mut sum = Array2::<f64>::zeros((h, n));
    for &i in elites {
        sum += &controls.index_axis(Axis(0), i);
    }
    let mean = sum / mean_div;
    let mut sq = Array2::<f64>::zeros((h, n));
    for &i in elites {
        let d = &controls.index_axis(Axis(0), i) - &mean;
        sq += &(&d * &d);
    }
    let floor = config.min_std;
    let std = if var_div > 0.0 {
        sq.mapv(|v| (v / var_div).sqrt().max(floor))
    } else {
        Array2::from_elem((h, n), floor)
    };
    (mean, std)
}

/// One MPPI-style iteration: `B - 1` perturbations plus the nominal, softmax
/// over every candidate, fixed noise.
pub fn mppi_step<E: Environment, R: Rng + ?Sized>(
    x0: &[f64],
    dist: &GaussianControlDistribution,
    config: &MppiConfig,
    models: &[E],
    rng: &mut R,
) -> Result<(Vec<f64>, GaussianControlDistribution, StepDiagnostics)> {
    config.validate()?;
    check_horizon(dist, config.horizon)?;
    let limits = shared_limits(models, dist)?;
    let controls = sample_batch(dist, config.samples, &limits, rng)?;
    let costs = evaluate_candidates(controls.view(), models, x0)?;
    let order = rank_candidates(costs.summed.view());
    let summed = costs.summed.to_vec();
    let Some(w) = softmax_weights(&summed, config.temperature) else {
        log::warn!("all MPPI candidates diverged; holding the distribution");
        let diagnostics = StepDiagnostics::from_costs(costs.summed.view(), order, true);
        return Ok((dist.mean.row(0).to_vec(), dist.clone(), diagnostics));
    };
    let rows: Vec<usize> = (0..config.samples).collect();
    let (mut mean, _) = weighted_moments(controls.view(), &rows, &w);
    limits.clamp_sequence(&mut mean);
    let diagnostics = StepDiagnostics::from_costs(costs.summed.view(), order, false);
    let next = GaussianControlDistribution {
        mean,
        std: dist.std.clone(),
    };
    Ok((next.mean.row(0).to_vec(), next, diagnostics))
}

/// One predictive-sampling iteration: the best of `B - 1` perturbations and the
/// nominal becomes the new nominal.
pub fn ps_step<E: Environment, R: Rng + ?Sized>(
    x0: &[f64],
    dist: &GaussianControlDistribution,
    config: &PsConfig,
    models: &[E],
    rng: &mut R,
) -> Result<(Vec<f64>, GaussianControlDistribution, StepDiagnostics)> {
    config.validate()?;
    check_horizon(dist, config.horizon)?;
    let limits = shared_limits(models, dist)?;
    let controls = sample_batch(dist, config.samples, &limits, rng)?;
    let costs = evaluate_candidates(controls.view(), models, x0)?;
    let order = rank_candidates(costs.summed.view());
    let best = order[0];
    let degenerate = !costs.summed[best].is_finite();
    let diagnostics = StepDiagnostics::from_costs(costs.summed.view(), vec![best], degenerate);
    if degenerate {
        log::warn!("all PS candidates diverged; holding the nominal");
        return Ok((dist.mean.row(0).to_vec(), dist.clone(), diagnostics));
    }
    let mut mean = controls.index_axis(Axis(0), best).to_owned();
    limits.clamp_sequence(&mut mean);
    let next = GaussianControlDistribution {
        mean,
        std: dist.std.clone(),
    };
    Ok((next.mean.row(0).to_vec(), next, diagnostics))
}

fn sample_batch<R: Rng + ?Sized>(
    dist: &GaussianControlDistribution,
    samples: usize,
    limits: &ControlLimits,
    rng: &mut R,
) -> Result<Array3<f64>> {
    let none = Array3::zeros((0, dist.horizon(), dist.control_dim()));
    mix_samples(none.view(), dist, samples, limits, rng)
}

macro_rules! receding_planner {
    ($ty:ident, $cfg:ty, $step:ident, $name:literal, $std:expr) => {
        #[derive(Debug, Clone)]
        pub struct $ty {
            pub config: $cfg,
            dist: GaussianControlDistribution,
        }

        impl $ty {
            pub fn new(config: $cfg, limits: &ControlLimits) -> Result<Self> {
                config.validate()?;
                let std = $std(&config);
                let dist = initial_distribution(config.horizon, limits, std);
                Ok(Self { config, dist })
            }

            pub fn with_distribution(config: $cfg, dist: GaussianControlDistribution) -> Result<Self> {
                config.validate()?;
                Ok(Self { config, dist })
            }
        }

        impl<E: Environment> Planner<E> for $ty {
            fn name(&self) -> String {
                $name.to_string()
            }

            fn plan(&mut self, state: &[f64], models: &[E], rng: &mut PlannerRng) -> Result<PlanOutput> {
                let (control, dist, diagnostics) = $step(state, &self.dist, &self.config, models, rng)?;
                self.dist = dist;
                Ok(PlanOutput { control, diagnostics })
            }

            fn shift(&mut self, steps: usize) {
                self.dist.shift(steps);
            }

            fn distribution(&self) -> &GaussianControlDistribution {
                &self.dist
            }
        }
    };
}

receding_planner!(CemPlanner, CemConfig, cem_step, "cem", |c: &CemConfig| c.init_std);
receding_planner!(MppiPlanner, MppiConfig, mppi_step, "mppi", |c: &MppiConfig| c.std);
receding_planner!(PsPlanner, PsConfig, ps_step, "ps", |c: &PsConfig| c.std);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Environment;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::SeedableRng;

    /// One-step task whose cost is `(u - target)^2` summed over the horizon.
    struct Target {
        limits: ControlLimits,
        target: f64,
    }

    impl Target {
        fn new(target: f64) -> Self {
            Self {
                limits: ControlLimits::symmetric(1, 5.0).unwrap(),
                target,
            }
        }
    }

    impl Environment for Target {
        fn state_dim(&self) -> usize {
            1
        }
        fn control_dim(&self) -> usize {
            1
        }
        fn control_limits(&self) -> &ControlLimits {
            &self.limits
        }
        fn dt(&self) -> f64 {
            1.0
        }
        fn step(&self, s: &[f64], _: &[f64], n: &mut [f64]) {
            n[0] = s[0];
        }
        fn running_cost(&self, _: &[f64], u: &[f64]) -> f64 {
            (u[0] - self.target).powi(2)
        }
        fn terminal_cost(&self, _: &[f64]) -> f64 {
            0.0
        }
        fn is_success(&self, _: &[f64]) -> bool {
            false
        }
        fn initial_state(&self) -> Vec<f64> {
            vec![0.0]
        }
    }

    #[test]
    fn cem_elite_divisor_conventions() {
        // elites are the samples with values 1 and 3
        let u = array![[[1.0]], [[3.0]], [[10.0]], [[-7.0]]];
        let mut c = CemConfig {
            samples: 4,
            elites: 2,
            horizon: 1,
            min_std: 1e-9,
            ..Default::default()
        };
        let (mean, std) = cem_moments(u.view(), &[0, 1], &c);
        assert_eq!(mean[[0, 0]], 2.0);
        // ((1-2)^2 + (3-2)^2) / (E - 1) = 2
        assert_abs_diff_eq!(std[[0, 0]], 2f64.sqrt(), epsilon = 1e-15);
        c.eq4_literal = true;
        let (mean, std) = cem_moments(u.view(), &[0, 1], &c);
        // sum 4 over B = 4
        assert_eq!(mean[[0, 0]], 1.0);
        // ((1-1)^2 + (3-1)^2) / (B - 1) = 4/3
        assert_abs_diff_eq!(std[[0, 0]], (4.0f64 / 3.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn cem_identical_samples_collapse_to_sample() {
        let env = Target::new(0.3);
        let dist = GaussianControlDistribution::new(array![[0.7], [0.7]], array![[0.0], [0.0]]).unwrap();
        let c = CemConfig {
            samples: 8,
            elites: 8,
            horizon: 2,
            ..Default::default()
        };
        let (u, next, _) = cem_step(&[0.0], &dist, &c, &[env], &mut PlannerRng::seed_from_u64(0)).unwrap();
        for v in next.mean.iter().chain(&u) {
            assert_abs_diff_eq!(*v, 0.7, epsilon = 1e-15);
        }
        assert!(next.std.iter().all(|&s| s == c.min_std));
    }

    #[test]
    fn cem_smoothing_blends_old_mean() {
        let env = Target::new(0.0);
        let dist = GaussianControlDistribution::new(array![[1.0]], array![[0.0]]).unwrap();
        let c = CemConfig {
            samples: 4,
            elites: 2,
            horizon: 1,
            smoothing: 0.5,
            ..Default::default()
        };
        let (_, next, _) = cem_step(&[0.0], &dist, &c, &[env], &mut PlannerRng::seed_from_u64(0)).unwrap();
        // all samples equal the old mean, so blending keeps it
        assert_eq!(next.mean[[0, 0]], 1.0);
        assert_abs_diff_eq!(next.std[[0, 0]], 0.5 * c.min_std, epsilon = 1e-15);
    }

    #[test]
    fn mppi_hot_temperature_averages_samples() {
        let env = Target::new(0.0);
        let limits = env.limits.clone();
        let dist = GaussianControlDistribution::new(array![[0.2], [0.0]], array![[0.1], [0.1]]).unwrap();
        let c = MppiConfig {
            samples: 16,
            horizon: 2,
            temperature: 1e9,
            std: 0.1,
        };
        let (_, next, _) = mppi_step(
            &[0.0],
            &dist,
            &c,
            std::slice::from_ref(&env),
            &mut PlannerRng::seed_from_u64(2),
        )
        .unwrap();
        let u = sample_batch(&dist, 16, &limits, &mut PlannerRng::seed_from_u64(2)).unwrap();
        let avg = u.mean_axis(Axis(0)).unwrap();
        for (a, b) in next.mean.iter().zip(avg.iter()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-9);
        }
        assert_eq!(next.std, dist.std);
    }

    #[test]
    fn mppi_single_sample_is_nominal() {
        let env = Target::new(1.0);
        let dist = GaussianControlDistribution::new(array![[0.4]], array![[0.5]]).unwrap();
        let c = MppiConfig {
            samples: 1,
            horizon: 1,
            ..Default::default()
        };
        let (u, next, _) = mppi_step(&[0.0], &dist, &c, &[env], &mut PlannerRng::seed_from_u64(2)).unwrap();
        assert_eq!(next.mean, dist.mean);
        assert_eq!(u, vec![0.4]);
    }

    #[test]
    fn ps_keeps_nominal_when_best() {
        let env = Target::new(0.25);
        let dist = GaussianControlDistribution::new(array![[0.25], [0.25]], array![[1.0], [1.0]]).unwrap();
        let c = PsConfig {
            samples: 32,
            horizon: 2,
            std: 1.0,
        };
        let (u, next, diag) = ps_step(&[0.0], &dist, &c, &[env], &mut PlannerRng::seed_from_u64(5)).unwrap();
        assert_eq!(next.mean, dist.mean);
        assert_eq!(u, vec![0.25]);
        assert_eq!(diag.elite_indices, vec![31]);
    }

    #[test]
    fn ps_adopts_best_candidate() {
        let env = Target::new(3.0);
        let limits = env.limits.clone();
        let dist = GaussianControlDistribution::new(array![[0.0]], array![[2.0]]).unwrap();
        let c = PsConfig {
            samples: 64,
            horizon: 1,
            std: 2.0,
        };
        let (_, next, diag) = ps_step(
            &[0.0],
            &dist,
            &c,
            std::slice::from_ref(&env),
            &mut PlannerRng::seed_from_u64(8),
        )
        .unwrap();
        let u = sample_batch(&dist, 64, &limits, &mut PlannerRng::seed_from_u64(8)).unwrap();
        let best = diag.elite_indices[0];
        assert_eq!(next.mean, u.index_axis(Axis(0), best));
        let oracle = (0..64)
            .min_by(|&a, &b| (u[[a, 0, 0]] - 3.0).abs().total_cmp(&(u[[b, 0, 0]] - 3.0).abs()))
            .unwrap();
        assert_eq!(best, oracle);
    }

    #[test]
    fn invalid_baseline_configs() {
        assert!(PsConfig {
            samples: 1,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(MppiConfig {
            temperature: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(CemConfig {
            elites: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(CemConfig {
            smoothing: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn baseline_kind_toml_tag() {
        let k: BaselineKind = toml::from_str("kind = \"mppi\"\ntemperature = 0.5").unwrap();
        assert_eq!(k.name(), "mppi");
        assert_eq!(
            k,
            BaselineKind::Mppi(MppiConfig {
                temperature: 0.5,
                ..Default::default()
            })
        );
    }
}
