//! Model tensor planning: beta-mixed tensor and local sampling with a
//! softmax-weighted elite update.

use ndarray::{Array1, Array2, Array3, ArrayView1, ArrayView3, Axis};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::diagnostics::cost_entropy;
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::rollout::batch_rollout;
use crate::spline::Interpolation;
use crate::tensor::tensor_sample;
use crate::types::{ControlLimits, GaussianControlDistribution};
use crate::PlannerRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Graph layers `M`.
    pub layers: usize,
    /// Waypoints per layer `N`.
    pub nodes: usize,
    /// Candidates per step `B`, including the nominal.
    pub samples: usize,
    pub horizon: usize,
    /// Fraction `beta` of the batch drawn from the graph.
    pub mixing: f64,
    pub elites: usize,
    /// Softmax temperature `lambda`.
    pub temperature: f64,
    /// `alpha` in `mu <- mu' + alpha (mu - mu')`.
    pub smoothing: f64,
    pub min_std: f64,
    pub init_std: f64,
    pub interpolation: Interpolation,
    /// When false the std stays at its current value (MPPI-style fixed noise).
    pub adapt_std: bool,
    /// When false the elites are weighted uniformly instead of by softmax.
    pub softmax: bool,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            layers: 5,
            nodes: 30,
            samples: 256,
            horizon: 20,
            mixing: 1.0,
            elites: 10,
            temperature: 0.1,
            smoothing: 0.0,
            min_std: 0.05,
            init_std: 1.0,
            interpolation: Interpolation::Akima,
            adapt_std: true,
            softmax: true,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.samples == 0 || self.horizon == 0 {
            return fail("samples and horizon must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.mixing) {
            return fail(format!("mixing rate {} outside [0, 1]", self.mixing));
        }
        if self.elites == 0 || self.elites > self.samples {
            return fail(format!("elites {} must lie in [1, {}]", self.elites, self.samples));
        }
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return fail(format!("temperature {} must be > 0", self.temperature));
        }
        if !(0.0..1.0).contains(&self.smoothing) {
            return fail(format!("smoothing {} outside [0, 1)", self.smoothing));
        }
        if !(self.min_std > 0.0) || !(self.init_std >= 0.0) {
            return fail("min_std must be > 0 and init_std >= 0".into());
        }
        if self.tensor_count() > 0 {
            if self.nodes == 0 {
                return fail("nodes must be positive".into());
            }
            self.interpolation.validate(self.layers, self.horizon)?;
        }
        Ok(())
    }

    /// Number of graph-sampled rows, `min(floor(beta B), B - 1)`.
    pub fn tensor_count(&self) -> usize {
        ((self.mixing * self.samples as f64).floor() as usize).min(self.samples.saturating_sub(1))
    }
}

/// Draws `count` Gaussian sequences around `dist`, clamped to `limits`.
pub fn sample_local<R: Rng + ?Sized>(
    dist: &GaussianControlDistribution,
    count: usize,
    limits: &ControlLimits,
    rng: &mut R,
) -> Array3<f64> {
    let (horizon, dim) = dist.mean.dim();
    let mut out = Array3::zeros((count, horizon, dim));
    for b in 0..count {
        for t in 0..horizon {
            for k in 0..dim {
                let z: f64 = StandardNormal.sample(rng);
                out[[b, t, k]] = (dist.mean[[t, k]] + dist.std[[t, k]] * z).clamp(limits.lo()[k], limits.hi()[k]);
            }
        }
    }
    out
}

/// Stacks `B - P - 1` local samples, the `P` tensor rows, and the nominal mean.
pub fn mix_samples<R: Rng + ?Sized>(
    tensor_rows: ArrayView3<'_, f64>,
    dist: &GaussianControlDistribution,
    batch: usize,
    limits: &ControlLimits,
    rng: &mut R,
) -> Result<Array3<f64>> {
    let (paths, horizon, dim) = tensor_rows.dim();
    if (horizon, dim) != dist.mean.dim() && paths > 0 {
        return Err(Error::Shape(format!(
            "tensor rows {:?} vs distribution {:?}",
            (horizon, dim),
            dist.mean.dim()
        )));
    }
    if batch == 0 || paths > batch - 1 {
        return Err(Error::Config(format!(
            "{paths} tensor rows do not leave room for the nominal in a batch of {batch}"
        )));
    }
    let local = sample_local(dist, batch - paths - 1, limits, rng);
    let (h, n) = dist.mean.dim();
    let mut out = Array3::zeros((batch, h, n));
    let n_local = local.dim().0;
    out.slice_mut(ndarray::s![..n_local, .., ..]).assign(&local);
    out.slice_mut(ndarray::s![n_local..batch - 1, .., ..])
        .assign(&tensor_rows);
    out.index_axis_mut(Axis(0), batch - 1).assign(&dist.mean);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateCosts {
    /// `s`, one entry per candidate; NaN is reported as `+inf`.
    pub summed: Array1<f64>,
    /// `S`, `(B, T)`, averaged over models.
    pub per_step: Array2<f64>,
}

pub fn evaluate_candidates<E: Environment>(
    controls: ArrayView3<'_, f64>,
    models: &[E],
    x0: &[f64],
) -> Result<CandidateCosts> {
    let res = batch_rollout(models, x0, controls)?;
    let mut per_step = res.mean_cost_matrix();
    per_step.mapv_inplace(|c| if c.is_nan() { f64::INFINITY } else { c });
    let summed = res.summed.mapv(|c| if c.is_nan() { f64::INFINITY } else { c });
    Ok(CandidateCosts { summed, per_step })
}

/// Candidate indices ordered by cost, ties broken by lower index.
pub fn rank_candidates(costs: ArrayView1<'_, f64>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..costs.len()).collect();
    idx.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
    idx
}

/// `exp(-(s - min s) / lambda)`, normalized. `None` when no cost is finite.
pub fn softmax_weights(costs: &[f64], temperature: f64) -> Option<Vec<f64>> {
    let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return None;
    }
    let mut w: Vec<f64> = costs.iter().map(|&s| (-(s - min) / temperature).exp()).collect();
    let total = w.iter().fold(0.0, |a, &b| a + b);
    w.iter_mut().for_each(|v| *v /= total);
    Some(w)
}

/// Weighted mean and variance of `controls[rows]`, accumulated in the given row order.
pub fn weighted_moments(controls: ArrayView3<'_, f64>, rows: &[usize], weights: &[f64]) -> (Array2<f64>, Array2<f64>) {
    let mut mean = controls.index_axis(Axis(0), rows[0]).mapv(|u| weights[0] * u);
    for (&r, &w) in rows.iter().zip(weights).skip(1) {
        mean.scaled_add(w, &controls.index_axis(Axis(0), r));
    }
    let mut var = Array2::zeros(mean.dim());
    for (&r, &w) in rows.iter().zip(weights) {
        let row = controls.index_axis(Axis(0), r);
        ndarray::Zip::from(&mut var)
            .and(&row)
            .and(&mean)
            .for_each(|v, &u, &m| *v += w * (u - m) * (u - m));
    }
    (mean, var)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EliteUpdateResult {
    pub new_mean: Array2<f64>,
    pub new_std: Array2<f64>,
    /// Softmax weights aligned with `elite_indices`.
    pub weights: Vec<f64>,
    /// Elite candidates, best first.
    pub elite_indices: Vec<usize>,
    /// First control of the lowest-cost candidate.
    pub best_control: Vec<f64>,
    /// True when every elite cost was infinite and the distribution was kept.
    pub degenerate: bool,
}

pub fn softmax_elite_update(
    controls: ArrayView3<'_, f64>,
    costs: ArrayView1<'_, f64>,
    config: &PlannerConfig,
    dist: &GaussianControlDistribution,
    limits: &ControlLimits,
) -> Result<EliteUpdateResult> {
    let batch = controls.dim().0;
    if costs.len() != batch {
        return Err(Error::Shape(format!("{} costs for {batch} candidates", costs.len())));
    }
    if config.elites == 0 || config.elites > batch {
        return Err(Error::Config(format!(
            "elites {} must lie in [1, {batch}]",
            config.elites
        )));
    }
    let ranked = rank_candidates(costs);
    let elite_indices: Vec<usize> = ranked[..config.elites].to_vec();
    let best = elite_indices[0];

    let mut by_index = elite_indices.clone();
    by_index.sort_unstable();
    let elite_costs: Vec<f64> = by_index.iter().map(|&i| costs[i]).collect();
    let weights = if config.softmax {
        softmax_weights(&elite_costs, config.temperature)
    } else {
        let finite = elite_costs.iter().filter(|c| c.is_finite()).count();
        (finite > 0).then(|| {
            elite_costs
                .iter()
                .map(|c| if c.is_finite() { 1.0 / finite as f64 } else { 0.0 })
                .collect()
        })
    };
    let Some(w_by_index) = weights else {
        log::warn!("all elite costs are infinite; keeping the previous distribution");
        return Ok(EliteUpdateResult {
            new_mean: dist.mean.clone(),
            new_std: dist.std.clone(),
            weights: vec![1.0 / config.elites as f64; config.elites],
            elite_indices,
            best_control: dist.mean.row(0).to_vec(),
            degenerate: true,
        });
    };

    let (mean_new, var_new) = weighted_moments(controls, &by_index, &w_by_index);
    let std_new = if config.adapt_std {
        let floor = config.min_std * config.min_std;
        var_new.mapv(|v| v.max(floor).sqrt())
    } else {
        dist.std.clone()
    };
    let alpha = config.smoothing;
    let (mut mean, std) = if alpha == 0.0 {
        (mean_new, std_new)
    } else {
        (
            &mean_new + &((&dist.mean - &mean_new) * alpha),
            &std_new + &((&dist.std - &std_new) * alpha),
        )
    };
    limits.clamp_sequence(&mut mean);

    let weights = elite_indices
        .iter()
        .map(|i| w_by_index[by_index.binary_search(i).expect("elite present")])
        .collect();
    Ok(EliteUpdateResult {
        new_mean: mean,
        new_std: std,
        weights,
        elite_indices,
        best_control: controls.slice(ndarray::s![best, 0, ..]).to_vec(),
        degenerate: false,
    })
}

/// Per-step planner telemetry. `step` and `elapsed` are filled in by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub best_cost: f64,
    /// Mean over finite candidate costs (`+inf` if none are finite).
    pub mean_cost: f64,
    pub entropy: f64,
    /// Simulated seconds since the start of the episode.
    pub elapsed: f64,
    pub costs: Vec<f64>,
    pub elite_indices: Vec<usize>,
    pub degenerate: bool,
}

impl StepDiagnostics {
    pub const CSV_HEADER: &'static str = "step,best_cost,mean_cost,entropy,elapsed";

    pub fn from_costs(costs: ArrayView1<'_, f64>, elite_indices: Vec<usize>, degenerate: bool) -> Self {
        let finite: Vec<f64> = costs.iter().copied().filter(|c| c.is_finite()).collect();
        let best_cost = costs.iter().copied().fold(f64::INFINITY, f64::min);
        let mean_cost = if finite.is_empty() {
            f64::INFINITY
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        };
        Self {
            step: 0,
            best_cost,
            mean_cost,
            entropy: cost_entropy(costs.as_slice().expect("contiguous costs")),
            elapsed: 0.0,
            costs: costs.to_vec(),
            elite_indices,
            degenerate,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.step, self.best_cost, self.mean_cost, self.entropy, self.elapsed
        )
    }
}

/// One planning iteration from `x0`.
///
/// Returns the first control of the best evaluated candidate, the updated
/// distribution, and step diagnostics.
pub fn plan_step<E: Environment, R: Rng + ?Sized>(
    x0: &[f64],
    dist: &GaussianControlDistribution,
    config: &PlannerConfig,
    models: &[E],
    rng: &mut R,
) -> Result<(Vec<f64>, GaussianControlDistribution, StepDiagnostics)> {
    config.validate()?;
    let limits = models
        .first()
        .ok_or_else(|| Error::Config("planning needs at least one model".into()))?
        .control_limits()
        .clone();
    if dist.mean.dim() != (config.horizon, limits.dim()) {
        return Err(Error::Shape(format!(
            "distribution {:?} vs horizon {} and control dim {}",
            dist.mean.dim(),
            config.horizon,
            limits.dim()
        )));
    }
    let paths = config.tensor_count();
    let tensor_rows = if paths > 0 {
        tensor_sample(
            config.layers,
            config.nodes,
            paths,
            config.interpolation,
            config.horizon,
            &limits,
            rng,
        )?
    } else {
        Array3::zeros((0, config.horizon, limits.dim()))
    };
    let controls = mix_samples(tensor_rows.view(), dist, config.samples, &limits, rng)?;
    let costs = evaluate_candidates(controls.view(), models, x0)?;
    let update = softmax_elite_update(controls.view(), costs.summed.view(), config, dist, &limits)?;
    let diagnostics = StepDiagnostics::from_costs(costs.summed.view(), update.elite_indices.clone(), update.degenerate);
    let next = GaussianControlDistribution {
        mean: update.new_mean,
        std: update.new_std,
    };
    Ok((update.best_control, next, diagnostics))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutput {
    pub control: Vec<f64>,
    pub diagnostics: StepDiagnostics,
}

/// Receding-horizon planner interface shared by MTP and the baselines.
pub trait Planner<E: Environment> {
    fn name(&self) -> String;
    fn plan(&mut self, state: &[f64], models: &[E], rng: &mut PlannerRng) -> Result<PlanOutput>;
    /// Warm start after executing `steps` controls.
    fn shift(&mut self, steps: usize);
    fn distribution(&self) -> &GaussianControlDistribution;
}

/// Initial distribution centred in the control box.
pub fn initial_distribution(horizon: usize, limits: &ControlLimits, std: f64) -> GaussianControlDistribution {
    let mut dist = GaussianControlDistribution::constant(horizon, limits.dim(), std);
    for mut row in dist.mean.rows_mut() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = 0.5 * (limits.lo()[k] + limits.hi()[k]);
        }
    }
    dist
}

#[derive(Debug, Clone)]
pub struct MtpPlanner {
    pub config: PlannerConfig,
    dist: GaussianControlDistribution,
}

impl MtpPlanner {
    pub fn new(config: PlannerConfig, limits: &ControlLimits) -> Result<Self> {
        config.validate()?;
        let dist = initial_distribution(config.horizon, limits, config.init_std);
        Ok(Self { config, dist })
    }

    pub fn with_distribution(config: PlannerConfig, dist: GaussianControlDistribution) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, dist })
    }
}

impl<E: Environment> Planner<E> for MtpPlanner {
    fn name(&self) -> String {
        format!("mtp-{}", self.config.interpolation.name())
    }

    fn plan(&mut self, state: &[f64], models: &[E], rng: &mut PlannerRng) -> Result<PlanOutput> {
        let (control, dist, diagnostics) = plan_step(state, &self.dist, &self.config, models, rng)?;
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::ZeroCost;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn limits1() -> ControlLimits {
        ControlLimits::symmetric(1, 1.0).unwrap()
    }

    fn cfg(samples: usize, elites: usize) -> PlannerConfig {
        PlannerConfig {
            samples,
            elites,
            horizon: 2,
            mixing: 0.0,
            ..PlannerConfig::default()
        }
    }

    #[test]
    fn tensor_count_clamps_to_leave_nominal() {
        let mut c = PlannerConfig {
            samples: 10,
            ..Default::default()
        };
        c.mixing = 0.0;
        assert_eq!(c.tensor_count(), 0);
        c.mixing = 0.55;
        assert_eq!(c.tensor_count(), 5);
        c.mixing = 1.0;
        assert_eq!(c.tensor_count(), 9);
    }

    #[test]
    fn mixing_row_layout() {
        let limits = limits1();
        let dist = GaussianControlDistribution::new(array![[0.25], [0.5]], array![[0.3], [0.3]]).unwrap();
        let tensor = Array3::from_elem((3, 2, 1), 0.9);
        let mut rng = PlannerRng::seed_from_u64(0);
        let u = mix_samples(tensor.view(), &dist, 8, &limits, &mut rng).unwrap();
        assert_eq!(u.dim(), (8, 2, 1));
        for b in 4..7 {
            assert_eq!(u.index_axis(Axis(0), b), tensor.index_axis(Axis(0), 0));
        }
        assert_eq!(u.index_axis(Axis(0), 7), dist.mean);
        // beta = 0: only local rows and the nominal
        let empty = Array3::zeros((0, 2, 1));
        let u = mix_samples(empty.view(), &dist, 5, &limits, &mut rng).unwrap();
        assert_eq!(u.index_axis(Axis(0), 4), dist.mean);
        // too many tensor rows
        let full = Array3::zeros((5, 2, 1));
        assert!(mix_samples(full.view(), &dist, 5, &limits, &mut rng).is_err());
    }

    #[test]
    fn tiny_std_local_rows_equal_mean() {
        let limits = limits1();
        let dist = GaussianControlDistribution::new(array![[0.25], [-0.5]], array![[1e-9], [1e-9]]).unwrap();
        let u = sample_local(&dist, 50, &limits, &mut PlannerRng::seed_from_u64(4));
        for b in 0..50 {
            for t in 0..2 {
                assert_abs_diff_eq!(u[[b, t, 0]], dist.mean[[t, 0]], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn two_elite_weights_are_analytic() {
        let lambda = 0.37;
        let w = softmax_weights(&[0.0, lambda * 2f64.ln()], lambda).unwrap();
        assert_abs_diff_eq!(w[0], 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn single_elite_copies_best_candidate() {
        let limits = limits1();
        let dist = GaussianControlDistribution::constant(2, 1, 0.5);
        let u = array![[[0.1], [0.2]], [[-0.4], [0.7]], [[0.9], [0.9]]];
        let s = array![3.0, 1.0, 2.0];
        let r = softmax_elite_update(u.view(), s.view(), &cfg(3, 1), &dist, &limits).unwrap();
        assert_eq!(r.new_mean, array![[-0.4], [0.7]]);
        assert_eq!(r.elite_indices, vec![1]);
        assert_eq!(r.best_control, vec![-0.4]);
        assert!(r.new_std.iter().all(|&s| s == 0.05));
    }

    #[test]
    fn equal_costs_give_uniform_weights() {
        let limits = limits1();
        let dist = GaussianControlDistribution::constant(2, 1, 0.5);
        let u = array![[[0.1], [0.2]], [[-0.4], [0.7]], [[0.9], [0.9]], [[0.0], [0.0]]];
        let s = array![1.0, 1.0, 1.0, 5.0];
        let r = softmax_elite_update(u.view(), s.view(), &cfg(4, 3), &dist, &limits).unwrap();
        for w in &r.weights {
            assert_abs_diff_eq!(*w, 1.0 / 3.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(r.new_mean[[0, 0]], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(r.new_mean[[1, 0]], 0.6, epsilon = 1e-15);
        // ties keep index order
        assert_eq!(r.elite_indices, vec![0, 1, 2]);
    }

    #[test]
    fn softmax_off_weights_elites_uniformly() {
        let limits = limits1();
        let dist = GaussianControlDistribution::constant(2, 1, 0.5);
        let u = array![[[0.1], [0.2]], [[-0.4], [0.7]], [[0.9], [0.9]]];
        let s = array![0.0, 10.0, 20.0];
        let c = PlannerConfig {
            softmax: false,
            ..cfg(3, 2)
        };
        let r = softmax_elite_update(u.view(), s.view(), &c, &dist, &limits).unwrap();
        assert_eq!(r.weights, vec![0.5, 0.5]);
        assert_abs_diff_eq!(r.new_mean[[0, 0]], -0.15, epsilon = 1e-15);
    }

    #[test]
    fn all_infinite_costs_keep_distribution() {
        let limits = limits1();
        let dist = GaussianControlDistribution::constant(2, 1, 0.5);
        let u = Array3::from_elem((3, 2, 1), 0.3);
        let s = array![f64::INFINITY, f64::INFINITY, f64::INFINITY];
        let r = softmax_elite_update(u.view(), s.view(), &cfg(3, 2), &dist, &limits).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.new_mean, dist.mean);
        assert_eq!(r.new_std, dist.std);
    }

    #[test]
    fn smoothing_follows_update_rule() {
        let limits = limits1();
        let dist = GaussianControlDistribution::new(array![[0.5], [0.5]], array![[0.4], [0.4]]).unwrap();
        let u = array![[[0.1], [0.1]], [[0.3], [0.3]]];
        let s = array![0.0, 0.0];
        let c = PlannerConfig {
            smoothing: 0.25,
            ..cfg(2, 2)
        };
        let r = softmax_elite_update(u.view(), s.view(), &c, &dist, &limits).unwrap();
        // mu' = 0.2, sigma' = max(0.01, 0.05^2)^0.5 = 0.1
        assert_abs_diff_eq!(r.new_mean[[0, 0]], 0.2 + 0.25 * (0.5 - 0.2), epsilon = 1e-15);
        assert_abs_diff_eq!(r.new_std[[0, 0]], 0.1 + 0.25 * (0.4 - 0.1), epsilon = 1e-15);
    }

    #[test]
    fn plan_step_is_deterministic_and_includes_nominal() {
        let env = ZeroCost::new(2, 0.1).unwrap();
        let config = PlannerConfig {
            samples: 32,
            horizon: 8,
            layers: 3,
            nodes: 5,
            mixing: 0.5,
            elites: 4,
            ..Default::default()
        };
        let dist = initial_distribution(8, env.control_limits(), 0.5);
        let a = plan_step(
            &[0.0, 0.0],
            &dist,
            &config,
            std::slice::from_ref(&env),
            &mut PlannerRng::seed_from_u64(3),
        )
        .unwrap();
        let b = plan_step(
            &[0.0, 0.0],
            &dist,
            &config,
            std::slice::from_ref(&env),
            &mut PlannerRng::seed_from_u64(3),
        )
        .unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        assert_eq!(a.2.costs.len(), 32);
        assert_abs_diff_eq!(a.2.entropy, 32f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad = [
            PlannerConfig {
                elites: 0,
                ..Default::default()
            },
            PlannerConfig {
                elites: 300,
                ..Default::default()
            },
            PlannerConfig {
                temperature: 0.0,
                ..Default::default()
            },
            PlannerConfig {
                smoothing: 1.0,
                ..Default::default()
            },
            PlannerConfig {
                mixing: 1.5,
                ..Default::default()
            },
            PlannerConfig {
                min_std: 0.0,
                ..Default::default()
            },
            PlannerConfig {
                interpolation: Interpolation::BSpline { degree: 5 },
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    proptest! {
        #[test]
        fn weights_form_a_simplex(costs in proptest::collection::vec(-1e300f64..1e300, 1..64), lambda in 1e-12f64..1e3) {
            let w = softmax_weights(&costs, lambda).unwrap();
            prop_assert!(w.iter().all(|&v| v >= 0.0 && v.is_finite()));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn cold_softmax_concentrates_on_argmin(mut costs in proptest::collection::vec(0.0f64..10.0, 2..32)) {
            costs.sort_by(f64::total_cmp);
            costs.dedup();
            prop_assume!(costs.len() >= 2 && costs[1] - costs[0] > 1e-9);
            let w = softmax_weights(&costs, 1e-12).unwrap();
            prop_assert!(w[0] >= 1.0 - 1e-6);
        }

        #[test]
        fn std_never_below_floor(vals in proptest::collection::vec(-1.0f64..1.0, 12), costs in proptest::collection::vec(0.0f64..5.0, 6)) {
            let limits = limits1();
            let u = Array3::from_shape_vec((6, 2, 1), vals).unwrap();
            let dist = GaussianControlDistribution::constant(2, 1, 0.5);
            let s = Array1::from(costs);
            let r = softmax_elite_update(u.view(), s.view(), &cfg(6, 3), &dist, &limits).unwrap();
            prop_assert!(r.new_std.iter().all(|&v| v >= 0.05));
            prop_assert!((r.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }
}
