//! Experiment configuration, read from TOML with one section per concern.

use std::path::{Path, PathBuf};

use mtp_core::baselines::{CemConfig, MppiConfig, PsConfig};
use mtp_core::env::{DoubleIntegratorParams, NavigationLayout, NavigationParams, PendulumParams, Perturbation};
use mtp_core::PlannerConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const ENV_NAMES: &[&str] = &["navigation", "double-integrator", "pendulum", "zero"];
pub const PLANNER_NAMES: &[&str] = &["mtp-linear", "mtp-bspline", "mtp-akima", "cem", "mppi", "ps"];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub randomization: RandomizationSection,
    pub env: EnvSection,
    pub planner: PlannerSection,
    pub sweep: SweepSection,
    pub compare: CompareSection,
    pub coverage: CoverageSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub env: String,
    pub planner: String,
    pub seeds: Vec<u64>,
    pub max_steps: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            env: "navigation".into(),
            planner: "mtp-akima".into(),
            seeds: vec![0, 1, 2, 3, 4],
            max_steps: 300,
        }
    }
}

/// Model randomization. Unset fields fall back to per-environment defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomizationSection {
    /// Number of perturbed models `R` each candidate is evaluated under.
    pub models: Option<usize>,
    pub perturbations: Option<Vec<PerturbationSpec>>,
    /// Half-width of the uniform jitter added to the start position.
    pub start_jitter: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub parameter: String,
    pub perturbation: Perturbation,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvSection {
    pub navigation: NavigationSection,
    pub double_integrator: DoubleIntegratorParams,
    pub pendulum: PendulumParams,
    pub zero: ZeroSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NavigationSection {
    /// Layout file, resolved relative to the config file.
    pub layout_file: Option<PathBuf>,
    /// Inline layout; ignored when `layout_file` is set. Defaults to the U trap.
    pub layout: Option<NavigationLayout>,
    pub params: NavigationParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZeroSection {
    pub control_dim: usize,
    pub dt: f64,
}

impl Default for ZeroSection {
    fn default() -> Self {
        Self {
            control_dim: 2,
            dt: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSection {
    /// Shared by the three `mtp-*` planners; the name picks the interpolation.
    pub mtp: PlannerConfig,
    /// Degree used by `mtp-bspline`.
    pub bspline_degree: usize,
    pub cem: CemConfig,
    pub mppi: MppiConfig,
    pub ps: PsConfig,
}

impl Default for PlannerSection {
    fn default() -> Self {
        Self {
            mtp: PlannerConfig::default(),
            bspline_degree: 2,
            cem: CemConfig::default(),
            mppi: MppiConfig::default(),
            ps: PsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Beta,
    Elites,
    GridMn,
    BsplineDegree,
    SoftmaxOnoff,
}

impl SweepKind {
    pub fn name(&self) -> &'static str {
        match self {
            SweepKind::Beta => "beta",
            SweepKind::Elites => "elites",
            SweepKind::GridMn => "grid_mn",
            SweepKind::BsplineDegree => "bspline_degree",
            SweepKind::SoftmaxOnoff => "softmax_onoff",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub kind: SweepKind,
    /// Values for `beta`, `elites`, `bspline_degree`, and `softmax_onoff` (0 or 1).
    pub values: Vec<f64>,
    /// `(M, N)` pairs for `grid_mn`.
    pub grid: Vec<[usize; 2]>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            kind: SweepKind::Beta,
            values: vec![0.0, 0.5, 1.0],
            grid: vec![[3, 10], [5, 30], [8, 50]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    pub planners: Vec<String>,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            planners: vec!["mtp-akima".into(), "mtp-bspline".into(), "mppi".into(), "ps".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverageSection {
    /// `(M, N)` graph sizes to evaluate.
    pub grid: Vec<[usize; 2]>,
    pub draws: usize,
    /// Half-width of the square control box.
    pub bound: f64,
}

impl Default for CoverageSection {
    fn default() -> Self {
        Self {
            grid: vec![[3, 4], [5, 16], [9, 64]],
            draws: 20,
            bound: 1.0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    /// Loads a config file and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(layout) = &cfg.env.navigation.layout_file {
            if layout.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.env.navigation.layout_file = Some(base.join(layout));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Fills per-environment defaults and inlines the layout so the result is
    /// self-contained.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        if !ENV_NAMES.contains(&self.experiment.env.as_str()) {
            return Err(CliError::Config(format!(
                "unknown environment `{}` (expected one of {})",
                self.experiment.env,
                ENV_NAMES.join(", ")
            )));
        }
        if !PLANNER_NAMES.contains(&self.experiment.planner.as_str()) {
            return Err(CliError::Config(format!(
                "unknown planner `{}` (expected one of {})",
                self.experiment.planner,
                PLANNER_NAMES.join(", ")
            )));
        }
        for p in &self.compare.planners {
            if !PLANNER_NAMES.contains(&p.as_str()) {
                return Err(CliError::Config(format!("unknown planner `{p}` in compare list")));
            }
        }
        if self.experiment.seeds.is_empty() {
            return Err(CliError::Config("at least one seed is required".into()));
        }
        let nav = self.experiment.env == "navigation";
        let r = &mut self.randomization;
        r.models.get_or_insert(if nav { 8 } else { 1 });
        r.start_jitter.get_or_insert(if nav { 0.05 } else { 0.0 });
        r.perturbations.get_or_insert_with(|| {
            if nav {
                vec![PerturbationSpec {
                    parameter: "actuation_gain".into(),
                    perturbation: Perturbation::Relative { fraction: 0.1 },
                }]
            } else {
                Vec::new()
            }
        });
        if r.models == Some(0) {
            return Err(CliError::Config("randomization.models must be >= 1".into()));
        }
        if let Some(path) = self.env.navigation.layout_file.take() {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("cannot read layout {}: {e}", path.display())))?;
            let layout = NavigationLayout::from_toml(&text).map_err(|e| CliError::Config(e.to_string()))?;
            self.env.navigation.layout = Some(layout);
        }
        self.env.navigation.layout.get_or_insert_with(NavigationLayout::u_trap);
        Ok(self)
    }

    pub fn models(&self) -> usize {
        self.randomization.models.unwrap_or(1)
    }

    pub fn start_jitter(&self) -> f64 {
        self.randomization.start_jitter.unwrap_or(0.0)
    }

    pub fn perturbations(&self) -> &[PerturbationSpec] {
        self.randomization.perturbations.as_deref().unwrap_or(&[])
    }
}
