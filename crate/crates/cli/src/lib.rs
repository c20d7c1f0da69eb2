//! Experiment harness for the tensor-sampling planner: single runs, parameter
//! sweeps, planner comparisons, and graph coverage measurements.
//!
//! Every command writes versioned CSV files (see [`csvio`]) and an
//! `effective_config.toml` echo into its output directory.

pub mod config;
pub mod csvio;
pub mod runner;

use std::f64::consts::PI;
use std::path::Path;

use mtp_core::diagnostics::{empirical_coverage, median, target_at_layers, CoverageReport};
use mtp_core::{ControlLimits, Interpolation, StepDiagnostics};
use rayon::prelude::*;

use config::{ExperimentConfig, SweepKind};
use csvio::CsvTable;
use runner::{planner_budget, run_seeds, seed_stream, EnvVisitor, EpisodeResult, Task};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn prepare_out(out: &Path, cfg: &ExperimentConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Runtime(format!("{}: {e}", out.display())))?;
    std::fs::write(out.join("effective_config.toml"), cfg.to_toml())
        .map_err(|e| CliError::Runtime(format!("writing effective config: {e}")))
}

fn steps_table(steps: &[StepDiagnostics]) -> CsvTable {
    let mut t = CsvTable::new("steps", &["step", "best_cost", "mean_cost", "entropy", "elapsed"]);
    for d in steps {
        t.push(d.csv_row().split(',').map(String::from).collect());
    }
    t
}

fn summary_row(planner: &str, env: &str, r: &EpisodeResult) -> Vec<String> {
    vec![
        planner.to_string(),
        env.to_string(),
        r.seed.to_string(),
        r.success.to_string(),
        r.steps_to_success.to_string(),
        r.final_cost.to_string(),
        r.mean_entropy.to_string(),
    ]
}

const SUMMARY_HEADER: &[&str] = &[
    "planner",
    "env",
    "seed",
    "success",
    "steps_to_success",
    "final_cost",
    "mean_entropy",
];

struct SeedsVisitor<'a> {
    cfg: &'a ExperimentConfig,
    planner: &'a str,
}

impl EnvVisitor<Vec<EpisodeResult>> for SeedsVisitor<'_> {
    fn visit<E: Task + Send + Sync>(self, env: &E) -> Result<Vec<EpisodeResult>, CliError> {
        run_seeds(env, self.cfg, self.planner)
    }
}

/// Runs the configured planner once per seed on the configured environment.
pub fn episodes(cfg: &ExperimentConfig, planner: &str) -> Result<Vec<EpisodeResult>, CliError> {
    runner::with_env(cfg, SeedsVisitor { cfg, planner })
}

/// `plan`: per-step diagnostics per seed plus a summary table.
pub fn run_plan(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<EpisodeResult>, CliError> {
    prepare_out(out, cfg)?;
    let planner = cfg.experiment.planner.as_str();
    let results = episodes(cfg, planner)?;
    let mut summary = CsvTable::new("summary", SUMMARY_HEADER);
    for r in &results {
        steps_table(&r.steps).write(&out.join(format!("steps_{planner}_seed{}.csv", r.seed)))?;
        summary.push(summary_row(planner, &cfg.experiment.env, r));
    }
    summary.write(&out.join("summary.csv"))?;
    Ok(results)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub label: String,
    pub results: Vec<EpisodeResult>,
}

fn sweep_cells(cfg: &ExperimentConfig) -> Result<Vec<(String, ExperimentConfig, String)>, CliError> {
    let base_planner = cfg.experiment.planner.clone();
    if !base_planner.starts_with("mtp-") {
        return Err(CliError::Config(format!(
            "sweeps vary tensor-planner settings; planner `{base_planner}` has none"
        )));
    }
    let s = &cfg.sweep;
    let int_value = |v: f64| -> Result<usize, CliError> {
        if v >= 0.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(CliError::Config(format!(
                "sweep value {v} must be a non-negative integer"
            )))
        }
    };
    let mut cells = Vec::new();
    if s.kind == SweepKind::GridMn {
        for &[m, n] in &s.grid {
            let mut c = cfg.clone();
            c.planner.mtp.layers = m;
            c.planner.mtp.nodes = n;
            cells.push((format!("{m}x{n}"), c, base_planner.clone()));
        }
    } else {
        for &v in &s.values {
            let mut c = cfg.clone();
            let mut planner = base_planner.clone();
            match s.kind {
                SweepKind::Beta => c.planner.mtp.mixing = v,
                SweepKind::Elites => c.planner.mtp.elites = int_value(v)?,
                SweepKind::BsplineDegree => {
                    c.planner.bspline_degree = int_value(v)?;
                    planner = "mtp-bspline".into();
                }
                SweepKind::SoftmaxOnoff => c.planner.mtp.softmax = v != 0.0,
                SweepKind::GridMn => unreachable!(),
            }
            cells.push((v.to_string(), c, planner));
        }
    }
    if cells.is_empty() {
        return Err(CliError::Config("sweep has no values".into()));
    }
    for (label, c, planner) in &cells {
        let pc = runner::mtp_config(c, planner).expect("mtp planner");
        pc.validate()
            .map_err(|e| CliError::Config(format!("sweep value {label}: {e}")))?;
    }
    Ok(cells)
}

/// `sweep`: one row per (sweep value, seed).
pub fn run_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<SweepCell>, CliError> {
    let cells = sweep_cells(cfg)?;
    prepare_out(out, cfg)?;
    let results: Vec<SweepCell> = cells
        .par_iter()
        .map(|(label, c, planner)| {
            Ok(SweepCell {
                label: label.clone(),
                results: episodes(c, planner)?,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let kind = cfg.sweep.kind.name();
    let mut t = CsvTable::new(
        "sweep",
        &[
            "sweep",
            "value",
            "seed",
            "final_cost",
            "success",
            "steps_to_success",
            "mean_entropy",
        ],
    );
    for cell in &results {
        for r in &cell.results {
            t.push(vec![
                kind.to_string(),
                cell.label.clone(),
                r.seed.to_string(),
                r.final_cost.to_string(),
                r.success.to_string(),
                r.steps_to_success.to_string(),
                r.mean_entropy.to_string(),
            ]);
        }
    }
    t.write(&out.join(format!("sweep_{kind}.csv")))?;
    Ok(results)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerSummary {
    pub planner: String,
    pub median_steps: f64,
    pub successes: usize,
    pub mean_entropy: f64,
    pub rank: usize,
    pub results: Vec<EpisodeResult>,
}

/// `compare`: several planners with a shared sample budget and horizon.
pub fn run_compare(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PlannerSummary>, CliError> {
    let planners = &cfg.compare.planners;
    if planners.is_empty() {
        return Err(CliError::Config("compare needs at least one planner".into()));
    }
    let budget = planner_budget(cfg, &planners[0]);
    for p in planners {
        if planner_budget(cfg, p) != budget {
            return Err(CliError::Config(format!(
                "planner `{p}` has (samples, horizon) {:?}, expected shared {:?}",
                planner_budget(cfg, p),
                budget
            )));
        }
    }
    prepare_out(out, cfg)?;
    let mut summaries = planners
        .iter()
        .map(|p| {
            let results = episodes(cfg, p)?;
            let steps: Vec<f64> = results.iter().map(|r| r.steps_to_success as f64).collect();
            Ok(PlannerSummary {
                planner: p.clone(),
                median_steps: median(&steps),
                successes: results.iter().filter(|r| r.success).count(),
                mean_entropy: results.iter().map(|r| r.mean_entropy).sum::<f64>() / results.len() as f64,
                rank: 0,
                results,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut order: Vec<usize> = (0..summaries.len()).collect();
    order.sort_by(|&a, &b| {
        summaries[a]
            .median_steps
            .total_cmp(&summaries[b].median_steps)
            .then(a.cmp(&b))
    });
    for (rank, &i) in order.iter().enumerate() {
        summaries[i].rank = rank + 1;
    }

    let env = &cfg.experiment.env;
    let mut per_seed = CsvTable::new("compare", SUMMARY_HEADER);
    let mut curves = CsvTable::new(
        "compare_curves",
        &[
            "planner",
            "seed",
            "step",
            "best_cost",
            "mean_cost",
            "entropy",
            "elapsed",
        ],
    );
    let mut ranking = CsvTable::new(
        "compare_summary",
        &[
            "rank",
            "planner",
            "median_steps_to_success",
            "successes",
            "seeds",
            "mean_entropy",
        ],
    );
    for s in &summaries {
        for r in &s.results {
            per_seed.push(summary_row(&s.planner, env, r));
            for d in &r.steps {
                let mut row = vec![s.planner.clone(), r.seed.to_string()];
                row.extend(d.csv_row().split(',').map(String::from));
                curves.push(row);
            }
        }
    }
    for &i in &order {
        let s = &summaries[i];
        ranking.push(vec![
            s.rank.to_string(),
            s.planner.clone(),
            s.median_steps.to_string(),
            s.successes.to_string(),
            s.results.len().to_string(),
            s.mean_entropy.to_string(),
        ]);
    }
    per_seed.write(&out.join("compare.csv"))?;
    curves.write(&out.join("compare_curves.csv"))?;
    ranking.write(&out.join("compare_summary.csv"))?;
    Ok(summaries)
}

/// Target path used by `coverage`: a circle of radius 1/2.
pub fn circle_target(t: f64) -> Vec<f64> {
    vec![0.5 * (2.0 * PI * t).sin(), 0.5 * (2.0 * PI * t).cos()]
}

/// `coverage`: best-path distance to the circle target for each `(M, N)`, per seed.
pub fn run_coverage(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<(u64, CoverageReport)>, CliError> {
    let c = &cfg.coverage;
    if c.grid.is_empty() || c.draws == 0 {
        return Err(CliError::Config(
            "coverage needs a non-empty grid and draws >= 1".into(),
        ));
    }
    let limits = ControlLimits::symmetric(2, c.bound).map_err(|e| CliError::Config(e.to_string()))?;
    for &[m, n] in &c.grid {
        if m < 2 || n < 1 {
            return Err(CliError::Config(format!(
                "coverage grid entry ({m}, {n}) needs M >= 2, N >= 1"
            )));
        }
    }
    prepare_out(out, cfg)?;
    let mut reports = Vec::new();
    for &seed in &cfg.experiment.seeds {
        let mut rng = seed_stream(seed, 3);
        for &[m, n] in &c.grid {
            let target = target_at_layers(m, circle_target).map_err(|e| CliError::Config(e.to_string()))?;
            let r = empirical_coverage("circle", target.view(), n, c.draws, &limits, &mut rng)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            reports.push((seed, r));
        }
    }
    let mut table = CsvTable::new(
        "coverage",
        &[
            "seed",
            "target",
            "layers",
            "nodes",
            "draws",
            "median",
            "min",
            "exhaustive",
        ],
    );
    let mut draws = CsvTable::new("coverage_draws", &["seed", "layers", "nodes", "draw", "distance"]);
    for (seed, r) in &reports {
        let mut row = vec![seed.to_string()];
        row.extend(r.csv_row().split(',').map(String::from));
        table.push(row);
        for (k, d) in r.distances.iter().enumerate() {
            draws.push(vec![
                seed.to_string(),
                r.layers.to_string(),
                r.nodes.to_string(),
                k.to_string(),
                d.to_string(),
            ]);
        }
    }
    table.write(&out.join("coverage.csv"))?;
    draws.write(&out.join("coverage_draws.csv"))?;
    Ok(reports)
}

/// Interpolation named in a `mtp-*` planner id, if any.
pub fn interpolation_of(cfg: &ExperimentConfig, planner: &str) -> Option<Interpolation> {
    runner::mtp_config(cfg, planner).map(|c| c.interpolation)
}
