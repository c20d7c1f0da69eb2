use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mtp_cli::config::ExperimentConfig;
use mtp_cli::{run_compare, run_coverage, run_plan, run_sweep, CliError};

#[derive(Parser, Debug)]
#[command(name = "mtp", version, about = "Tensor-sampling MPC experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Receding-horizon runs of one planner, one per seed.
    Plan(Common),
    /// Vary one tensor-planner setting and record outcomes per value and seed.
    Sweep(Common),
    /// Run every planner in `compare.planners` on shared seeds.
    Compare(Common),
    /// Best-path distance to a circle target for several graph sizes.
    Coverage(Common),
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Experiment config (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed; repeat for several. Overrides the config's seed list.
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    planner: Option<String>,
    #[arg(long)]
    env: Option<String>,
}

fn load(args: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if !args.seeds.is_empty() {
        cfg.experiment.seeds = args.seeds.clone();
    }
    if let Some(p) = &args.planner {
        cfg.experiment.planner = p.clone();
    }
    if let Some(e) = &args.env {
        cfg.experiment.env = e.clone();
    }
    cfg.resolve()
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Plan(a) => {
            let cfg = load(&a)?;
            for r in run_plan(&cfg, &a.out)? {
                println!(
                    "seed {}: success={} steps={} cost={:.4}",
                    r.seed, r.success, r.steps_to_success, r.final_cost
                );
            }
        }
        Command::Sweep(a) => {
            let cfg = load(&a)?;
            for cell in run_sweep(&cfg, &a.out)? {
                let ok = cell.results.iter().filter(|r| r.success).count();
                println!(
                    "{} = {}: {ok}/{} successes",
                    cfg.sweep.kind.name(),
                    cell.label,
                    cell.results.len()
                );
            }
        }
        Command::Compare(a) => {
            let cfg = load(&a)?;
            let mut s = run_compare(&cfg, &a.out)?;
            s.sort_by_key(|s| s.rank);
            for p in s {
                println!(
                    "#{} {}: median steps {} ({}/{} successes), mean entropy {:.4}",
                    p.rank,
                    p.planner,
                    p.median_steps,
                    p.successes,
                    p.results.len(),
                    p.mean_entropy
                );
            }
        }
        Command::Coverage(a) => {
            let cfg = load(&a)?;
            for (seed, r) in run_coverage(&cfg, &a.out)? {
                println!(
                    "seed {seed} M={} N={}: median {:.4}, min {:.4}",
                    r.layers, r.nodes, r.median, r.min
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
