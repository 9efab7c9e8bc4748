use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use svmpc::control::VariantName;
use svmpc_cli::commands;
use svmpc_cli::{CliError, ExperimentFile};

#[derive(Parser)]
#[command(name = "svmpc", version, about = "Stein variational uncertainty-adaptive MPC benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment file (TOML).
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    config_dump: bool,
}

#[derive(Args)]
struct BatchArgs {
    /// Number of seeds, counted up from `batch.base_seed`; overrides the
    /// file's seed list.
    #[arg(long)]
    seeds: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seeded trial.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the configured planner.
        #[arg(long)]
        method: Option<VariantName>,
    },
    /// Run a seed batch and write aggregate statistics.
    Batch {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        batch: BatchArgs,
        /// Planner(s) to run; `all` for every one. Defaults to the configured planner.
        #[arg(long, value_delimiter = ',')]
        method: Vec<String>,
        /// Also write per-trial trajectory CSVs.
        #[arg(long)]
        trajectories: bool,
    },
    /// Compare IMQ, RBF and constant kernels on identical seeds.
    AblateKernels {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        batch: BatchArgs,
    },
    /// Lap progress over time per planner on a track task.
    RaceProgress {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        batch: BatchArgs,
        /// Planner(s) to run; defaults to all.
        #[arg(long, value_delimiter = ',')]
        method: Vec<String>,
    },
}

fn parse_methods(raw: &[String], fallback: &[VariantName]) -> Result<Vec<VariantName>, CliError> {
    if raw.is_empty() {
        return Ok(fallback.to_vec());
    }
    let mut out = Vec::new();
    for m in raw {
        if m == "all" {
            out.extend(VariantName::ALL);
        } else {
            out.push(m.parse().map_err(|e: String| CliError::Config(format!("--method: {e}")))?);
        }
    }
    Ok(out)
}

fn seeds(file: &ExperimentFile, args: &BatchArgs) -> Result<Vec<u64>, CliError> {
    match args.seeds {
        Some(0) => Err(CliError::Config("--seeds: need at least one seed".into())),
        Some(n) => Ok((0..n as u64).map(|i| file.batch.base_seed + i).collect()),
        None => Ok(file.batch.seed_list()),
    }
}

fn jobs(args: &BatchArgs) -> usize {
    args.jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { common, seed, method } => {
            let mut file = ExperimentFile::load(&common.config)?;
            if let Some(m) = method {
                file = file.with_method(m);
            }
            if common.config_dump {
                print!("{}", file.to_toml());
                return Ok(0);
            }
            let result = commands::run(&file, seed, &common.out)?;
            println!(
                "{} seed {}: {:?} at t = {:.3} s ({} steps)",
                result.method,
                seed,
                result.terminal_reason,
                result.completion_time,
                result.steps.len()
            );
            Ok(commands::run_exit_code(&result))
        }
        Command::Batch {
            common,
            batch,
            method,
            trajectories,
        } => {
            let file = ExperimentFile::load(&common.config)?;
            let methods = parse_methods(&method, &[file.controller.variant])?;
            let seeds = seeds(&file, &batch)?;
            if common.config_dump {
                print!("{}", file.to_toml());
                return Ok(0);
            }
            let res = commands::batch(&file, &methods, &seeds, jobs(&batch), &common.out, trajectories)?;
            let rows: Vec<_> = res.iter().map(|b| (b.method.to_string(), b.summary.stats.clone())).collect();
            print!("{}", commands::stats_table("Method", &rows));
            Ok(0)
        }
        Command::AblateKernels { common, batch } => {
            let file = ExperimentFile::load(&common.config)?;
            let seeds = seeds(&file, &batch)?;
            if common.config_dump {
                print!("{}", file.to_toml());
                return Ok(0);
            }
            let res = commands::ablate_kernels(&file, &seeds, jobs(&batch), &common.out)?;
            let rows: Vec<_> = res.iter().map(|r| (r.kernel.to_string(), r.summary.stats.clone())).collect();
            print!("{}", commands::stats_table("Kernel", &rows));
            Ok(0)
        }
        Command::RaceProgress { common, batch, method } => {
            let file = ExperimentFile::load(&common.config)?;
            let methods = parse_methods(&method, &VariantName::ALL)?;
            let seeds = seeds(&file, &batch)?;
            if common.config_dump {
                print!("{}", file.to_toml());
                return Ok(0);
            }
            let res = commands::race_progress(&file, &methods, &seeds, jobs(&batch), &common.out)?;
            for r in &res {
                let best = r.best_lap_time.map_or("-".to_string(), |t| format!("{t:.3} s"));
                println!("{}: {}/{} laps, best {}", r.method, r.laps_completed, r.trials, best);
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
