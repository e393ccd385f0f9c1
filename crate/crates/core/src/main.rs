use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use lmcma::engine::Mode;
use lmcma::harness::report::{cell_label, write_outputs};
use lmcma::harness::{ExperimentConfig, RunRecord};
use lmcma::objectives::BenchmarkFunction;

#[derive(Parser)]
#[command(
    name = "lmcma-bench",
    version,
    about = "Asynchronous LM-CMA-ES benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment matrix. Every list flag defaults to the full set.
    Run(MatrixArgs),
    /// Run one cell of the matrix.
    Single(SingleArgs),
}

#[derive(Args)]
struct Common {
    /// Repetitions per cell (default 100 without injection, 50 with).
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated descending thresholds, replacing the per-function defaults.
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    /// Evaluation budget per run.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    sample_period_ms: u64,
}

#[derive(Args)]
struct MatrixArgs {
    #[arg(long, value_delimiter = ',')]
    function: Option<Vec<BenchmarkFunction>>,
    #[arg(long, value_delimiter = ',')]
    dimension: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    complexity: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    workers: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    mode: Option<Vec<Mode>>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SingleArgs {
    #[arg(long)]
    function: BenchmarkFunction,
    #[arg(long, default_value_t = 100)]
    dimension: usize,
    #[arg(long, default_value_t = 0)]
    complexity: usize,
    #[arg(long, default_value_t = 2)]
    workers: usize,
    #[arg(long, default_value = "async")]
    mode: Mode,
    #[command(flatten)]
    common: Common,
}

fn apply_common(config: &mut ExperimentConfig, c: Common) {
    if let Some(r) = c.runs {
        config.repetitions = r;
        config.repetitions_heavy = r;
    }
    config.master_seed = c.seed;
    if let Some(t) = c.thresholds {
        for f in BenchmarkFunction::ALL {
            config.thresholds.insert(f, t.clone());
        }
    }
    if let Some(b) = c.budget {
        config.eval_budget = b;
    }
    config.output_dir = c.out;
    config.sample_period = Duration::from_millis(c.sample_period_ms.max(1));
}

fn build_config(command: Command) -> ExperimentConfig {
    let mut config = ExperimentConfig::default();
    match command {
        Command::Run(a) => {
            if let Some(v) = a.function {
                config.functions = v;
            }
            if let Some(v) = a.dimension {
                config.dimensions = v;
            }
            if let Some(v) = a.complexity {
                config.complexities = v;
            }
            if let Some(v) = a.workers {
                config.worker_counts = v;
            }
            if let Some(v) = a.mode {
                config.modes = v;
            }
            apply_common(&mut config, a.common);
        }
        Command::Single(a) => {
            config.functions = vec![a.function];
            config.dimensions = vec![a.dimension];
            config.complexities = vec![a.complexity];
            config.worker_counts = vec![a.workers];
            config.modes = vec![a.mode];
            apply_common(&mut config, a.common);
        }
    }
    config
}

fn report(r: &RunRecord) {
    let outcome = match &r.outcome {
        Ok(reason) => reason.name().to_string(),
        Err(e) => format!("error: {e}"),
    };
    eprintln!(
        "{} rep {:>3}: {outcome}, best {:.3e}, {} evals, {:.2} s",
        cell_label(&r.key),
        r.repetition,
        r.best_fitness,
        r.evals_used,
        r.wall_time
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = build_config(cli.command);
    let result = lmcma::harness::run_batch_with(&config, report)
        .and_then(|records| write_outputs(&records, &config.output_dir));
    match result {
        Ok(_) => {
            eprintln!("results written to {}", config.output_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
