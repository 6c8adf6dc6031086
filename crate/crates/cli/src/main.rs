use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eqo_core::concentration::{mc_validate, validation_matrix};
use eqo_core::harness::config::ExperimentConfig;
use eqo_core::harness::csv::{
    aggregate_to_csv, bpi_summary_to_csv, mistake_summary_to_csv, parse_runs, read_text,
    runs_to_csv, write_text,
};
use eqo_core::harness::{aggregate, run_experiment, run_pac_experiment, PacTask};
use eqo_core::Error;

/// Environment variable that overrides `--jobs`.
const THREADS_ENV: &str = "EQO_BENCH_THREADS";

#[derive(Parser)]
#[command(
    name = "eqo-bench",
    version,
    about = "Seeded regret experiments for tabular episodic RL"
)]
struct Cli {
    /// Added to every seed in the configuration.
    #[arg(long, global = true, default_value_t = 0)]
    seed_offset: u64,
    /// Worker threads for the seed fan-out (overridden by EQO_BENCH_THREADS).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a regret experiment and write the per-run CSV.
    Run {
        config: PathBuf,
        /// Output path; defaults to the config's `output` key, else stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Mean and standard deviation across seeds of a per-run CSV.
    Aggregate {
        csv: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Monte-Carlo check of the concentration bounds.
    ValidateBounds {
        #[arg(long, default_value_t = 5000)]
        trials: u64,
        #[arg(long, default_value_t = 10_000)]
        n_max: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run (ε, δ)-EQO on the configured PAC task.
    Pac {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Per-run summary CSV; defaults to `<output>_summary.csv` when writing to a file.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(path: &Path, e: Error) -> Self {
        let message = match &e {
            Error::Parse { line, message } => format!("{}:{line}: {message}", path.display()),
            other => format!("{}: {other}", path.display()),
        };
        let code = if matches!(e, Error::Io { .. }) { 1 } else { 2 };
        Failure { code, message }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::Config(_) | Error::Parameter(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn jobs(flag: usize) -> Result<usize, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or(Failure {
                code: 2,
                message: format!("{THREADS_ENV} must be a positive integer, got '{v}'"),
            }),
        Err(_) => Ok(flag.max(1)),
    }
}

fn load_config(path: &Path, offset: u64) -> Result<ExperimentConfig, Failure> {
    ExperimentConfig::from_file(path)
        .map(|c| c.with_seed_offset(offset))
        .map_err(|e| Failure::config(path, e))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => Ok(write_text(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn summary_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().unwrap_or_default().to_string_lossy();
    output.with_file_name(format!("{stem}_summary.csv"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let say = |msg: String| {
        if !cli.quiet {
            eprintln!("{msg}");
        }
    };
    match &cli.command {
        Command::Run { config, output } => {
            let cfg = load_config(config, cli.seed_offset)?;
            let jobs = jobs(cli.jobs)?;
            say(format!(
                "running {} algorithm(s) x {} seed(s), K = {}, {jobs} worker(s)",
                cfg.algorithms.len(),
                cfg.seeds.len(),
                cfg.episodes
            ));
            let records = run_experiment(&cfg, jobs)?;
            let out = output.clone().or(cfg.output.clone());
            emit(out.as_deref(), &runs_to_csv(&records)?)?;
            if let Some(p) = out {
                say(format!("wrote {}", p.display()));
            }
        }
        Command::Aggregate { csv, output } => {
            let records = parse_runs(&read_text(csv)?).map_err(|e| Failure::config(csv, e))?;
            let rows = aggregate(&records)?;
            if rows.iter().any(|r| r.num_seeds == 1) {
                say("note: some algorithms have a single seed; their std is reported as 0".into());
            }
            emit(output.as_deref(), &aggregate_to_csv(&rows)?)?;
        }
        Command::ValidateBounds {
            trials,
            n_max,
            seed,
        } => {
            let mut all_ok = true;
            println!("cell,failures,trials,fraction,threshold,result");
            for cell in validation_matrix() {
                let rep = mc_validate(&cell.bound, &cell.generator, *n_max, *trials, *seed)?;
                let threshold = rep.threshold(cell.bound.delta());
                let ok = rep.failure_fraction() <= threshold;
                all_ok &= ok;
                println!(
                    "{},{},{},{:.6},{:.6},{}",
                    cell.label(),
                    rep.failures,
                    rep.trials,
                    rep.failure_fraction(),
                    threshold,
                    if ok { "PASS" } else { "FAIL" }
                );
            }
            if !all_ok {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Pac {
            config,
            output,
            summary,
        } => {
            let cfg = load_config(config, cli.seed_offset)?;
            let pac = cfg.pac.ok_or_else(|| Failure {
                code: 2,
                message: format!(
                    "{}: PAC runs need pac_epsilon and pac_delta",
                    config.display()
                ),
            })?;
            let jobs = jobs(cli.jobs)?;
            say(format!(
                "PAC task {:?}, epsilon = {}, delta = {}, {} seed(s), budget {}",
                pac.task,
                pac.epsilon,
                pac.delta,
                cfg.seeds.len(),
                cfg.episodes
            ));
            let records = run_pac_experiment(&cfg, jobs)?;
            let out = output.clone().or(cfg.output.clone());
            emit(out.as_deref(), &runs_to_csv(&records)?)?;
            let text = match pac.task {
                PacTask::Bpi => bpi_summary_to_csv(&records)?,
                PacTask::MistakePac => mistake_summary_to_csv(&records)?,
            };
            match summary.clone().or(out.as_deref().map(summary_path)) {
                Some(p) => {
                    write_text(&p, &text)?;
                    say(format!("wrote {}", p.display()));
                }
                None => say(text),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
