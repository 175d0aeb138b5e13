use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qsync_cli::run::{render_classification, render_validation};
use qsync_cli::{parse_config, run_experiment, write_outputs, CliError, THREADS_ENV};

#[derive(Parser)]
#[command(
    name = "qsync",
    version,
    about = "Simulate and verify synchronization dynamics of swap-coupled qubit networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured experiment and export CSV outputs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Directory receiving the CSV outputs (created if missing).
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Integrate both the dense and the orbit representation and report the
    /// maximum entrywise deviation.
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the orbit classification without integrating.
    Classify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check the config and report initial-state diagnostics.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        match value.parse::<usize>() {
            Ok(threads) if threads > 0 => {
                // A failure here means a pool already exists; keep going.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
            _ => eprintln!("warning: ignoring {THREADS_ENV}={value}: expected a positive integer"),
        }
    }
}

fn load(config: &PathBuf) -> Result<qsync_cli::Experiment, CliError> {
    let text = std::fs::read_to_string(config).map_err(|source| CliError::Io {
        path: config.display().to_string(),
        source,
    })?;
    parse_config(&text)?.resolve()
}

fn dispatch(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Run { config, out_dir } => {
            let exp = load(&config)?;
            let outcome = run_experiment(&exp)?;
            write_outputs(&outcome, &out_dir)?;
            print!("{}", outcome.report.render());
            if outcome.report.all_pass() {
                Ok(ExitCode::SUCCESS)
            } else {
                for m in outcome.report.failing() {
                    eprintln!("FAIL {}: {:e}", m.name, m.value);
                }
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Compare { config } => {
            let exp = load(&config)?;
            let mut exp = exp;
            exp.mode = qsync_cli::Mode::Compare;
            let outcome = run_experiment(&exp)?;
            print!("{}", outcome.report.render());
            if outcome.report.all_pass() {
                Ok(ExitCode::SUCCESS)
            } else {
                for m in outcome.report.failing() {
                    eprintln!("FAIL {}: {:e}", m.name, m.value);
                }
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Classify { config } => {
            let exp = load(&config)?;
            print!("{}", render_classification(&exp)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            let exp = load(&config)?;
            let (text, ok) = render_validation(&exp);
            print!("{text}");
            if ok {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("FAIL initial state validation");
                Ok(ExitCode::FAILURE)
            }
        }
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
