use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::{error, info};
use qsync_cli::config::{parse_config_with, Format, Overrides};
use qsync_cli::output::{summary_line, write_report};
use qsync_cli::execute;

const VALIDATION_ERROR: u8 = 1;
const RUNTIME_ERROR: u8 = 2;

/// Run a clock-synchronization scenario described by a TOML config.
#[derive(Debug, Parser)]
#[command(name = "qsync", version)]
struct Args {
    /// Scenario config file.
    config: PathBuf,

    /// Directory for the summary, outcome, timing and state files.
    #[arg(short, long, default_value = "qsync-out")]
    out_dir: PathBuf,

    /// Output format; overrides `output.format`.
    #[arg(short, long, value_enum)]
    format: Option<Format>,

    /// Seed; overrides `seed`.
    #[arg(short, long)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(short, long)]
    jobs: Option<usize>,

    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = match args.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    if let Some(jobs) = args.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            error!("could not set up {jobs} worker threads: {e}");
            return ExitCode::from(RUNTIME_ERROR);
        }
    }

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(VALIDATION_ERROR);
        }
    };
    let overrides = Overrides {
        seed: args.seed,
        format: args.format,
    };
    let config = match parse_config_with(&text, overrides) {
        Ok(c) => c,
        Err(errs) => {
            eprintln!("error: invalid config {}", args.config.display());
            for e in &errs.0 {
                eprintln!("  {e}");
            }
            return ExitCode::from(VALIDATION_ERROR);
        }
    };

    let report = match execute(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(RUNTIME_ERROR);
        }
    };
    for row in &report.summary {
        println!("{}", summary_line(row));
    }
    match write_report(&report, &args.out_dir, config.output.format) {
        Ok(paths) => {
            for p in paths {
                info!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: cannot write to {}: {e}", args.out_dir.display());
            ExitCode::from(RUNTIME_ERROR)
        }
    }
}
