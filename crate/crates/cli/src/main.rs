//! `glyphforge` command-line driver.
//!
//! Exit codes: 0 ok, 1 usage or other failure, 2 I/O, 3 constraint parse,
//! 4 dataset load, 5 layout schema.

mod commands;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "glyphforge", version, about = "Text-logo layout synthesis, solving and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic annotated dataset.
    Synth {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lay out every sample of a dataset (or a single sample directory) with the annealing solver.
    Solve {
        /// Dataset root, sample directory or annotation.json.
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides each sample's own constraint.
        #[arg(long)]
        constraint: Option<String>,
        /// Solver config JSON; missing fields take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write render.png per sample.
        #[arg(long)]
        render: bool,
        /// Also write trace.json per sample.
        #[arg(long)]
        trace: bool,
    },
    /// Score layouts against a dataset.
    Eval {
        dataset: PathBuf,
        /// gt, rule-a, rule-b, or a directory written by `solve`.
        #[arg(long, default_value = "gt")]
        source: String,
        /// Check every sample against this constraint instead of its own.
        #[arg(long)]
        constraint: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the JSON report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check a layout JSON record, optionally against a sample's words.
    Validate {
        layout: PathBuf,
        /// Sample directory whose text the record must match.
        #[arg(long)]
        sample: Option<PathBuf>,
        /// Expected text, as an alternative to --sample.
        #[arg(long, conflicts_with = "sample")]
        text: Option<String>,
    },
    /// Print patch features and pooled tokens for a mask PNG.
    InspectFeatures {
        mask: PathBuf,
        #[arg(long, default_value_t = 24)]
        grid: usize,
        #[arg(long, default_value_t = 4)]
        pool: usize,
    },
}

pub const EXIT_IO: u8 = 2;
pub const EXIT_CONSTRAINT: u8 = 3;
pub const EXIT_DATASET: u8 = 4;
pub const EXIT_SCHEMA: u8 = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl fmt::Display) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub trait OrExit<T> {
    fn or_exit(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: fmt::Display> OrExit<T> for Result<T, E> {
    fn or_exit(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure::new(code, e))
    }
}

fn init_threads() {
    let Ok(v) = std::env::var("GLYPHFORGE_THREADS") else {
        return;
    };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size thread pool: {e}");
            }
        }
        _ => log::warn!("ignoring GLYPHFORGE_THREADS={v:?}"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    init_threads();
    let result = match cli.command {
        Command::Synth { count, seed, out } => commands::synth(count, seed, &out),
        Command::Solve {
            input,
            out,
            constraint,
            config,
            seed,
            render,
            trace,
        } => commands::solve(&commands::SolveArgs {
            input,
            out,
            constraint,
            config,
            seed,
            render,
            trace,
        }),
        Command::Eval {
            dataset,
            source,
            constraint,
            seed,
            report,
        } => commands::eval(&dataset, &source, constraint.as_deref(), seed, report.as_deref()),
        Command::Validate { layout, sample, text } => commands::validate(&layout, sample.as_deref(), text.as_deref()),
        Command::InspectFeatures { mask, grid, pool } => commands::inspect_features(&mask, grid, pool),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
