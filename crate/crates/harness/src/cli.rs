//! Command-line entry point.

use crate::config::{load_config, parse_config, schema_help, ExperimentKind};
use crate::experiments::{run_experiment, BOUNDS_COLUMNS, FT_COLUMNS};
use crate::fit::FIT_COLUMNS;
use crate::table::{write_results, SWEEP_COLUMNS};
use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

/// Environment variable consulted for the worker count when neither
/// `--threads` nor the config's `threads` key is given.
pub const THREADS_ENV: &str = "SIMMAP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "simmap", version, about = "Noisy problem-to-simulator mapping sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (`key = value` lines)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV; overrides the config's `output`, stdout when neither is set
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the config's `seed`
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// No progress messages on stderr
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Gaussian engine against the dense oracle (N ≤ 6)
    Validate,
    /// Product-formula error vs steps, size and noise
    TrotterSweep,
    /// Driven chain error vs period, size and noise
    FloquetSweep,
    /// Perturbative demo error vs uptau and noise
    SwSweep,
    /// Optimal-control tradeoff calculators
    Bounds,
    /// Concatenated-code level counts
    FtOverhead,
    /// Log-log fit of two columns of an existing CSV
    Fit,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::Validate => ExperimentKind::Validate,
            Command::TrotterSweep => ExperimentKind::TrotterSweep,
            Command::FloquetSweep => ExperimentKind::FloquetSweep,
            Command::SwSweep => ExperimentKind::SwSweep,
            Command::Bounds => ExperimentKind::Bounds,
            Command::FtOverhead => ExperimentKind::FtOverhead,
            Command::Fit => ExperimentKind::Fit,
        }
    }
}

fn long_help() -> String {
    format!(
        "Config keys (key  kinds):\n{}\nCSV columns:\n  sweeps:      {}\n  bounds:      {}\n  ft-overhead: {}\n  fit:         {}\n\n\
         Exit codes: 0 success, 1 config/usage error, 2 runtime error.\n\
         Threads: --threads, else config `threads`, else ${THREADS_ENV}, else all cores.",
        schema_help(),
        SWEEP_COLUMNS.join(","),
        BOUNDS_COLUMNS.join(","),
        FT_COLUMNS.join(","),
        FIT_COLUMNS.join(",")
    )
}

/// Run the CLI on `args` (program name first); returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = Cli::command().after_long_help(long_help()).try_get_matches_from(args);
    let cli = match matches.and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(stderr, "{text}") } else { write!(stdout, "{text}") };
            return code;
        }
    };
    let kind = cli.command.kind();
    let cfg = match &cli.config {
        Some(p) => load_config(p, Some(kind)),
        None => parse_config("", Some(kind)),
    };
    let mut cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "config error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let threads = match cli.threads.or(cfg.threads) {
        Some(0) => {
            let _ = writeln!(stderr, "config error: --threads must be at least 1");
            return EXIT_CONFIG;
        }
        Some(t) => Some(t),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(t) if t > 0 => Some(t),
                _ => {
                    let _ = writeln!(stderr, "config error: {THREADS_ENV}=`{v}` is not a positive integer");
                    return EXIT_CONFIG;
                }
            },
            Err(_) => None,
        },
    };
    if !cli.quiet {
        let _ = writeln!(stderr, "running {kind}");
    }
    let started = std::time::Instant::now();
    let output = match run_experiment(&cfg, threads) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_RUNTIME;
        }
    };
    let table = output.table(&cfg);
    let target = cli.out.or(cfg.output.clone());
    let written = match &target {
        Some(p) => write_results(&table, p),
        None => stdout.write_all(&table.to_csv_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_RUNTIME;
    }
    if !cli.quiet {
        let dest = target.map(|p| p.display().to_string()).unwrap_or_else(|| "stdout".into());
        let _ = writeln!(stderr, "{} rows -> {dest} in {:.2?}", table.rows.len(), started.elapsed());
    }
    EXIT_OK
}
