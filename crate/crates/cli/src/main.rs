use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gkh_cli::{run, RunOptions};

/// Runs a virial, Hellmann-Feynman, comparison, simulation, kernel
/// validation or sweep experiment described by a JSON configuration.
#[derive(Debug, Parser)]
#[command(name = "gkh", version)]
struct Args {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving the report and tables.
    #[arg(long, default_value = "./out")]
    out: PathBuf,
    /// Omit timing so that reports of identical runs are byte-identical.
    #[arg(long)]
    normalize_report: bool,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
    /// Worker threads for parallel grids (0: one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = run(&RunOptions {
        config: args.config,
        out: args.out,
        normalize_report: args.normalize_report,
        quiet: args.quiet,
        jobs: args.jobs,
    });
    ExitCode::from(code as u8)
}
