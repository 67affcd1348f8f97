//! Config-driven runner for the `gkh-core` checks.
//!
//! A run reads one JSON configuration, executes its task and writes a JSON
//! report plus any CSV tables into the output directory. Exit codes: `0`
//! when every verdict passes, `2` when a check fails and `1` on
//! configuration or numerical errors.

pub mod config;
pub mod report;
mod sweep;
mod tasks;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::Value;

use crate::report::{write_atomic, ErrorInfo, RunReport, Status, Timing};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] gkh_core::Error),
}

impl RunError {
    pub fn name(&self) -> &'static str {
        match self {
            RunError::Config { .. } => "ConfigError",
            RunError::Io(_) => "IoError",
            RunError::Core(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub normalize_report: bool,
    pub quiet: bool,
    /// Worker threads; `0` lets the pool decide.
    pub jobs: usize,
}

fn read_config(path: &Path) -> Result<Value, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| RunError::Config {
        path: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}

fn write_outputs(
    opts: &RunOptions,
    report: &RunReport,
    files: &[(String, Vec<u8>)],
    name: &str,
) -> Result<(), RunError> {
    let io = |e: std::io::Error| RunError::Io(format!("{}: {e}", opts.out.display()));
    std::fs::create_dir_all(&opts.out).map_err(io)?;
    for (file, bytes) in files {
        write_atomic(&opts.out.join(file), bytes).map_err(io)?;
    }
    write_atomic(&opts.out.join(name), report.to_json().as_bytes()).map_err(io)
}

fn fail(err: &RunError) -> i32 {
    eprintln!("error: {}: {err}", err.name());
    Status::Error.exit_code()
}

/// Runs one configuration and returns the process exit code.
pub fn run(opts: &RunOptions) -> i32 {
    let started = Instant::now();
    let value = match read_config(&opts.config) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let cfg = match config::parse(&value) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(opts.jobs).build() {
        Ok(p) => p,
        Err(e) => return fail(&RunError::Io(e.to_string())),
    };
    let outcome = pool.install(|| tasks::execute(&cfg));

    let mut report = RunReport::new(&value, cfg.task.name());
    let mut files = Vec::new();
    let mut error = None;
    match outcome {
        Ok(out) => {
            let failed = out.failed || out.checks.iter().any(|c| !c.passed());
            report.status = if failed { Status::Fail } else { Status::Pass };
            report.checks = out.checks;
            report.results = out.results;
            report.warnings = out.warnings;
            report.artifacts = out.files.iter().map(|(n, _)| n.clone()).collect();
            files = out.files;
        }
        Err(e) => {
            report.status = Status::Error;
            report.error = Some(ErrorInfo {
                name: e.name().into(),
                message: e.to_string(),
            });
            error = Some(e);
        }
    }
    if !opts.normalize_report {
        report.timing = Some(Timing {
            elapsed_seconds: started.elapsed().as_secs_f64(),
        });
    }
    if let Err(e) = write_outputs(opts, &report, &files, &cfg.output.report) {
        return fail(&e);
    }
    if let Some(e) = error {
        return fail(&e);
    }
    if !opts.quiet {
        summarize(&report, &opts.out.join(&cfg.output.report));
    }
    report.status.exit_code()
}

fn summarize(report: &RunReport, path: &Path) {
    for c in &report.checks {
        let verdict = if c.passed() { "pass" } else { "FAIL" };
        println!(
            "{:?}: lhs {:.12e} rhs {:.12e} residual {:.3e} (tol {:.1e}) {verdict}",
            c.kind, c.lhs, c.rhs, c.residual, c.tolerance
        );
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    println!("{}: {} -> {}", report.task, report.status.as_str(), path.display());
}
