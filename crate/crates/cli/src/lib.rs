//! Batch front end: parse a run configuration, run one experiment, and emit
//! CSV or JSON.

// `!(x > y)` is the NaN-rejecting form of every domain check here.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;

pub use config::{Experiment, OutputFormat, Params, RunConfig, Scale, SweepSpec};
pub use error::{CliError, Result};
use experiments::Plan;
pub use output::{data_section, emit_csv, emit_json, Cell, Metadata, Table};

#[derive(Debug, Parser)]
#[command(name = "weakdwell", version, about = "Weak-value dwell time experiments")]
pub struct Args {
    #[arg(value_enum)]
    pub experiment: Experiment,
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Drop the metadata block (config echo, wall time) for golden-file comparison.
    #[arg(long)]
    pub no_metadata: bool,
}

impl Args {
    pub fn into_config(self) -> Result<RunConfig> {
        let text = std::fs::read_to_string(&self.config).map_err(|e| CliError::io(&self.config, e))?;
        let params = Params::parse(&text)?;
        if self.workers == 0 {
            return Err(CliError::config("workers", "must be at least 1"));
        }
        Ok(RunConfig {
            experiment: self.experiment,
            params,
            output_path: self.out,
            format: self.format,
            workers: self.workers,
            metadata: !self.no_metadata,
        })
    }
}

/// Validates, computes and renders; nothing is written.
pub fn render(config: &RunConfig) -> Result<Vec<u8>> {
    if config.workers == 0 {
        return Err(CliError::config("workers", "must be at least 1"));
    }
    let start = Instant::now();
    let plan = Plan::build(config.experiment, &config.params)?;
    let outcome = plan.execute(config.workers)?;
    let metadata = config.metadata.then(|| Metadata {
        version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: config.experiment.name().to_string(),
        config: config.params.entries().to_vec(),
        summary: outcome.summary.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
    });
    let mut buf = Vec::new();
    let written = match config.format {
        OutputFormat::Csv => emit_csv(&outcome.table, metadata.as_ref(), &mut buf),
        OutputFormat::Json => emit_json(&outcome.table, metadata.as_ref(), &mut buf),
    };
    written.map_err(|e| CliError::Io { context: "rendering output".into(), source: e })?;
    Ok(buf)
}

/// Renders fully in memory, then writes once; a failed run leaves no file.
pub fn run(config: &RunConfig) -> Result<()> {
    let bytes = render(config)?;
    match &config.output_path {
        Some(path) => output::write_atomic(path, &bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io { context: "stdout".into(), source: e })
        }
    }
}
