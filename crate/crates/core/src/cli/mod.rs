// SPDX-License-Identifier: Apache-2.0

//! Command layer behind the `mhk` binary.

mod runner;
mod spectra;
mod verify;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{io_err, ConfigDocument, LoadedConfig, PresetName, PresetSection};

pub use runner::{
    batch, execute, BatchReport, BatchSummary, HistogramBin, Hypothesis, RunReport, RunSummary,
};
pub use spectra::{spectra_report, SpectraReport};
pub use verify::{verify, CheckResult, CheckStatus, VerifyOptions, VerifyReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;
pub const EXIT_VERIFY_FAILED: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "mhk",
    version,
    about = "Mixed Hegselmann-Krause opinion dynamics: simulate and verify"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one run and write its trace and summary.
    Run(RunArgs),
    /// Run replicates with seeds seed, seed+1, ... and summarize stopping times.
    Batch(BatchArgs),
    /// Execute the inequality and certificate checks over a sweep.
    Verify(VerifyArgs),
    /// Spectrum, Cheeger constant and sandwich verdict of one graph.
    Spectra(SpectraArgs),
}

/// Flags shared by every config-driven command. Each overrides the file.
#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Horizon override; 0 records only the initial state.
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Replace the stubbornness, schedule and social sections by a preset.
    #[arg(long, value_parser = parse_preset)]
    pub preset: Option<PresetName>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Trace output (JSON Lines).
    #[arg(long, default_value = "trace.jsonl")]
    pub out: PathBuf,
    /// Summary output; defaults to the trace path with a `.summary.json` suffix.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Record wall-clock duration in the summary (makes it non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[arg(long)]
    pub replicates: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Summary output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Seeds checked; overrides `diagnostics.verify.replicates`.
    #[arg(long)]
    pub replicates: Option<u64>,
    /// Scale one row of the first mixing matrix to exercise the row-sum check.
    #[arg(long)]
    pub inject_fault: bool,
    /// Report output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectraArgs {
    /// Edge list such as `[[1,2],[2,3]]`, `{"n":4,"edges":[...]}`, or a file holding either.
    pub graph: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_preset(s: &str) -> std::result::Result<PresetName, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .map_err(|_| format!("unknown preset {s:?} (expected sync_hk, async_hk or deffuant)"))
}

impl ConfigArgs {
    /// Loads the document, applies flag overrides, then validates.
    pub fn load(&self) -> Result<LoadedConfig> {
        let text = fs::read_to_string(&self.config).map_err(|e| io_err(&self.config, e))?;
        let mut doc: ConfigDocument = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if let Some(seed) = self.seed {
            doc.model.seed = seed;
        }
        if let Some(delta) = self.delta {
            doc.diagnostics.delta = delta;
        }
        if let Some(name) = self.preset {
            let old = doc.preset.take();
            let (mu, host) = match old {
                Some(p) if name == PresetName::Deffuant => (p.mu, p.host),
                _ => (None, None),
            };
            doc.preset = Some(PresetSection { name, mu, host });
            doc.stubbornness = None;
            doc.schedule = None;
            doc.social = None;
            doc.model.mode = None;
        }
        let mut loaded = doc.expand()?;
        match self.steps {
            // A zero horizon is rejected by validation but meaningful as an
            // override: it records the initial state alone.
            Some(steps) => {
                loaded.model.horizon = steps.max(1);
                loaded.validate()?;
                loaded.model.horizon = steps;
            }
            None => loaded.validate()?,
        }
        Ok(loaded)
    }
}

pub(crate) fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Numerical {
        message: e.to_string(),
        residual: f64::NAN,
    })?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_err(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_err("<stdout>", e)),
    }
}

fn exit_for(err: &Error) -> u8 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

/// Runs a parsed command and returns its exit status.
pub fn dispatch(cli: Cli) -> u8 {
    let outcome = match cli.command {
        Command::Run(a) => runner::cmd_run(&a),
        Command::Batch(a) => runner::cmd_batch(&a),
        Command::Verify(a) => verify::cmd_verify(&a),
        Command::Spectra(a) => spectra::cmd_spectra(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}

/// Entry point: parse `args`, run, map every failure to an exit status.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    ExitCode::from(dispatch(cli))
}
