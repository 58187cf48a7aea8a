//! Config-driven experiments over the `xprop` library.
//!
//! Each [`Command`] validates the whole configuration into a [`config::Plan`]
//! before computing anything, writes its outputs below one directory and
//! finishes with `manifest.json` listing every produced file.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod output;
mod run;

use std::path::PathBuf;

pub use config::{ConfigError, ExperimentConfig};
pub use output::{Manifest, ManifestEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Classical,
    Propagate,
    KgSuite,
    Moments,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Classical => "classical",
            Self::Propagate => "propagate",
            Self::KgSuite => "kg-suite",
            Self::Moments => "moments",
        }
    }
}

pub const DEFAULT_OUT: &str = "xprop-out";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("computation failed: {0}")]
    Compute(#[from] xprop::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for configuration problems, 1 for everything discovered while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Compute(_) | Self::Io { .. } => 1,
        }
    }
}

/// One named acceptance check of a run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: String,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold: format!("<= {limit:e}"),
            pass: value <= limit,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.manifest.failures.is_empty()
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

/// Resolves `--out` and `--seed` against the config (flags win), validates
/// and runs `command`.
pub fn execute(
    command: Command,
    cfg: &ExperimentConfig,
    out: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<Outcome, CliError> {
    let plan = cfg.validate(command)?;
    let out_dir = out
        .or_else(|| {
            cfg.output
                .as_ref()
                .and_then(|o| o.dir.clone())
                .map(PathBuf::from)
        })
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let seed = seed.or(cfg.seed).unwrap_or(0);
    let mut sink = output::OutputDir::create(&out_dir)?;
    let checks = run::run(plan, seed, &mut sink)?;
    let manifest = sink.finish(command.name(), cfg.name.clone(), seed, checks)?;
    Ok(Outcome { out_dir, manifest })
}
