//! Batch front-end for wavelet DMD identification experiments: dataset
//! generation, fitting, simulation, FRF/mode/MAC evaluation, sweeps.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod sweep;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use wdmd::fit::Method;
use wdmd::WaveletBasis;

pub use config::{ExperimentConfig, Overrides};
pub use error::{CliError, Result};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "WDMD_THREADS";

#[derive(Debug, Parser)]
#[command(name = "wdmd", version, about = "Wavelet DMD system identification")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand; flags override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Experiment configuration (TOML); built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Singular-value truncation threshold relative to the largest.
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// MODWT decomposition level J.
    #[arg(long, global = true)]
    pub level: Option<usize>,
    /// dmd, dmdc, iodmd, wdmd or delay_dmd.
    #[arg(long, global = true, value_parser = parse_method)]
    pub method: Option<Method>,
    /// Number of equispaced displacement outputs on the beam.
    #[arg(long, global = true)]
    pub outputs: Option<usize>,
    /// Delay embedding dimension.
    #[arg(long, global = true)]
    pub tau: Option<usize>,
    /// Wavelet observables: modwt (coefficients) or mra (details/smooth).
    #[arg(long, global = true, value_parser = parse_basis)]
    pub basis: Option<WaveletBasis>,
    /// Output directory (generate, default file locations).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: wdmd::Error| e.to_string())
}

fn parse_basis(s: &str) -> std::result::Result<WaveletBasis, String> {
    s.parse().map_err(|e: wdmd::Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the configured beam records and write CSVs, truth model and manifest.
    Generate,
    /// Fit a model to a trajectory CSV.
    Fit {
        /// Trajectory CSV; defaults to <out_dir>/train.csv.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Full-state CSV (required by dmd, dmdc and iodmd).
        #[arg(long)]
        states: Option<PathBuf>,
        /// Model JSON; defaults to <out_dir>/model.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Drive a saved model with the inputs of a trajectory CSV.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Saved state to start from instead of rest.
        #[arg(long)]
        z0: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Where to save the state after the last sample.
        #[arg(long)]
        final_state: Option<PathBuf>,
    },
    /// Write a model's frequency response on the metrics grid.
    Frf {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a model's eigen-modes.
    Modes {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time/frequency errors and MAC of a model on a record.
    Eval(EvalArgs),
    /// Fit and evaluate every (method, d, beta) cell of the [sweep] section.
    Sweep {
        /// Long-format CSV; defaults to <out_dir>/sweep.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the MODWT coefficients of one CSV column.
    ModwtDump {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "y1")]
        column: String,
        #[arg(long, default_value = "haar")]
        bank: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Record to evaluate on.
    #[arg(long)]
    pub data: PathBuf,
    /// Reference model JSON for eps_fd and MAC.
    #[arg(long, conflicts_with = "beam")]
    pub truth: Option<PathBuf>,
    /// Use the configured continuous beam as the reference.
    #[arg(long)]
    pub beam: bool,
    /// Report JSON; printed only when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// MAC table CSV.
    #[arg(long)]
    pub mac: Option<PathBuf>,
}

impl Common {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            beta: self.beta,
            level: self.level,
            method: self.method,
            outputs: self.outputs,
            tau: self.tau,
            basis: self.basis,
            out_dir: self.out_dir.clone(),
        }
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(self.config.as_deref())?;
        cfg.apply(&self.overrides())?;
        Ok(cfg)
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("summaries serialize")
}

fn or_default(path: Option<PathBuf>, dir: &Path, name: &str) -> PathBuf {
    path.unwrap_or_else(|| dir.join(name))
}

/// Runs one command and returns the JSON summary for stdout.
pub fn run(cli: Cli) -> Result<String> {
    let cfg = cli.common.experiment()?;
    let dir = cfg.paths.out_dir.clone();
    Ok(match cli.command {
        Command::Generate => json(&commands::generate(&cfg)?),
        Command::Fit { data, states, out } => {
            let data = or_default(data, &dir, commands::TRAIN_CSV);
            let states = match states {
                Some(s) => Some(s),
                None if cfg.fit.method.needs_states() => {
                    let guess = data.with_file_name(format!(
                        "{}_states.csv",
                        data.file_stem().and_then(|s| s.to_str()).unwrap_or("train")
                    ));
                    guess.exists().then_some(guess)
                }
                None => None,
            };
            let out = or_default(out, &dir, "model.json");
            json(&commands::fit(&cfg, &data, states.as_deref(), &out)?)
        }
        Command::Simulate {
            model,
            input,
            z0,
            out,
            final_state,
        } => json(&commands::simulate(
            &model,
            &input,
            z0.as_deref(),
            &out,
            final_state.as_deref(),
        )?),
        Command::Frf { model, out } => json(&commands::frf(&model, &cfg.metrics, &out)?),
        Command::Modes { model, out } => json(&commands::modes(&model, &out)?),
        Command::Eval(args) => {
            let reference = match (&args.truth, args.beam) {
                (Some(p), _) => commands::Reference::Truth(p.clone()),
                (None, true) => commands::Reference::Beam(Box::new(cfg.clone())),
                (None, false) => commands::Reference::Empirical,
            };
            let report = commands::eval(&args.model, &args.data, &reference, &cfg.metrics, args.mac.as_deref())?;
            if let Some(p) = &args.out {
                io::write_json(p, &report)?;
            }
            json(&report)
        }
        Command::Sweep { out } => {
            let spec = sweep::spec_of(&cfg)?;
            let rows = sweep::run(&cfg, &spec)?;
            let out = or_default(out, &dir, "sweep.csv");
            sweep::write(&out, &rows)?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            json(&serde_json::json!({ "cells": rows.len(), "failed": failed, "out": out }))
        }
        Command::ModwtDump {
            data,
            column,
            bank,
            out,
        } => json(&commands::modwt_dump(
            &data,
            &column,
            cfg.fit.levels,
            &bank,
            cfg.fit.basis,
            &out,
        )?),
    })
}

/// Sizes the global worker pool from [`THREADS_ENV`] when set.
pub fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}
