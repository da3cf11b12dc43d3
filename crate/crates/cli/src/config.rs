//! Experiment configuration (TOML).
//!
//! Every section has defaults that encode the single-input cantilever study:
//! a 5 s chirp training record and a 1 s sine-burst test record at 5 kHz,
//! six displacement outputs and a WDMD fit with `J = 13`, `β = 1e-12`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wdmd::beamfem::{self, BeamSpec, Phase};
use wdmd::fit::{FitConfig, Method};
use wdmd::{SignalSpec, TimeGrid, WaveletBasis};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub beam: BeamSpec,
    pub train: RecordSpec,
    /// Separate record simulated from rest; omitted when absent.
    pub test: Option<RecordSpec>,
    pub fit: FitConfig,
    pub sweep: Option<SweepSpec>,
    pub metrics: MetricsSpec,
    pub paths: PathsSpec,
}

/// One simulated record: a sampling grid and its excitation phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordSpec {
    pub sample_rate: f64,
    pub duration: f64,
    pub phases: Vec<Phase>,
    /// Output noise level relative to each channel's RMS.
    #[serde(default)]
    pub noise_level: f64,
}

impl RecordSpec {
    pub fn grid(&self) -> Result<TimeGrid> {
        Ok(TimeGrid::from_rate(self.sample_rate, self.duration)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    /// Output counts `d`; nodes are picked by [`beamfem::equispaced_nodes`].
    pub outputs: Vec<usize>,
    pub betas: Vec<f64>,
    pub methods: Vec<Method>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            outputs: (2..=15).collect(),
            betas: vec![1e-12],
            methods: vec![Method::Wdmd],
        }
    }
}

/// Uniform FRF comparison grid in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSpec {
    pub f_min: f64,
    pub f_max: f64,
    pub points: usize,
    /// Reference modes tabulated in MAC tables.
    pub mac_modes: usize,
}

impl Default for MetricsSpec {
    fn default() -> Self {
        Self {
            f_min: 10.0,
            f_max: 800.0,
            points: 800,
            mac_modes: 6,
        }
    }
}

impl MetricsSpec {
    pub fn frequencies_hz(&self) -> Vec<f64> {
        frequency_grid(self.f_min, self.f_max, self.points)
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.frequencies_hz()
            .into_iter()
            .map(|f| 2.0 * std::f64::consts::PI * f)
            .collect()
    }
}

pub fn frequency_grid(f_min: f64, f_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![f_min],
        _ => (0..points)
            .map(|i| f_min + (f_max - f_min) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSpec {
    pub out_dir: PathBuf,
}

impl Default for PathsSpec {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("out"),
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            beam: BeamSpec::default(),
            train: RecordSpec {
                sample_rate: 5000.0,
                duration: 5.0,
                phases: vec![Phase::single(
                    5.0,
                    SignalSpec::Chirp {
                        amplitude: 1.0,
                        f0: 10.0,
                        f1: 800.0,
                    },
                )],
                noise_level: 0.0,
            },
            test: Some(RecordSpec {
                sample_rate: 5000.0,
                duration: 1.0,
                phases: vec![Phase::single(
                    1.0,
                    SignalSpec::SineBurst {
                        amplitude: 1.0,
                        f: 165.1,
                        cycles: 20,
                    },
                )],
                noise_level: 0.0,
            }),
            fit: FitConfig::default(),
            sweep: None,
            metrics: MetricsSpec::default(),
            paths: PathsSpec::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub beta: Option<f64>,
    pub level: Option<usize>,
    pub method: Option<Method>,
    pub outputs: Option<usize>,
    pub tau: Option<usize>,
    pub basis: Option<WaveletBasis>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Reads `path`, or returns the defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Self::from_toml(&text).map_err(|e| match e {
                    CliError::Config(msg) => CliError::format(p, msg),
                    other => other,
                })
            }
            None => Ok(Self::default()),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(beta) = o.beta {
            self.fit.beta = beta;
        }
        if let Some(level) = o.level {
            self.fit.levels = level;
        }
        if let Some(method) = o.method {
            self.fit.method = method;
        }
        if let Some(tau) = o.tau {
            self.fit.tau = tau;
        }
        if let Some(basis) = o.basis {
            self.fit.basis = basis;
        }
        if let Some(d) = o.outputs {
            self.beam.output_nodes = beamfem::equispaced_nodes(self.beam.n_nodes, d)?;
        }
        if let Some(dir) = &o.out_dir {
            self.paths.out_dir = dir.clone();
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.beam.validate()?;
        self.fit.validate()?;
        for (name, rec) in std::iter::once(("train", &self.train)).chain(self.test.as_ref().map(|t| ("test", t))) {
            let grid = rec.grid()?;
            beamfem::render_inputs(&rec.phases, &grid, self.beam.force_nodes.len()).map_err(|e| {
                CliError::Config(format!("{name} record: {e}"))
            })?;
            if !(rec.noise_level >= 0.0) {
                return Err(CliError::Config(format!("{name} noise level must be >= 0")));
            }
        }
        if let Some(s) = &self.sweep {
            if s.outputs.is_empty() || s.betas.is_empty() || s.methods.is_empty() {
                return Err(CliError::Config("sweep grids must be nonempty".into()));
            }
            for &d in &s.outputs {
                beamfem::equispaced_nodes(self.beam.n_nodes, d)?;
            }
            if let Some(b) = s.betas.iter().find(|b| !(**b > 0.0)) {
                return Err(CliError::Config(format!("sweep beta must be positive, got {b}")));
            }
        }
        let m = &self.metrics;
        if m.points < 1 || !(m.f_min > 0.0) || !(m.f_max >= m.f_min) {
            return Err(CliError::Config(format!(
                "metrics grid needs points >= 1 and 0 < f_min <= f_max, got {}..{} ({} points)",
                m.f_min, m.f_max, m.points
            )));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, so equivalent files hash alike.
    /// Output locations are excluded: they do not change any result.
    pub fn digest(&self) -> String {
        let canonical = Self {
            paths: PathsSpec::default(),
            ..self.clone()
        };
        sha256_hex(serde_json::to_string(&canonical).expect("config serializes").as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
