//! Excitation signals and sampling grids.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform sampling grid `t_k = t0 + k * dt`, `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    #[serde(default)]
    pub t0: f64,
    pub dt: f64,
    pub count: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, count: usize) -> Result<Self> {
        let grid = Self { t0, dt, count };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid covering `[0, duration]` inclusive at sampling rate `fs`.
    pub fn from_rate(fs: f64, duration: f64) -> Result<Self> {
        if !(fs > 0.0) || !(duration > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "sampling rate and duration must be positive (fs={fs}, duration={duration})"
            )));
        }
        Self::new(0.0, 1.0 / fs, (duration * fs).round() as usize + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidSpec(format!("dt must be positive, got {}", self.dt)));
        }
        if self.count < 2 {
            return Err(Error::InvalidSpec(format!(
                "a grid needs at least two samples, got {}",
                self.count
            )));
        }
        if !self.t0.is_finite() {
            return Err(Error::InvalidSpec("t0 must be finite".into()));
        }
        Ok(())
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.time(k)).collect()
    }

    pub fn nyquist(&self) -> f64 {
        0.5 / self.dt
    }

    /// Time spanned from the first to the last sample.
    pub fn span(&self) -> f64 {
        (self.count - 1) as f64 * self.dt
    }
}

/// Deterministic excitation waveform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalSpec {
    /// Linear sweep from `f0` to `f1` Hz across the rendered grid.
    Chirp { amplitude: f64, f0: f64, f1: f64 },
    /// `cycles` periods of a sine at `f` Hz under a Hann envelope, then zeros.
    SineBurst { amplitude: f64, f: f64, cycles: u32 },
    Silence,
    /// Zero-mean Gaussian samples with standard deviation `amplitude`.
    WhiteNoise { amplitude: f64, seed: u64 },
}

impl SignalSpec {
    /// Checks the spec against a grid's sample period.
    pub fn validate(&self, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::InvalidSpec(format!("dt must be positive, got {dt}")));
        }
        let nyquist = 0.5 / dt;
        let check_amp = |a: f64| {
            if a > 0.0 && a.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("amplitude must be positive, got {a}")))
            }
        };
        let check_freq = |f: f64| {
            if f >= nyquist {
                Err(Error::NyquistViolation {
                    freq_hz: f,
                    nyquist_hz: nyquist,
                })
            } else {
                Ok(())
            }
        };
        match *self {
            SignalSpec::Chirp { amplitude, f0, f1 } => {
                check_amp(amplitude)?;
                if !(f0 >= 0.0) || !(f1 >= f0) {
                    return Err(Error::InvalidSpec(format!(
                        "chirp needs 0 <= f0 <= f1, got f0={f0}, f1={f1}"
                    )));
                }
                check_freq(f1)
            }
            SignalSpec::SineBurst {
                amplitude,
                f,
                cycles,
            } => {
                check_amp(amplitude)?;
                if !(f > 0.0) || cycles < 1 {
                    return Err(Error::InvalidSpec(format!(
                        "sine burst needs f > 0 and cycles >= 1, got f={f}, cycles={cycles}"
                    )));
                }
                check_freq(f)
            }
            SignalSpec::Silence => Ok(()),
            SignalSpec::WhiteNoise { amplitude, .. } => check_amp(amplitude),
        }
    }
}

/// Samples `spec` on `grid`. Time is measured from the first grid sample.
pub fn render(spec: &SignalSpec, grid: &TimeGrid) -> Result<Vec<f64>> {
    grid.validate()?;
    spec.validate(grid.dt)?;
    let n = grid.count;
    let local = |k: usize| k as f64 * grid.dt;
    let samples = match *spec {
        SignalSpec::Chirp { amplitude, f0, f1 } => {
            let span = grid.span();
            let rate = (f1 - f0) / (2.0 * span);
            (0..n)
                .map(|k| {
                    let t = local(k);
                    amplitude * (2.0 * PI * (f0 * t + rate * t * t)).sin()
                })
                .collect()
        }
        SignalSpec::SineBurst {
            amplitude,
            f,
            cycles,
        } => {
            let length = f64::from(cycles) / f;
            (0..n)
                .map(|k| {
                    let t = local(k);
                    if t <= length {
                        let window = 0.5 * (1.0 - (2.0 * PI * t / length).cos());
                        amplitude * window * (2.0 * PI * f * t).sin()
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        SignalSpec::Silence => vec![0.0; n],
        SignalSpec::WhiteNoise { amplitude, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    amplitude * z
                })
                .collect()
        }
    };
    Ok(samples)
}

/// Adds zero-mean Gaussian noise to each row of `y`, scaled to `level`
/// times that row's RMS.
pub fn add_noise(y: &DMatrix<f64>, level: f64, seed: u64) -> Result<DMatrix<f64>> {
    if !(level >= 0.0) || !level.is_finite() {
        return Err(Error::InvalidSpec(format!("noise level must be >= 0, got {level}")));
    }
    if level == 0.0 {
        return Ok(y.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = y.clone();
    let cols = y.ncols().max(1) as f64;
    for i in 0..y.nrows() {
        let rms = (y.row(i).iter().map(|v| v * v).sum::<f64>() / cols).sqrt();
        let sigma = level * rms;
        for k in 0..y.ncols() {
            let z: f64 = StandardNormal.sample(&mut rng);
            out[(i, k)] += sigma * z;
        }
    }
    Ok(out)
}
