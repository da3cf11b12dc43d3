//! Wavelet observables: lift measured outputs into the auxiliary state.
//!
//! Row layout of `Z` (fixed, relied upon by the fitted models): rows are
//! grouped by output channel; within channel `i` the `J + 1` rows are the
//! level-1..J series followed by the level-J scaling series. Column `k` is
//! the lifted state at sample `t_k`.
//!
//! Two bases are available. [`WaveletBasis::Mra`] uses the detail and smooth
//! series `D̃_j`, `S̃_J`; they sum to the signal, so a block of ones maps `Z`
//! back to `Y` exactly. These series are zero-phase, which leaves the lifted
//! state without quadrature information for narrowband responses.
//! [`WaveletBasis::Modwt`] uses the (causally filtered) coefficients `W̃_j`,
//! `Ṽ_J` instead; their filter delays differ by level, and the output map
//! must be learned.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modwt::{self, FilterBank, MraComponents};
use crate::par::*;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveletBasis {
    /// MODWT wavelet and scaling coefficients.
    #[default]
    Modwt,
    /// MODWT multiresolution details and smooth.
    Mra,
}

impl WaveletBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            WaveletBasis::Modwt => "modwt",
            WaveletBasis::Mra => "mra",
        }
    }
}

impl std::str::FromStr for WaveletBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "modwt" => Ok(WaveletBasis::Modwt),
            "mra" => Ok(WaveletBasis::Mra),
            other => Err(Error::InvalidSpec(format!("unknown wavelet basis `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedStates {
    /// `d(J+1) x (K+1)` wavelet-state snapshots.
    pub z: DMatrix<f64>,
    /// `d x d(J+1)` block-of-ones map with `cw * z == y` (MRA basis only).
    pub cw: Option<DMatrix<f64>>,
    pub basis: WaveletBasis,
    pub levels: usize,
    pub outputs: usize,
    pub bank: FilterBank,
}

impl LiftedStates {
    pub fn state_dim(&self) -> usize {
        self.z.nrows()
    }

    /// Row of `Z` holding level `level` (1-based; `levels + 1` is the smooth)
    /// of output `channel` (0-based).
    pub fn row_index(&self, channel: usize, level: usize) -> usize {
        channel * (self.levels + 1) + (level - 1)
    }
}

/// Structural output map: one row of `J + 1` ones per channel.
pub fn structural_output_map(outputs: usize, levels: usize) -> DMatrix<f64> {
    let width = levels + 1;
    DMatrix::from_fn(outputs, outputs * width, |i, j| {
        if j / width == i {
            1.0
        } else {
            0.0
        }
    })
}

/// MRA lifting of output snapshots `y` (`d x (K+1)`); `cw` is always set.
pub fn lift(y: &DMatrix<f64>, bank: &FilterBank, levels: usize) -> Result<LiftedStates> {
    lift_with(y, bank, levels, WaveletBasis::Mra)
}

/// Lifts output snapshots `y` (`d x (K+1)`) in the given basis.
pub fn lift_with(y: &DMatrix<f64>, bank: &FilterBank, levels: usize, basis: WaveletBasis) -> Result<LiftedStates> {
    if levels < 1 {
        return Err(Error::InvalidLevel(levels));
    }
    let (outputs, samples) = y.shape();
    if outputs == 0 || samples < 2 {
        return Err(Error::EmptyData(format!(
            "lifting needs at least one output and two samples, got {outputs}x{samples}"
        )));
    }
    let channels: Vec<Vec<f64>> = (0..outputs).map(|i| y.row(i).iter().copied().collect()).collect();
    let parts = channels
        .par_iter()
        .map(|series| {
            let dec = modwt::forward(series, bank, levels)?;
            match basis {
                WaveletBasis::Mra => modwt::mra(&dec, bank),
                WaveletBasis::Modwt => Ok(MraComponents {
                    details: dec.wavelet,
                    smooth: dec.scaling,
                }),
            }
        })
        .collect::<Vec<_>>();
    let width = levels + 1;
    let mut z = DMatrix::zeros(outputs * width, samples);
    for (i, part) in parts.into_iter().enumerate() {
        let part = part?;
        let series = part.details.iter().chain(std::iter::once(&part.smooth));
        for (lvl, s) in series.enumerate() {
            for (k, v) in s.iter().enumerate() {
                z[(i * width + lvl, k)] = *v;
            }
        }
    }
    Ok(LiftedStates {
        z,
        cw: (basis == WaveletBasis::Mra).then(|| structural_output_map(outputs, levels)),
        basis,
        levels,
        outputs,
        bank: bank.clone(),
    })
}

/// Shifted snapshot pair `(Z0, Z1)`: columns `0..K` and `1..=K`.
pub fn split_snapshots(lifted: &LiftedStates) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let cols = lifted.z.ncols();
    if cols < 2 {
        return Err(Error::TooFewColumns(cols));
    }
    let z0 = lifted.z.columns(0, cols - 1).into_owned();
    let z1 = lifted.z.columns(1, cols - 1).into_owned();
    Ok((z0, z1))
}
