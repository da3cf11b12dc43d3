//! Relative error metrics, modal assurance, empirical FRFs and a rank
//! correlation trend test.

use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, Complex64};
use crate::signals::TimeGrid;

/// `sqrt(Σ_k ‖y_k − ŷ_k‖² / Σ_k ‖y_k‖²)`. A prediction with non-finite
/// entries (a diverged simulation) scores `+inf`.
pub fn eps_td(y: &DMatrix<f64>, yhat: &DMatrix<f64>) -> Result<f64> {
    if y.shape() != yhat.shape() {
        return Err(Error::ShapeMismatch(format!(
            "reference is {:?}, prediction is {:?}",
            y.shape(),
            yhat.shape()
        )));
    }
    let reference = y.norm_squared();
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    if yhat.iter().any(|v| !v.is_finite()) {
        return Ok(f64::INFINITY);
    }
    Ok(((y - yhat).norm_squared() / reference).sqrt())
}

/// Per-output-channel relative errors.
pub fn eps_td_per_channel(y: &DMatrix<f64>, yhat: &DMatrix<f64>) -> Result<Vec<f64>> {
    eps_td(y, yhat)?;
    Ok((0..y.nrows())
        .map(|r| {
            let reference = y.row(r).norm();
            if reference == 0.0 {
                f64::NAN
            } else {
                (y.row(r) - yhat.row(r)).norm() / reference
            }
        })
        .collect())
}

/// `sqrt(Σ_j ‖H_j − Ĥ_j‖₂² / Σ_j ‖H_j‖₂²)` with the matrix 2-norm per
/// frequency. Non-finite estimates score `+inf`.
pub fn eps_fd(h: &[DMatrix<Complex64>], hhat: &[DMatrix<Complex64>]) -> Result<f64> {
    if h.len() != hhat.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} reference frequencies, {} predicted",
            h.len(),
            hhat.len()
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in h.iter().zip(hhat) {
        if a.shape() != b.shape() {
            return Err(Error::ShapeMismatch(format!("FRF blocks {:?} vs {:?}", a.shape(), b.shape())));
        }
        den += spectral_norm(a).powi(2);
        if b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            num = f64::INFINITY;
        } else {
            num += spectral_norm(&(a - b)).powi(2);
        }
    }
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((num / den).sqrt())
}

/// Summary of a model evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub eps_td: f64,
    pub eps_fd: Option<f64>,
    pub per_channel_td: Vec<f64>,
    pub samples: usize,
    pub frequencies: usize,
}

impl ErrorReport {
    pub fn new(y: &DMatrix<f64>, yhat: &DMatrix<f64>, frf: Option<(&[DMatrix<Complex64>], &[DMatrix<Complex64>])>) -> Result<Self> {
        let eps = eps_td(y, yhat)?;
        let per_channel_td = eps_td_per_channel(y, yhat)?;
        let (eps_fd, frequencies) = match frf {
            Some((h, hhat)) => (Some(eps_fd(h, hhat)?), h.len()),
            None => (None, 0),
        };
        Ok(Self {
            eps_td: eps,
            eps_fd,
            per_channel_td,
            samples: y.ncols(),
            frequencies,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacMatrix {
    pub values: DMatrix<f64>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

impl MacMatrix {
    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.values.nrows().min(self.values.ncols());
        (0..n).map(|i| self.values[(i, i)]).collect()
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let mut max = 0.0_f64;
        for i in 0..self.values.nrows() {
            for j in 0..self.values.ncols() {
                if i != j {
                    max = max.max(self.values[(i, j)]);
                }
            }
        }
        max
    }
}

/// `|φᴴψ|² / ((φᴴφ)(ψᴴψ))` for every column pair.
pub fn mac(phi1: &DMatrix<Complex64>, phi2: &DMatrix<Complex64>) -> Result<MacMatrix> {
    if phi1.nrows() == 0 || phi1.nrows() != phi2.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "mode shapes have {} and {} rows",
            phi1.nrows(),
            phi2.nrows()
        )));
    }
    let norms = |m: &DMatrix<Complex64>, offset: usize| -> Result<Vec<f64>> {
        m.column_iter()
            .enumerate()
            .map(|(j, c)| {
                let n = c.norm_squared();
                if n == 0.0 {
                    Err(Error::ZeroModeVector(offset + j))
                } else {
                    Ok(n)
                }
            })
            .collect()
    };
    let n1 = norms(phi1, 0)?;
    let n2 = norms(phi2, phi1.ncols())?;
    let values = DMatrix::from_fn(phi1.ncols(), phi2.ncols(), |i, j| {
        let inner = phi1.column(i).dotc(&phi2.column(j));
        (inner.norm_sqr() / (n1[i] * n2[j])).clamp(0.0, 1.0)
    });
    Ok(MacMatrix {
        values,
        row_labels: (1..=phi1.ncols()).map(|i| format!("mode{i}")).collect(),
        col_labels: (1..=phi2.ncols()).map(|i| format!("mode{i}")).collect(),
    })
}

pub fn mac_real(phi1: &DMatrix<f64>, phi2: &DMatrix<f64>) -> Result<MacMatrix> {
    mac(&phi1.map(Complex64::from), &phi2.map(Complex64::from))
}

/// Greedy pairing: each reference frequency, in ascending order, takes the
/// closest candidate not yet used.
pub fn pair_by_frequency(reference: &[f64], candidates: &[f64]) -> Vec<Option<usize>> {
    let mut order: Vec<usize> = (0..reference.len()).collect();
    order.sort_by(|&a, &b| reference[a].total_cmp(&reference[b]));
    let mut used = vec![false; candidates.len()];
    let mut pairs = vec![None; reference.len()];
    for i in order {
        let best = (0..candidates.len())
            .filter(|&j| !used[j])
            .min_by(|&a, &b| {
                (candidates[a] - reference[i])
                    .abs()
                    .total_cmp(&(candidates[b] - reference[i]).abs())
            });
        if let Some(j) = best {
            used[j] = true;
            pairs[i] = Some(j);
        }
    }
    pairs
}

/// Welch averaging options for [`empirical_frf`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchOptions {
    pub segments: usize,
    /// Auto-spectrum floor relative to its peak.
    pub floor: f64,
}

impl Default for WelchOptions {
    fn default() -> Self {
        Self {
            segments: 8,
            floor: 1e-10,
        }
    }
}

/// H1 estimate `S_uy / S_uu` from a single-input record, Hann-windowed
/// with 50% overlap, linearly interpolated between FFT bins at `omegas`
/// (rad/s). Returns one `d x 1` block per frequency.
pub fn empirical_frf(
    u: &DMatrix<f64>,
    y: &DMatrix<f64>,
    grid: &TimeGrid,
    omegas: &[f64],
    opts: WelchOptions,
) -> Result<Vec<DMatrix<Complex64>>> {
    if u.nrows() != 1 {
        return Err(Error::InvalidSpec(format!(
            "empirical FRF needs a single input, got {}",
            u.nrows()
        )));
    }
    if u.ncols() != y.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "input has {} samples, output has {}",
            u.ncols(),
            y.ncols()
        )));
    }
    if opts.segments == 0 {
        return Err(Error::InvalidSpec("at least one Welch segment is required".into()));
    }
    let k = u.ncols();
    let seg = 2 * k / (opts.segments + 1);
    if seg < 4 {
        return Err(Error::InsufficientData(format!(
            "{k} samples are too few for {} segments",
            opts.segments
        )));
    }
    let step = seg / 2;
    let window: Vec<f64> = (0..seg)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / seg as f64).cos())
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(seg);
    let bins = seg / 2 + 1;
    let transform = |row: DVector<f64>, start: usize| -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = (0..seg)
            .map(|i| Complex64::new(row[start + i] * window[i], 0.0))
            .collect();
        fft.process(&mut buf);
        buf.truncate(bins);
        buf
    };
    let d = y.nrows();
    let mut suu = vec![0.0; bins];
    let mut suy = vec![vec![Complex64::new(0.0, 0.0); bins]; d];
    for s in 0..opts.segments {
        let start = s * step;
        let uf = transform(u.row(0).transpose(), start);
        for (b, v) in uf.iter().enumerate() {
            suu[b] += v.norm_sqr();
        }
        for (r, acc) in suy.iter_mut().enumerate() {
            let yf = transform(y.row(r).transpose(), start);
            for b in 0..bins {
                acc[b] += uf[b].conj() * yf[b];
            }
        }
    }
    let peak = suu.iter().cloned().fold(0.0, f64::max);
    let bin_width = 2.0 * std::f64::consts::PI / (seg as f64 * grid.dt);
    omegas
        .iter()
        .map(|&omega| {
            let pos = omega / bin_width;
            if !(pos >= 0.0) || pos > (bins - 1) as f64 {
                return Err(Error::InvalidSpec(format!("frequency {omega} rad/s outside the FFT band")));
            }
            let lo = (pos.floor() as usize).min(bins - 1);
            let hi = (lo + 1).min(bins - 1);
            let frac = pos - lo as f64;
            for b in [lo, hi] {
                if !(suu[b] > opts.floor * peak) || peak == 0.0 {
                    return Err(Error::InsufficientExcitation { omega });
                }
            }
            Ok(DMatrix::from_fn(d, 1, |r, _| {
                let h_lo = suy[r][lo] / suu[lo];
                let h_hi = suy[r][hi] / suu[hi];
                h_lo * (1.0 - frac) + h_hi * frac
            }))
        })
        .collect()
}

/// Spearman rank correlation and its two-sided p-value from the
/// t-approximation. Ties receive average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} samples", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("rank correlation needs 3 samples, got {n}")));
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let mean = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let a = rx[i] - mean;
        let b = ry[i] - mean;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateData("constant sequence has no rank correlation".into()));
    }
    let rho = sxy / (sxx * syy).sqrt();
    let df = (n - 2) as f64;
    if rho.abs() >= 1.0 {
        return Ok((rho.signum(), 0.0));
    }
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::DegenerateData(e.to_string()))?;
    Ok((rho, 2.0 * (1.0 - dist.cdf(t.abs()))))
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}
