//! Maximal-overlap discrete wavelet transform (MODWT).
//!
//! The level-`j` periodized filters are applied through the pyramid
//! recursion with circular indexing, so the dense `K x K` filter matrices
//! are never formed. Every coefficient sequence keeps the signal length.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// MODWT-normalized quadrature-mirror filter pair.
///
/// `g` is the scaling (low-pass) filter and `h` the wavelet (high-pass)
/// filter, with `Σg = 1`, `Σh = 0`, `Σg² = Σh² = 1/2` and
/// `h_l = (-1)^l g_{L-1-l}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterBank {
    pub name: String,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

impl FilterBank {
    /// Builds a bank from its scaling filter, deriving the wavelet filter by
    /// the quadrature-mirror relation.
    pub fn from_scaling(name: impl Into<String>, g: Vec<f64>) -> Result<Self> {
        let len = g.len();
        if len < 2 || len % 2 != 0 {
            return Err(Error::InvalidSpec(format!(
                "scaling filter needs an even length >= 2, got {len}"
            )));
        }
        let h = (0..len)
            .map(|l| if l % 2 == 0 { g[len - 1 - l] } else { -g[len - 1 - l] })
            .collect();
        let bank = Self {
            name: name.into(),
            g,
            h,
        };
        bank.validate()?;
        Ok(bank)
    }

    pub fn haar() -> Self {
        Self {
            name: "haar".into(),
            g: vec![0.5, 0.5],
            h: vec![0.5, -0.5],
        }
    }

    /// Daubechies extremal-phase filter with four taps.
    pub fn d4() -> Self {
        let s3 = 3f64.sqrt();
        let g = vec![(1.0 + s3) / 8.0, (3.0 + s3) / 8.0, (3.0 - s3) / 8.0, (1.0 - s3) / 8.0];
        Self::from_scaling("d4", g).expect("d4 taps satisfy the filter identities")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "haar" => Ok(Self::haar()),
            "d4" | "db2" => Ok(Self::d4()),
            other => Err(Error::InvalidSpec(format!("unknown filter bank `{other}`"))),
        }
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        const TOL: f64 = 1e-12;
        let sum_g: f64 = self.g.iter().sum();
        let sum_h: f64 = self.h.iter().sum();
        let e_g: f64 = self.g.iter().map(|x| x * x).sum();
        let e_h: f64 = self.h.iter().map(|x| x * x).sum();
        let len = self.g.len();
        let qmf = self.h.len() == len
            && (0..len).all(|l| {
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                (self.h[l] - sign * self.g[len - 1 - l]).abs() < TOL
            });
        if (sum_g - 1.0).abs() > TOL
            || sum_h.abs() > TOL
            || (e_g - 0.5).abs() > TOL
            || (e_h - 0.5).abs() > TOL
            || !qmf
        {
            return Err(Error::InvalidSpec(format!(
                "filter bank `{}` violates the MODWT filter identities",
                self.name
            )));
        }
        Ok(())
    }

    fn check_matches(&self, dec_bank: &str, dec_len: usize) -> Result<()> {
        if self.name != dec_bank || self.len() != dec_len {
            return Err(Error::BankMismatch {
                expected: dec_bank.to_string(),
                found: self.name.clone(),
            });
        }
        Ok(())
    }
}

impl Default for FilterBank {
    fn default() -> Self {
        Self::haar()
    }
}

/// Wavelet coefficients `W̃_1..W̃_J` and final scaling coefficients `Ṽ_J`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModwtDecomposition {
    pub wavelet: Vec<Vec<f64>>,
    pub scaling: Vec<f64>,
    bank: String,
    filter_len: usize,
}

impl ModwtDecomposition {
    pub fn levels(&self) -> usize {
        self.wavelet.len()
    }

    pub fn signal_len(&self) -> usize {
        self.scaling.len()
    }

    pub fn bank_name(&self) -> &str {
        &self.bank
    }
}

/// Additive multi-resolution analysis: `y = Σ_j details[j] + smooth`.
#[derive(Debug, Clone, PartialEq)]
pub struct MraComponents {
    pub details: Vec<Vec<f64>>,
    pub smooth: Vec<f64>,
}

impl MraComponents {
    /// Sum of all details and the smooth.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.smooth.clone();
        for d in &self.details {
            for (o, v) in out.iter_mut().zip(d) {
                *o += v;
            }
        }
        out
    }
}

#[inline]
fn stride(level: usize, len: usize) -> usize {
    // 2^{j-1} reduced mod K; levels beyond the usize range wrap the same way.
    let mut s = 1 % len;
    for _ in 1..level {
        s = (2 * s) % len;
    }
    s
}

/// One analysis step: `out_t = Σ_l f_l x_{(t - s·l) mod K}`.
fn analysis(x: &[f64], filter: &[f64], s: usize, out: &mut [f64]) {
    let k = x.len();
    for (t, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        let mut idx = t;
        for &f in filter {
            acc += f * x[idx];
            idx = (idx + k - s) % k;
        }
        *o = acc;
    }
}

/// Adjoint of [`analysis`], accumulated: `out_t += Σ_l f_l x_{(t + s·l) mod K}`.
fn synthesis_add(x: &[f64], filter: &[f64], s: usize, out: &mut [f64]) {
    let k = x.len();
    for (t, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        let mut idx = t;
        for &f in filter {
            acc += f * x[idx];
            idx = (idx + s) % k;
        }
        *o += acc;
    }
}

/// Forward MODWT of `y` to `levels` levels with circular boundary handling.
pub fn forward(y: &[f64], bank: &FilterBank, levels: usize) -> Result<ModwtDecomposition> {
    let k = y.len();
    if k == 0 {
        return Err(Error::EmptySignal);
    }
    if levels < 1 {
        return Err(Error::InvalidLevel(levels));
    }
    let reach = (bank.len() as f64) * 2f64.powi(levels as i32 - 1);
    if reach > k as f64 {
        log::warn!(
            "MODWT level {levels} with a {}-tap filter spans more than the {k} samples; coefficients wrap around",
            bank.len()
        );
    }
    let mut v = y.to_vec();
    let mut next = vec![0.0; k];
    let mut wavelet = Vec::with_capacity(levels);
    for j in 1..=levels {
        let s = stride(j, k);
        let mut w = vec![0.0; k];
        analysis(&v, &bank.h, s, &mut w);
        analysis(&v, &bank.g, s, &mut next);
        std::mem::swap(&mut v, &mut next);
        wavelet.push(w);
    }
    Ok(ModwtDecomposition {
        wavelet,
        scaling: v,
        bank: bank.name.clone(),
        filter_len: bank.len(),
    })
}

/// Runs the synthesis pyramid from `level` down to 1, starting from
/// wavelet coefficients `w` and scaling coefficients `v` at that level
/// (either may be absent, meaning zero).
fn synthesize(bank: &FilterBank, level: usize, w: Option<&[f64]>, v: Option<&[f64]>, k: usize) -> Vec<f64> {
    let mut cur = vec![0.0; k];
    let s = stride(level, k);
    if let Some(w) = w {
        synthesis_add(w, &bank.h, s, &mut cur);
    }
    if let Some(v) = v {
        synthesis_add(v, &bank.g, s, &mut cur);
    }
    let mut next = vec![0.0; k];
    for j in (1..level).rev() {
        next.iter_mut().for_each(|x| *x = 0.0);
        synthesis_add(&cur, &bank.g, stride(j, k), &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// Detail series `D̃_1..D̃_J` and smooth `S̃_J` of a decomposition.
pub fn mra(dec: &ModwtDecomposition, bank: &FilterBank) -> Result<MraComponents> {
    bank.check_matches(&dec.bank, dec.filter_len)?;
    let k = dec.signal_len();
    let levels = dec.levels();
    let details = dec
        .wavelet
        .iter()
        .enumerate()
        .map(|(i, w)| synthesize(bank, i + 1, Some(w), None, k))
        .collect();
    let smooth = synthesize(bank, levels, None, Some(&dec.scaling), k);
    Ok(MraComponents { details, smooth })
}

/// Exact inverse transform.
pub fn inverse(dec: &ModwtDecomposition, bank: &FilterBank) -> Result<Vec<f64>> {
    bank.check_matches(&dec.bank, dec.filter_len)?;
    let k = dec.signal_len();
    let mut v = dec.scaling.clone();
    let mut next = vec![0.0; k];
    for j in (1..=dec.levels()).rev() {
        let s = stride(j, k);
        next.iter_mut().for_each(|x| *x = 0.0);
        synthesis_add(&dec.wavelet[j - 1], &bank.h, s, &mut next);
        synthesis_add(&v, &bank.g, s, &mut next);
        std::mem::swap(&mut v, &mut next);
    }
    Ok(v)
}
