//! Least-squares operator identification.
//!
//! Every estimator reduces to one stacked problem
//! `Υ = T · pinv_β(R)`, where the regressor `R` stacks current states and
//! inputs and the target `T` stacks next states (and outputs). The
//! pseudoinverse discards singular values below `β · σ_max`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifting::{self, LiftedStates, WaveletBasis};
use crate::linalg::ThinSvd;
use crate::lti::DiscreteStateSpace;
use crate::modwt::FilterBank;
use crate::trajectory::TrajectorySet;

pub const DEFAULT_BETA: f64 = 1e-12;
pub const DEFAULT_LEVELS: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dmd,
    Dmdc,
    Iodmd,
    Wdmd,
    DelayDmd,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Dmd => "dmd",
            Method::Dmdc => "dmdc",
            Method::Iodmd => "iodmd",
            Method::Wdmd => "wdmd",
            Method::DelayDmd => "delay_dmd",
        }
    }

    /// Whether the method needs full-state samples.
    pub fn needs_states(self) -> bool {
        matches!(self, Method::Dmd | Method::Dmdc | Method::Iodmd)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "dmd" => Ok(Method::Dmd),
            "dmdc" => Ok(Method::Dmdc),
            "iodmd" => Ok(Method::Iodmd),
            "wdmd" => Ok(Method::Wdmd),
            "delay_dmd" | "delaydmd" => Ok(Method::DelayDmd),
            other => Err(Error::InvalidSpec(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub method: Method,
    pub beta: f64,
    /// MODWT decomposition level (wdmd).
    pub levels: usize,
    /// Filter bank name (wdmd).
    pub bank: String,
    /// Wavelet observables (wdmd).
    pub basis: WaveletBasis,
    /// Embedding dimension (delay_dmd).
    pub tau: usize,
    /// Lag in samples (delay_dmd).
    pub delta: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            method: Method::Wdmd,
            beta: DEFAULT_BETA,
            levels: DEFAULT_LEVELS,
            bank: "haar".into(),
            basis: WaveletBasis::default(),
            tau: 14,
            delta: 1,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidSpec(format!("beta must be positive, got {}", self.beta)));
        }
        if self.tau < 1 || self.delta < 1 {
            return Err(Error::InvalidSpec(format!(
                "tau and delta must be >= 1, got tau={}, delta={}",
                self.tau, self.delta
            )));
        }
        if self.method == Method::Wdmd && self.levels < 1 {
            return Err(Error::InvalidLevel(self.levels));
        }
        Ok(())
    }
}

/// How a model's state relates to measured data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observables {
    /// The state is the measured full state.
    FullState,
    /// MODWT detail/smooth series of each output (channel-major rows).
    Wavelet {
        levels: usize,
        bank: String,
        #[serde(default)]
        basis: WaveletBasis,
    },
    /// `[y_k; y_{k-δ}; …; y_{k-δ(τ-1)}]`.
    Delay { tau: usize, delta: usize },
}

impl Observables {
    /// State at the first sample of `data`, built from measurements.
    ///
    /// The delay embedding assumes a zero pre-history.
    pub fn initial_state(&self, data: &TrajectorySet) -> Result<DVector<f64>> {
        match self {
            Observables::FullState => data
                .states
                .as_ref()
                .map(|x| x.column(0).into_owned())
                .ok_or_else(|| Error::InsufficientData("full-state samples are required".into())),
            Observables::Wavelet { levels, bank, basis } => {
                let lifted = lifting::lift_with(&data.outputs, &FilterBank::by_name(bank)?, *levels, *basis)?;
                Ok(lifted.z.column(0).into_owned())
            }
            Observables::Delay { tau, .. } => {
                let d = data.output_count();
                let mut z = DVector::zeros(d * tau);
                z.rows_mut(0, d).copy_from(&data.outputs.column(0));
                Ok(z)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: DiscreteStateSpace,
    pub method: Method,
    pub beta: f64,
    pub rank_used: usize,
    /// Frobenius norm of the stacked least-squares residual.
    pub residual: f64,
    pub observables: Observables,
    /// Block-of-ones output map of the wavelet lifting (wdmd only).
    pub structural_cw: Option<DMatrix<f64>>,
    /// State at the first training sample.
    pub initial_state: DVector<f64>,
}

/// Pseudoinverse keeping singular values `σ_i >= beta · σ_max`.
pub fn truncated_pinv(m: &DMatrix<f64>, beta: f64) -> Result<DMatrix<f64>> {
    if !(beta > 0.0) {
        return Err(Error::InvalidSpec(format!("beta must be positive, got {beta}")));
    }
    let svd = ThinSvd::new(m)?;
    let r = svd.retained_rank(beta);
    let mut out = DMatrix::zeros(m.ncols(), m.nrows());
    for i in 0..r {
        let inv = 1.0 / svd.singular_values[i];
        out.ger(inv, &svd.v.column(i), &svd.u.column(i), 1.0);
    }
    Ok(out)
}

/// Factored stacked problem `min ‖T - Υ R‖_F`, reusable across `β`.
#[derive(Debug, Clone)]
pub struct StackedLeastSquares {
    svd: ThinSvd,
    /// `T V`, the targets projected on the right singular vectors.
    tv: DMatrix<f64>,
    targets: DMatrix<f64>,
}

impl StackedLeastSquares {
    pub fn new(targets: DMatrix<f64>, regressors: &DMatrix<f64>) -> Result<Self> {
        if targets.ncols() != regressors.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "targets have {} snapshots, regressors {}",
                targets.ncols(),
                regressors.ncols()
            )));
        }
        if regressors.ncols() == 0 || regressors.nrows() == 0 {
            return Err(Error::DegenerateData("no snapshots to fit".into()));
        }
        let svd = ThinSvd::new(regressors)?;
        let tv = &targets * &svd.v;
        Ok(Self { svd, tv, targets })
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.svd.singular_values
    }

    /// Minimum-norm solution over the retained subspace, its rank and the
    /// residual norm.
    pub fn solve(&self, beta: f64) -> Result<(DMatrix<f64>, usize, f64)> {
        if !(beta > 0.0) {
            return Err(Error::InvalidSpec(format!("beta must be positive, got {beta}")));
        }
        let r = self.svd.retained_rank(beta);
        let p = self.svd.u.nrows();
        let mut scaled = self.tv.columns(0, r).into_owned();
        for (i, mut col) in scaled.column_iter_mut().enumerate() {
            col /= self.svd.singular_values[i];
        }
        let upsilon = if r == 0 {
            DMatrix::zeros(self.targets.nrows(), p)
        } else {
            &scaled * self.svd.u.columns(0, r).transpose()
        };
        let projected = if r == 0 {
            DMatrix::zeros(self.targets.nrows(), self.targets.ncols())
        } else {
            self.tv.columns(0, r) * self.svd.v.columns(0, r).transpose()
        };
        let residual = (&self.targets - projected).norm();
        Ok((upsilon, r, residual))
    }
}

/// Identification problem with the data already arranged and factored.
#[derive(Debug, Clone)]
pub struct PreparedFit {
    method: Method,
    ls: StackedLeastSquares,
    states: usize,
    inputs: usize,
    outputs: usize,
    dt: f64,
    observables: Observables,
    structural_cw: Option<DMatrix<f64>>,
    initial_state: DVector<f64>,
}

fn stack(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.rows_mut(0, top.nrows()).copy_from(top);
    out.rows_mut(top.nrows(), bottom.nrows()).copy_from(bottom);
    out
}

fn require_same_cols(mats: &[(&str, &DMatrix<f64>)]) -> Result<()> {
    let k = mats[0].1.ncols();
    if let Some((name, m)) = mats.iter().find(|(_, m)| m.ncols() != k) {
        return Err(Error::ShapeMismatch(format!(
            "{name} has {} snapshots, expected {k}",
            m.ncols()
        )));
    }
    if k < 1 {
        return Err(Error::DegenerateData("need at least one snapshot pair".into()));
    }
    Ok(())
}

impl PreparedFit {
    /// Stacked problem from explicit snapshot matrices. `y0` is omitted for
    /// DMD/DMDc (no output equation), `u0` for plain DMD.
    fn from_snapshots(
        method: Method,
        x0: &DMatrix<f64>,
        x1: &DMatrix<f64>,
        u0: Option<&DMatrix<f64>>,
        y0: Option<&DMatrix<f64>>,
        dt: f64,
        observables: Observables,
        initial_state: DVector<f64>,
    ) -> Result<Self> {
        if x0.nrows() != x1.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "X0 has {} rows, X1 has {}",
                x0.nrows(),
                x1.nrows()
            )));
        }
        let mut named = vec![("X0", x0), ("X1", x1)];
        if let Some(u) = u0 {
            named.push(("U0", u));
        }
        if let Some(y) = y0 {
            named.push(("Y0", y));
        }
        require_same_cols(&named)?;
        let regressors = match u0 {
            Some(u) => stack(x0, u),
            None => x0.clone(),
        };
        let targets = match y0 {
            Some(y) => stack(x1, y),
            None => x1.clone(),
        };
        Ok(Self {
            method,
            ls: StackedLeastSquares::new(targets, &regressors)?,
            states: x0.nrows(),
            inputs: u0.map_or(0, |u| u.nrows()),
            outputs: y0.map_or(0, |y| y.nrows()),
            dt,
            observables,
            structural_cw: None,
            initial_state,
        })
    }

    /// Arranges `data` for `config.method` (β is applied later in [`solve`]).
    ///
    /// [`solve`]: PreparedFit::solve
    pub fn new(data: &TrajectorySet, config: &FitConfig) -> Result<Self> {
        config.validate()?;
        data.validate()?;
        let n = data.samples();
        let k = n - 1;
        let dt = data.grid.dt;
        let u0 = data.inputs.columns(0, k).into_owned();
        let y0 = data.outputs.columns(0, k).into_owned();
        match config.method {
            Method::Dmd | Method::Dmdc | Method::Iodmd => {
                let x = data.states.as_ref().ok_or_else(|| {
                    Error::InsufficientData(format!("{} requires full-state samples", config.method))
                })?;
                let x0 = x.columns(0, k).into_owned();
                let x1 = x.columns(1, k).into_owned();
                let init = x.column(0).into_owned();
                let (u, y) = match config.method {
                    Method::Dmd => (None, None),
                    Method::Dmdc => (Some(&u0), None),
                    _ => (Some(&u0), Some(&y0)),
                };
                Self::from_snapshots(config.method, &x0, &x1, u, y, dt, Observables::FullState, init)
            }
            Method::Wdmd => {
                let bank = FilterBank::by_name(&config.bank)?;
                let lifted = lifting::lift_with(&data.outputs, &bank, config.levels, config.basis)?;
                Self::from_lifted(&lifted, &u0, &y0, dt)
            }
            Method::DelayDmd => {
                let (tau, delta) = (config.tau, config.delta);
                let start = delta * (tau - 1);
                if start >= k {
                    return Err(Error::InsufficientData(format!(
                        "delay embedding tau={tau}, delta={delta} leaves no snapshot pairs in {n} samples"
                    )));
                }
                let embedded = delay_embed(&data.outputs, tau, delta);
                let pairs = k - start;
                let x0 = embedded.columns(start, pairs).into_owned();
                let x1 = embedded.columns(start + 1, pairs).into_owned();
                let u = data.inputs.columns(start, pairs).into_owned();
                let y = data.outputs.columns(start, pairs).into_owned();
                let observables = Observables::Delay { tau, delta };
                let init = observables.initial_state(data)?;
                Self::from_snapshots(Method::DelayDmd, &x0, &x1, Some(&u), Some(&y), dt, observables, init)
            }
        }
    }

    fn from_lifted(lifted: &LiftedStates, u0: &DMatrix<f64>, y0: &DMatrix<f64>, dt: f64) -> Result<Self> {
        let (z0, z1) = lifting::split_snapshots(lifted)?;
        let observables = Observables::Wavelet {
            levels: lifted.levels,
            bank: lifted.bank.name.clone(),
            basis: lifted.basis,
        };
        let init = lifted.z.column(0).into_owned();
        let mut fit = Self::from_snapshots(Method::Wdmd, &z0, &z1, Some(u0), Some(y0), dt, observables, init)?;
        fit.structural_cw = lifted.cw.clone();
        Ok(fit)
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn state_dim(&self) -> usize {
        self.states
    }

    pub fn singular_values(&self) -> &[f64] {
        self.ls.singular_values()
    }

    pub fn solve(&self, beta: f64) -> Result<FitResult> {
        let (upsilon, rank_used, residual) = self.ls.solve(beta)?;
        let (n, m, p) = (self.states, self.inputs, self.outputs);
        let a = upsilon.view((0, 0), (n, n)).into_owned();
        let b = upsilon.view((0, n), (n, m)).into_owned();
        let (c, d) = if p > 0 {
            (
                upsilon.view((n, 0), (p, n)).into_owned(),
                upsilon.view((n, n), (p, m)).into_owned(),
            )
        } else {
            // No output equation: the state is the output.
            (DMatrix::identity(n, n), DMatrix::zeros(n, m))
        };
        Ok(FitResult {
            model: DiscreteStateSpace::new(a, b, c, d, self.dt)?,
            method: self.method,
            beta,
            rank_used,
            residual,
            observables: self.observables.clone(),
            structural_cw: self.structural_cw.clone(),
            initial_state: self.initial_state.clone(),
        })
    }
}

/// Rows `[y_k; y_{k-δ}; …; y_{k-δ(τ-1)}]` for every `k`, with zeros before
/// the first sample.
pub fn delay_embed(y: &DMatrix<f64>, tau: usize, delta: usize) -> DMatrix<f64> {
    let (d, n) = y.shape();
    let mut out = DMatrix::zeros(d * tau, n);
    for block in 0..tau {
        let lag = block * delta;
        if lag >= n {
            break;
        }
        out.view_mut((block * d, lag), (d, n - lag))
            .copy_from(&y.columns(0, n - lag));
    }
    out
}

/// Best-fit `A = X1 · pinv_β(X0)`.
pub fn fit_dmd(x0: &DMatrix<f64>, x1: &DMatrix<f64>, beta: f64) -> Result<DMatrix<f64>> {
    let fit = PreparedFit::from_snapshots(
        Method::Dmd,
        x0,
        x1,
        None,
        None,
        1.0,
        Observables::FullState,
        DVector::zeros(x0.nrows()),
    )?;
    Ok(fit.solve(beta)?.model.a)
}

/// `[A B] = X1 · pinv_β([X0; U0])`.
pub fn fit_dmdc(
    x0: &DMatrix<f64>,
    x1: &DMatrix<f64>,
    u0: &DMatrix<f64>,
    beta: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let fit = PreparedFit::from_snapshots(
        Method::Dmdc,
        x0,
        x1,
        Some(u0),
        None,
        1.0,
        Observables::FullState,
        DVector::zeros(x0.nrows()),
    )?;
    let model = fit.solve(beta)?.model;
    Ok((model.a, model.b))
}

/// `[A B; C D] = [X1; Y0] · pinv_β([X0; U0])`.
pub fn fit_iodmd(
    x0: &DMatrix<f64>,
    x1: &DMatrix<f64>,
    u0: &DMatrix<f64>,
    y0: &DMatrix<f64>,
    beta: f64,
    dt: f64,
) -> Result<FitResult> {
    let init = if x0.ncols() > 0 {
        x0.column(0).into_owned()
    } else {
        DVector::zeros(x0.nrows())
    };
    PreparedFit::from_snapshots(
        Method::Iodmd,
        x0,
        x1,
        Some(u0),
        Some(y0),
        dt,
        Observables::FullState,
        init,
    )?
    .solve(beta)
}

/// Wavelet-lifted ioDMD from input/output samples only.
pub fn fit_wdmd(u: &DMatrix<f64>, y: &DMatrix<f64>, dt: f64, config: &FitConfig) -> Result<FitResult> {
    let data = io_only(u, y, dt)?;
    let config = FitConfig {
        method: Method::Wdmd,
        ..config.clone()
    };
    PreparedFit::new(&data, &config)?.solve(config.beta)
}

/// ioDMD on a time-delay embedding of the outputs.
pub fn fit_delay_dmd(u: &DMatrix<f64>, y: &DMatrix<f64>, dt: f64, config: &FitConfig) -> Result<FitResult> {
    let data = io_only(u, y, dt)?;
    let config = FitConfig {
        method: Method::DelayDmd,
        ..config.clone()
    };
    PreparedFit::new(&data, &config)?.solve(config.beta)
}

/// Fits `config.method` to a trajectory set.
pub fn fit(data: &TrajectorySet, config: &FitConfig) -> Result<FitResult> {
    PreparedFit::new(data, config)?.solve(config.beta)
}

fn io_only(u: &DMatrix<f64>, y: &DMatrix<f64>, dt: f64) -> Result<TrajectorySet> {
    if u.ncols() != y.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "inputs have {} samples, outputs {}",
            u.ncols(),
            y.ncols()
        )));
    }
    if y.ncols() < 2 {
        return Err(Error::DegenerateData("need at least two samples".into()));
    }
    let grid = crate::signals::TimeGrid::new(0.0, dt, y.ncols())?;
    TrajectorySet::new(grid, u.clone(), y.clone(), None)
}
