//! Linear state-space models: simulation, frequency response,
//! zero-order-hold discretization and modal analysis.

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{balance, eig, Complex64, ResolventSolver};
use crate::par::*;

fn check_dims(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<()> {
    let n = a.nrows();
    let ok = a.is_square()
        && b.nrows() == n
        && c.ncols() == n
        && d.nrows() == c.nrows()
        && d.ncols() == b.ncols();
    if ok {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!(
            "A {:?}, B {:?}, C {:?}, D {:?}",
            a.shape(),
            b.shape(),
            c.shape(),
            d.shape()
        )))
    }
}

/// `x_{k+1} = A x_k + B u_k`, `y_k = C x_k + D u_k` with sample period `dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteStateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub dt: f64,
}

/// `ẋ = A x + B u`, `y = C x + D u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousStateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

/// Output and state trajectories from [`DiscreteStateSpace::simulate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    /// `d x (K+1)` outputs.
    pub outputs: DMatrix<f64>,
    /// `n x (K+1)` states `z_0..z_K`.
    pub states: DMatrix<f64>,
    /// `z_{K+1}`, the state a continuation run starts from.
    pub final_state: DVector<f64>,
}

impl DiscreteStateSpace {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>, dt: f64) -> Result<Self> {
        let sys = Self { a, b, c, d, dt };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        check_dims(&self.a, &self.b, &self.c, &self.d)?;
        if !(self.dt > 0.0) {
            return Err(Error::InvalidSpec(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Runs the recursion from `z0` over the input columns of `u`.
    pub fn simulate(&self, u: &DMatrix<f64>, z0: &DVector<f64>) -> Result<Simulation> {
        let (n, m, p) = (self.states(), self.inputs(), self.outputs());
        if u.nrows() != m || z0.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "model has {m} inputs and {n} states; got input {}x{} and initial state of length {}",
                u.nrows(),
                u.ncols(),
                z0.len()
            )));
        }
        let steps = u.ncols();
        let mut outputs = DMatrix::zeros(p, steps);
        let mut states = DMatrix::zeros(n, steps);
        let mut z = z0.clone();
        let mut next = DVector::zeros(n);
        let mut y = DVector::zeros(p);
        for k in 0..steps {
            let uk = u.column(k);
            states.set_column(k, &z);
            y.gemv(1.0, &self.c, &z, 0.0);
            y.gemv(1.0, &self.d, &uk, 1.0);
            outputs.set_column(k, &y);
            next.gemv(1.0, &self.a, &z, 0.0);
            next.gemv(1.0, &self.b, &uk, 1.0);
            std::mem::swap(&mut z, &mut next);
        }
        Ok(Simulation {
            outputs,
            states,
            final_state: z,
        })
    }
}

/// Frequency response of a discrete model, `C (e^{iωΔt} I - A)^{-1} B + D`,
/// one `d x m` matrix per angular frequency (rad/s).
pub fn frf_discrete(sys: &DiscreteStateSpace, omegas: &[f64]) -> Result<Vec<DMatrix<Complex64>>> {
    sys.validate()?;
    if let Some(&w) = omegas.iter().find(|&&w| !(w.abs() * sys.dt < PI)) {
        return Err(Error::InvalidSpec(format!(
            "omega = {w} rad/s is at or above the Nyquist rate {} rad/s",
            PI / sys.dt
        )));
    }
    let solver = ResolventSolver::new(&sys.a, &sys.b, &sys.c, &sys.d);
    omegas
        .par_iter()
        .map(|&w| solver.eval(Complex64::from_polar(1.0, w * sys.dt), w))
        .collect()
}

impl ContinuousStateSpace {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        check_dims(&a, &b, &c, &d)?;
        Ok(Self { a, b, c, d })
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }
}

/// Frequency response `C (iω I - A)^{-1} B + D` at each angular frequency.
pub fn frf_continuous(sys: &ContinuousStateSpace, omegas: &[f64]) -> Result<Vec<DMatrix<Complex64>>> {
    check_dims(&sys.a, &sys.b, &sys.c, &sys.d)?;
    let solver = ResolventSolver::new(&sys.a, &sys.b, &sys.c, &sys.d);
    omegas
        .par_iter()
        .map(|&w| solver.eval(Complex64::new(0.0, w), w))
        .collect()
}


/// Exact zero-order-hold discretization via the exponential of the
/// augmented matrix `[[A, B], [0, 0]] dt`.
pub fn discretize_zoh(sys: &ContinuousStateSpace, dt: f64) -> Result<DiscreteStateSpace> {
    if !(dt > 0.0) {
        return Err(Error::InvalidSpec(format!("dt must be positive, got {dt}")));
    }
    check_dims(&sys.a, &sys.b, &sys.c, &sys.d)?;
    let (n, m) = (sys.a.nrows(), sys.b.ncols());
    let mut aug = DMatrix::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(&(&sys.a * dt));
    aug.view_mut((0, n), (n, m)).copy_from(&(&sys.b * dt));
    let (balanced, scale) = balance(&aug);
    let mut e = balanced.exp();
    for i in 0..n + m {
        for j in 0..n + m {
            e[(i, j)] *= scale[i] / scale[j];
        }
    }
    if e.iter().any(|x| !x.is_finite()) {
        return Err(Error::ExpmFailure("non-finite entries in exp(A dt)".into()));
    }
    DiscreteStateSpace::new(
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, m)).into_owned(),
        sys.c.clone(),
        sys.d.clone(),
        dt,
    )
}

/// Eigen-modes of a discrete model.
///
/// Only one member of each conjugate pair is kept (`Im λ >= 0`); modes are
/// ordered by ascending frequency. `frequencies_hz` is the damped frequency
/// `|Im μ| / 2π`, `natural_frequencies_hz` the undamped `|μ| / 2π`, with
/// `μ = ln(λ) / dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    pub discrete: Vec<Complex64>,
    pub continuous: Vec<Complex64>,
    pub frequencies_hz: Vec<f64>,
    pub natural_frequencies_hz: Vec<f64>,
    pub damping: Vec<f64>,
    /// Output-space shapes `C v`, unit 2-norm columns.
    pub shapes: DMatrix<Complex64>,
    /// Right eigenvectors in state space, same column order.
    pub state_vectors: DMatrix<Complex64>,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.discrete.len()
    }

    pub fn is_empty(&self) -> bool {
        self.discrete.is_empty()
    }
}

pub fn extract_modes(sys: &DiscreteStateSpace) -> Result<ModeSet> {
    sys.validate()?;
    let (values, vectors) = eig(&sys.a)?;
    let mut keep: Vec<usize> = (0..values.len()).filter(|&i| values[i].im >= 0.0).collect();
    let continuous_of = |l: Complex64| {
        if l.norm() == 0.0 {
            Complex64::new(f64::NEG_INFINITY, 0.0)
        } else {
            l.ln() / sys.dt
        }
    };
    let freq_of = |mu: Complex64| {
        if mu.re.is_finite() {
            mu.im.abs() / (2.0 * PI)
        } else {
            0.0
        }
    };
    keep.sort_by(|&i, &j| {
        let (fi, fj) = (freq_of(continuous_of(values[i])), freq_of(continuous_of(values[j])));
        fi.partial_cmp(&fj).unwrap_or(Ordering::Equal).then(i.cmp(&j))
    });
    let n_modes = keep.len();
    let c = sys.c.map(|x| Complex64::new(x, 0.0));
    let mut state_vectors = DMatrix::zeros(sys.states(), n_modes);
    for (col, &i) in keep.iter().enumerate() {
        state_vectors.set_column(col, &vectors.column(i));
    }
    let mut shapes = &c * &state_vectors;
    for mut col in shapes.column_iter_mut() {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            col /= Complex64::new(norm, 0.0);
        }
    }
    let discrete: Vec<Complex64> = keep.iter().map(|&i| values[i]).collect();
    let continuous: Vec<Complex64> = discrete.iter().map(|&l| continuous_of(l)).collect();
    let frequencies_hz = continuous.iter().map(|&mu| freq_of(mu)).collect();
    let natural_frequencies_hz = continuous
        .iter()
        .map(|&mu| if mu.re.is_finite() { mu.norm() / (2.0 * PI) } else { f64::INFINITY })
        .collect();
    let damping = continuous
        .iter()
        .map(|&mu| {
            if !mu.re.is_finite() {
                1.0
            } else if mu.norm() == 0.0 {
                0.0
            } else {
                -mu.re / mu.norm()
            }
        })
        .collect();
    Ok(ModeSet {
        discrete,
        continuous,
        frequencies_hz,
        natural_frequencies_hz,
        damping,
        shapes,
        state_vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(a: f64, b: f64, c: f64, d: f64, dt: f64) -> DiscreteStateSpace {
        DiscreteStateSpace::new(
            DMatrix::from_element(1, 1, a),
            DMatrix::from_element(1, 1, b),
            DMatrix::from_element(1, 1, c),
            DMatrix::from_element(1, 1, d),
            dt,
        )
        .unwrap()
    }

    #[test]
    fn impulse_through_a_delay() {
        let sys = scalar(0.0, 1.0, 1.0, 0.0, 1.0);
        let mut u = DMatrix::zeros(1, 6);
        u[(0, 0)] = 1.0;
        let sim = sys.simulate(&u, &DVector::zeros(1)).unwrap();
        assert_eq!(sim.outputs.row(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_input_zero_state() {
        let sys = DiscreteStateSpace::new(
            DMatrix::from_row_slice(2, 2, &[0.9, 0.1, -0.1, 0.8]),
            DMatrix::from_row_slice(2, 1, &[1.0, 0.5]),
            DMatrix::from_row_slice(1, 2, &[1.0, -1.0]),
            DMatrix::zeros(1, 1),
            0.1,
        )
        .unwrap();
        let sim = sys.simulate(&DMatrix::zeros(1, 20), &DVector::zeros(2)).unwrap();
        assert!(sim.outputs.iter().all(|&y| y == 0.0));
        assert!(matches!(
            sys.simulate(&DMatrix::zeros(2, 20), &DVector::zeros(2)),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn pure_delay_has_unit_gain() {
        let sys = scalar(0.0, 1.0, 1.0, 0.0, 1e-3);
        let h = frf_discrete(&sys, &[1.0, 100.0, 1000.0, 3000.0]).unwrap();
        for hw in h {
            assert!((hw[(0, 0)].norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn feedthrough_only() {
        let sys = DiscreteStateSpace::new(
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 1),
            DMatrix::zeros(1, 2),
            DMatrix::from_element(1, 1, 0.7),
            1e-2,
        )
        .unwrap();
        for hw in frf_discrete(&sys, &[0.0, 10.0, 200.0]).unwrap() {
            assert_eq!(hw[(0, 0)], Complex64::new(0.7, 0.0));
        }
    }

    #[test]
    fn first_order_lag_continuous() {
        let sys = ContinuousStateSpace::new(
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let h = frf_continuous(&sys, &[0.0, 1.0]).unwrap();
        assert!((h[0][(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((h[1][(0, 0)].norm() - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((h[1][(0, 0)] - Complex64::new(1.0, 0.0) / Complex64::new(1.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn static_gain() {
        let a = DMatrix::from_row_slice(2, 2, &[-2.0, 1.0, 0.0, -3.0]);
        let b = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let d = DMatrix::from_element(1, 1, 0.25);
        let want = -(&c * a.clone().try_inverse().unwrap() * &b) + &d;
        let sys = ContinuousStateSpace::new(a, b, c, d).unwrap();
        let h = frf_continuous(&sys, &[0.0]).unwrap();
        assert!((h[0][(0, 0)].re - want[(0, 0)]).abs() < 1e-14);
        assert!(h[0][(0, 0)].im.abs() < 1e-14);
    }

    #[test]
    fn zoh_closed_forms() {
        let sys = ContinuousStateSpace::new(
            DMatrix::zeros(2, 2),
            DMatrix::from_row_slice(2, 1, &[1.0, -2.0]),
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 1),
        )
        .unwrap();
        let d = discretize_zoh(&sys, 0.5).unwrap();
        assert!((d.a.clone() - DMatrix::identity(2, 2)).amax() < 1e-15);
        assert!((d.b.clone() - DMatrix::from_row_slice(2, 1, &[0.5, -1.0])).amax() < 1e-15);

        let a = -3.0;
        let sys = ContinuousStateSpace::new(
            DMatrix::from_element(1, 1, a),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let d = discretize_zoh(&sys, 0.1).unwrap();
        assert!((d.a[(0, 0)] - (a * 0.1).exp()).abs() < 1e-14);
        assert!((d.b[(0, 0)] - ((a * 0.1).exp() - 1.0) / a).abs() < 1e-14);
        assert!(discretize_zoh(&sys, 0.0).is_err());
    }

    #[test]
    fn rotation_mode() {
        let (rho, theta, dt) = (0.95_f64, 0.3_f64, 0.01);
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[rho * theta.cos(), -rho * theta.sin(), rho * theta.sin(), rho * theta.cos()],
        );
        let sys = DiscreteStateSpace::new(
            a,
            DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 1),
            dt,
        )
        .unwrap();
        let modes = extract_modes(&sys).unwrap();
        assert_eq!(modes.len(), 1);
        assert!((modes.frequencies_hz[0] - theta / (2.0 * PI * dt)).abs() < 1e-10);
        let zeta = -rho.ln() / (rho.ln().powi(2) + theta * theta).sqrt();
        assert!((modes.damping[0] - zeta).abs() < 1e-12);
        let norm: f64 = modes.shapes.column(0).iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_spectrum_is_real() {
        let a = DMatrix::from_row_slice(3, 3, &[0.5, 0.1, 0.0, 0.1, 0.3, 0.05, 0.0, 0.05, 0.8]);
        let sys = DiscreteStateSpace::new(
            a,
            DMatrix::zeros(3, 1),
            DMatrix::identity(3, 3),
            DMatrix::zeros(3, 1),
            1.0,
        )
        .unwrap();
        let modes = extract_modes(&sys).unwrap();
        assert_eq!(modes.len(), 3);
        for i in 0..3 {
            assert!(modes.discrete[i].im.abs() < 1e-14);
            assert_eq!(modes.frequencies_hz[i], 0.0);
            assert!(modes.damping[i].is_finite());
        }
    }
}
