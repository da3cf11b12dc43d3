//! Dense kernels shared by the identification and evaluation modules.
//!
//! nalgebra matrices are the currency of the public API; the heavy
//! factorizations (thin SVD of wide snapshot matrices, non-symmetric
//! eigendecomposition) are delegated to faer.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

pub type Complex64 = Complex<f64>;

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin singular value decomposition `M = U diag(s) Vᵀ` with `s` sorted
/// in non-increasing order.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl ThinSvd {
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        if m.is_empty() {
            return Err(Error::EmptyData("cannot decompose an empty matrix".into()));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::SvdFailure);
        }
        let svd = to_faer(m).thin_svd().map_err(|_| Error::SvdFailure)?;
        let (fu, fv) = (svd.U(), svd.V());
        let s = svd.S().column_vector();
        let k = s.nrows();
        let u = DMatrix::from_fn(fu.nrows(), k, |i, j| fu[(i, j)]);
        let v = DMatrix::from_fn(fv.nrows(), k, |i, j| fv[(i, j)]);
        let singular_values = (0..k).map(|i| s[i]).collect();
        Ok(Self {
            u,
            singular_values,
            v,
        })
    }

    /// Number of singular values with `σ_i >= beta * σ_max`.
    ///
    /// Zero when the matrix vanishes identically.
    pub fn retained_rank(&self, beta: f64) -> usize {
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        if smax <= 0.0 {
            return 0;
        }
        let cut = beta * smax;
        self.singular_values.iter().take_while(|&&s| s >= cut).count()
    }
}

/// Eigenvalues and right eigenvectors (columns) of a real square matrix.
pub fn eig(a: &DMatrix<f64>) -> Result<(Vec<Complex64>, DMatrix<Complex64>)> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigFailure);
    }
    let e = to_faer(a).eigen().map_err(|_| Error::EigFailure)?;
    let s = e.S().column_vector();
    let u = e.U();
    let values = (0..n).map(|i| s[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| u[(i, j)]);
    Ok((values, vectors))
}

/// Diagonal similarity `D^{-1} M D` with power-of-two entries that evens out
/// row and column norms (Parlett–Reinsch). Returns the balanced matrix and
/// the scaling diagonal.
pub(crate) fn balance(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let n = m.nrows();
    let mut out = m.clone();
    let mut scale = vec![1.0; n];
    let radix = 2.0_f64;
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += out[(j, i)].abs();
                    r += out[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let total = c + r;
            let mut f = 1.0;
            let (mut c2, mut r2) = (c, r);
            while c2 < r2 / radix {
                c2 *= radix;
                r2 /= radix;
                f *= radix;
            }
            while c2 >= r2 * radix {
                c2 /= radix;
                r2 *= radix;
                f /= radix;
            }
            if (c2 + r2) < 0.95 * total {
                converged = false;
                scale[i] *= f;
                for j in 0..n {
                    out[(i, j)] /= f;
                    out[(j, i)] *= f;
                }
            }
        }
    }
    (out, scale)
}

/// Evaluates `C (sI - A)^{-1} B + D` for many complex `s` in O(n²) each,
/// after a single orthogonal reduction of `A` to upper Hessenberg form.
#[derive(Debug, Clone)]
pub struct ResolventSolver {
    h: DMatrix<f64>,
    bq: DMatrix<f64>,
    cq: DMatrix<f64>,
    d: DMatrix<f64>,
    /// Largest magnitude in each row of `H`, for scale-aware pivot checks.
    row_scale: Vec<f64>,
}

impl ResolventSolver {
    pub fn new(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        let (balanced, scale) = balance(a);
        let b = DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)] / scale[i]);
        let c = DMatrix::from_fn(c.nrows(), c.ncols(), |i, j| c[(i, j)] * scale[j]);
        let (q, h) = if n > 0 {
            balanced.hessenberg().unpack()
        } else {
            (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0))
        };
        let bq = q.transpose() * &b;
        let cq = &c * &q;
        let row_scale = h
            .row_iter()
            .map(|r| r.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())))
            .collect();
        Self {
            h,
            bq,
            cq,
            d: d.clone(),
            row_scale,
        }
    }

    /// Transfer matrix (d × m) at the complex frequency `s`. `omega` is only
    /// used to label the error.
    pub fn eval(&self, s: Complex64, omega: f64) -> Result<DMatrix<Complex64>> {
        let n = self.h.nrows();
        let m = self.bq.ncols();
        let mut out = self.d.map(|x| Complex64::new(x, 0.0));
        if n == 0 {
            return Ok(out);
        }
        // Row-major working copies of (sI - H) and the right-hand side.
        let mut mat: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i.saturating_sub(1)..n {
                let diag = if i == j { s } else { Complex64::new(0.0, 0.0) };
                mat[i * n + j] = diag - self.h[(i, j)];
            }
        }
        let mut rhs: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n * m];
        for i in 0..n {
            for k in 0..m {
                rhs[i * m + k] = Complex64::new(self.bq[(i, k)], 0.0);
            }
        }
        let tol = |rows: &[usize]| {
            let scale = rows.iter().map(|&r| self.row_scale[r]).fold(0.0, f64::max);
            1e3 * f64::EPSILON * (s.norm() + scale).max(f64::MIN_POSITIVE)
        };
        for k in 0..n.saturating_sub(1) {
            if mat[(k + 1) * n + k].norm() > mat[k * n + k].norm() {
                for j in k..n {
                    mat.swap(k * n + j, (k + 1) * n + j);
                }
                for c in 0..m {
                    rhs.swap(k * m + c, (k + 1) * m + c);
                }
            }
            let pivot = mat[k * n + k];
            if pivot.norm() <= tol(&[k, k + 1]) {
                return Err(Error::SingularResolvent { omega });
            }
            let l = mat[(k + 1) * n + k] / pivot;
            if l != Complex64::new(0.0, 0.0) {
                for j in k..n {
                    let v = mat[k * n + j];
                    mat[(k + 1) * n + j] -= l * v;
                }
                for c in 0..m {
                    let v = rhs[k * m + c];
                    rhs[(k + 1) * m + c] -= l * v;
                }
            }
        }
        for i in (0..n).rev() {
            let pivot = mat[i * n + i];
            if pivot.norm() <= tol(&[i, (i + 1).min(n - 1)]) {
                return Err(Error::SingularResolvent { omega });
            }
            for c in 0..m {
                let mut acc = rhs[i * m + c];
                for j in i + 1..n {
                    acc -= mat[i * n + j] * rhs[j * m + c];
                }
                rhs[i * m + c] = acc / pivot;
            }
        }
        for r in 0..out.nrows() {
            for c in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    acc += rhs[i * m + c] * self.cq[(r, i)];
                }
                out[(r, c)] += acc;
            }
        }
        Ok(out)
    }
}

/// Largest singular value of a small complex matrix.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.ncols() == 1 || m.nrows() == 1 {
        return m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |acc: f64, &s| acc.max(s))
}
