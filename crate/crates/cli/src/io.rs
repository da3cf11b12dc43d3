//! File contracts: trajectory CSV, model JSON and saved-state JSON.
//!
//! Trajectory CSV: header `t,u1..um,y1..yd` (state files `t,x1..xn`), one
//! row per sample, values written with 17 significant digits and LF line
//! endings. Model JSON stores matrices row-major; floats use the shortest
//! representation that parses back to the same bits.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use wdmd::fit::{FitResult, Observables};
use wdmd::{DiscreteStateSpace, TimeGrid, TrajectorySet};

use crate::error::{CliError, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fixed 17-significant-digit rendering used in every CSV.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::format(path, e))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::format(path, e))
}

/// Writes a CSV with a header row; every cell is preformatted.
pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::format(path, e);
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::format(path, e.to_string()))?;
    write_text(path, &String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Header and numeric body of a CSV file (row-major).
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = read_text(path)?;
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = r
        .headers()
        .map_err(|e| CliError::format(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::format(path, e))?;
        let row = rec
            .iter()
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::format(path, format!("row {}: `{v}` is not a number", i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Trajectory samples read back from the CSV contract.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryCsv {
    pub times: Vec<f64>,
    pub inputs: DMatrix<f64>,
    pub outputs: DMatrix<f64>,
}

impl TrajectoryCsv {
    /// Uniform grid implied by the time column.
    pub fn grid(&self, path: &Path) -> Result<TimeGrid> {
        let n = self.times.len();
        if n < 2 {
            return Err(CliError::format(path, "need at least two samples"));
        }
        let dt = (self.times[n - 1] - self.times[0]) / (n - 1) as f64;
        let uniform = self
            .times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1e-300));
        if !uniform || !(dt > 0.0) {
            return Err(CliError::format(path, "time column is not uniformly increasing"));
        }
        Ok(TimeGrid::new(self.times[0], dt, n)?)
    }
}

fn numbered(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (1..=count).map(move |i| format!("{prefix}{i}"))
}

/// Column indices of `prefix1..prefixN` in order; they must be contiguous
/// from 1.
fn prefixed_columns(header: &[String], prefix: &str, path: &Path) -> Result<Vec<usize>> {
    let mut cols = Vec::new();
    for i in 1.. {
        match header.iter().position(|h| *h == format!("{prefix}{i}")) {
            Some(c) => cols.push(c),
            None => break,
        }
    }
    let stray = header
        .iter()
        .filter(|h| h.starts_with(prefix) && h[prefix.len()..].parse::<usize>().is_ok())
        .count();
    if stray != cols.len() {
        return Err(CliError::format(path, format!("`{prefix}` columns must be numbered 1..n")));
    }
    Ok(cols)
}

fn gather(rows: &[Vec<f64>], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(cols.len(), rows.len(), |i, k| rows[k][cols[i]])
}

fn check_header_t(header: &[String], rows: &[Vec<f64>], path: &Path) -> Result<()> {
    if header.first().map(String::as_str) != Some("t") {
        return Err(CliError::format(path, "first column must be `t`"));
    }
    if let Some((i, _)) = rows.iter().enumerate().find(|(_, r)| r.len() != header.len()) {
        return Err(CliError::format(path, format!("row {} has the wrong number of fields", i + 1)));
    }
    Ok(())
}

pub fn write_trajectory(path: &Path, times: &[f64], u: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<()> {
    if u.ncols() != times.len() || y.ncols() != times.len() {
        return Err(CliError::DimMismatch(format!(
            "{} time stamps, {} input and {} output samples",
            times.len(),
            u.ncols(),
            y.ncols()
        )));
    }
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(numbered("u", u.nrows()))
        .chain(numbered("y", y.nrows()))
        .collect();
    let rows = (0..times.len()).map(|k| {
        std::iter::once(times[k])
            .chain(u.column(k).iter().copied())
            .chain(y.column(k).iter().copied())
            .map(fmt_f64)
            .collect()
    });
    write_csv(path, &header, rows)
}

pub fn read_trajectory(path: &Path) -> Result<TrajectoryCsv> {
    let (header, rows) = read_csv(path)?;
    check_header_t(&header, &rows, path)?;
    let u_cols = prefixed_columns(&header, "u", path)?;
    let y_cols = prefixed_columns(&header, "y", path)?;
    Ok(TrajectoryCsv {
        times: rows.iter().map(|r| r[0]).collect(),
        inputs: gather(&rows, &u_cols),
        outputs: gather(&rows, &y_cols),
    })
}

pub fn write_states(path: &Path, times: &[f64], x: &DMatrix<f64>) -> Result<()> {
    let header: Vec<String> = std::iter::once("t".to_string()).chain(numbered("x", x.nrows())).collect();
    let rows = (0..times.len()).map(|k| {
        std::iter::once(times[k])
            .chain(x.column(k).iter().copied())
            .map(fmt_f64)
            .collect()
    });
    write_csv(path, &header, rows)
}

pub fn read_states(path: &Path) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let (header, rows) = read_csv(path)?;
    check_header_t(&header, &rows, path)?;
    let cols = prefixed_columns(&header, "x", path)?;
    Ok((rows.iter().map(|r| r[0]).collect(), gather(&rows, &cols)))
}

/// Reads a trajectory (and optional state file) into a [`TrajectorySet`].
pub fn load_dataset(data: &Path, states: Option<&Path>) -> Result<TrajectorySet> {
    let traj = read_trajectory(data)?;
    let grid = traj.grid(data)?;
    let x = match states {
        Some(p) => {
            let (t, x) = read_states(p)?;
            if t != traj.times {
                return Err(CliError::DimMismatch(format!(
                    "{} and {} have different time columns",
                    data.display(),
                    p.display()
                )));
            }
            Some(x)
        }
        None => None,
    };
    Ok(TrajectorySet::new(grid, traj.inputs, traj.outputs, x)?)
}

/// Dense matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&DMatrix<f64>> for MatrixData {
    fn from(m: &DMatrix<f64>) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.transpose().iter().copied().collect(),
        }
    }
}

impl MatrixData {
    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.data.len() != self.rows * self.cols {
            return Err(CliError::DimMismatch(format!(
                "{}x{} matrix with {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub states: usize,
    pub inputs: usize,
    pub outputs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftingMeta {
    pub levels: usize,
    pub bank: String,
    pub basis: wdmd::WaveletBasis,
    pub row_order: String,
    /// Block-of-ones map from the lifted state to the outputs (MRA basis).
    pub structural_cw: Option<MatrixData>,
}

pub const ROW_ORDER: &str = "channel-major; per output: levels 1..J then the level-J scaling row";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMeta {
    pub beta: f64,
    pub rank_used: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub data_sha256: Option<String>,
    pub tool_version: String,
}

/// Serialized discrete model with its identification context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    /// Identification method, or `truth` for a discretized reference model.
    pub method: String,
    pub dt: f64,
    pub dims: Dims,
    pub a: MatrixData,
    pub b: MatrixData,
    pub c: MatrixData,
    pub d: MatrixData,
    pub observables: Option<Observables>,
    pub lifting: Option<LiftingMeta>,
    pub fit: Option<FitMeta>,
    /// State at the first training sample.
    pub initial_state: Vec<f64>,
    /// Beam nodes behind the output channels, when known.
    pub output_nodes: Option<Vec<usize>>,
    pub provenance: Provenance,
}

impl ModelFile {
    pub fn from_model(method: &str, sys: &DiscreteStateSpace, provenance: Provenance) -> Self {
        Self {
            method: method.to_string(),
            dt: sys.dt,
            dims: Dims {
                states: sys.states(),
                inputs: sys.inputs(),
                outputs: sys.outputs(),
            },
            a: (&sys.a).into(),
            b: (&sys.b).into(),
            c: (&sys.c).into(),
            d: (&sys.d).into(),
            observables: None,
            lifting: None,
            fit: None,
            initial_state: vec![0.0; sys.states()],
            output_nodes: None,
            provenance,
        }
    }

    pub fn from_fit(fit: &FitResult, provenance: Provenance) -> Self {
        let mut file = Self::from_model(fit.method.as_str(), &fit.model, provenance);
        file.observables = Some(fit.observables.clone());
        if let Observables::Wavelet { levels, bank, basis } = &fit.observables {
            file.lifting = Some(LiftingMeta {
                levels: *levels,
                bank: bank.clone(),
                basis: *basis,
                row_order: ROW_ORDER.into(),
                structural_cw: fit.structural_cw.as_ref().map(MatrixData::from),
            });
        }
        file.fit = Some(FitMeta {
            beta: fit.beta,
            rank_used: fit.rank_used,
            residual: fit.residual,
        });
        file.initial_state = fit.initial_state.iter().copied().collect();
        file
    }

    pub fn model(&self) -> Result<DiscreteStateSpace> {
        let sys = DiscreteStateSpace::new(
            self.a.to_matrix()?,
            self.b.to_matrix()?,
            self.c.to_matrix()?,
            self.d.to_matrix()?,
            self.dt,
        )?;
        let dims = Dims {
            states: sys.states(),
            inputs: sys.inputs(),
            outputs: sys.outputs(),
        };
        if dims != self.dims || self.initial_state.len() != dims.states {
            return Err(CliError::DimMismatch(format!(
                "model file declares {:?} but its matrices are {:?}",
                self.dims, dims
            )));
        }
        Ok(sys)
    }

    pub fn initial_state(&self) -> DVector<f64> {
        DVector::from_vec(self.initial_state.clone())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: Self = read_json(path)?;
        file.model()?;
        Ok(file)
    }
}

/// Saved terminal state for chained simulations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub state: Vec<f64>,
}
