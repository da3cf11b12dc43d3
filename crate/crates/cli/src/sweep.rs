//! Error surfaces over output count `d` and truncation threshold `β`.
//!
//! The beam is simulated once with every node as an output; a cell with `d`
//! outputs selects the rows of [`equispaced_nodes`]. Cells sharing a method
//! and `d` share one factorization, and run in parallel; rows come back in
//! (method, d, β) order regardless of scheduling.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use wdmd::beamfem::{equispaced_nodes, BeamSpec};
use wdmd::fit::{FitConfig, Method, PreparedFit};
use wdmd::linalg::Complex64;
use wdmd::{lti, metrics, TrajectorySet};

use crate::commands::simulate_records;
use crate::config::{ExperimentConfig, SweepSpec};
use crate::error::{CliError, Result};
use crate::io::{self, fmt_f64};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: Method,
    pub outputs: usize,
    pub beta: f64,
    pub rank_used: Option<usize>,
    pub eps_train: f64,
    pub eps_test: f64,
    pub eps_fd: f64,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(method: Method, outputs: usize, beta: f64, err: &dyn std::fmt::Display) -> Self {
        Self {
            method,
            outputs,
            beta,
            rank_used: None,
            eps_train: f64::NAN,
            eps_test: f64::NAN,
            eps_fd: f64::NAN,
            error: Some(err.to_string()),
        }
    }
}

/// Full-node data shared by every cell.
struct SweepData {
    train: TrajectorySet,
    test: Option<TrajectorySet>,
    /// Continuous beam FRF at every node (`n_nodes x m` per frequency).
    frf: Vec<DMatrix<Complex64>>,
    omegas: Vec<f64>,
    n_nodes: usize,
}

fn select_frf(h: &[DMatrix<Complex64>], rows: &[usize]) -> Vec<DMatrix<Complex64>> {
    h.iter().map(|b| b.select_rows(rows.iter())).collect()
}

fn eps_from_zero(
    model: &wdmd::DiscreteStateSpace,
    set: &TrajectorySet,
) -> wdmd::Result<f64> {
    let sim = model.simulate(&set.inputs, &DVector::zeros(model.states()))?;
    metrics::eps_td(&set.outputs, &sim.outputs)
}

fn run_group(data: &SweepData, base: &FitConfig, method: Method, d: usize, betas: &[f64]) -> Vec<SweepRow> {
    let prepared = (|| -> Result<_> {
        let rows: Vec<usize> = equispaced_nodes(data.n_nodes, d)?.iter().map(|n| n - 1).collect();
        let train = data.train.select_outputs(&rows)?;
        let test = data.test.as_ref().map(|t| t.select_outputs(&rows)).transpose()?;
        let cfg = FitConfig {
            method,
            ..base.clone()
        };
        let prep = PreparedFit::new(&train, &cfg)?;
        Ok((prep, train, test, select_frf(&data.frf, &rows)))
    })();
    let (prep, train, test, h) = match prepared {
        Ok(p) => p,
        Err(e) => return betas.iter().map(|&b| SweepRow::failed(method, d, b, &e)).collect(),
    };
    betas
        .iter()
        .map(|&beta| {
            let cell = || -> wdmd::Result<SweepRow> {
                let fit = prep.solve(beta)?;
                let eps_train = eps_from_zero(&fit.model, &train)?;
                let eps_test = match &test {
                    Some(t) => eps_from_zero(&fit.model, t)?,
                    None => f64::NAN,
                };
                let hhat = lti::frf_discrete(&fit.model, &data.omegas)?;
                let eps_fd = metrics::eps_fd(&h, &hhat)?;
                Ok(SweepRow {
                    method,
                    outputs: d,
                    beta,
                    rank_used: Some(fit.rank_used),
                    eps_train,
                    eps_test,
                    eps_fd,
                    error: None,
                })
            };
            cell().unwrap_or_else(|e| SweepRow::failed(method, d, beta, &e))
        })
        .collect()
}

/// Runs every (method, d, β) cell of `spec` on the configured experiment.
pub fn run(cfg: &ExperimentConfig, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let beam = BeamSpec {
        output_nodes: (1..=cfg.beam.n_nodes).collect(),
        ..cfg.beam.clone()
    };
    let rec = simulate_records(cfg, &beam)?;
    let omegas = cfg.metrics.omegas();
    let data = SweepData {
        frf: lti::frf_continuous(&rec.model.state_space, &omegas)?,
        train: rec.train,
        test: rec.test,
        omegas,
        n_nodes: cfg.beam.n_nodes,
    };
    let groups: Vec<(Method, usize)> = spec
        .methods
        .iter()
        .flat_map(|&m| spec.outputs.iter().map(move |&d| (m, d)))
        .collect();
    #[cfg(feature = "parallel")]
    let iter = groups.par_iter();
    #[cfg(not(feature = "parallel"))]
    let iter = groups.iter();
    let rows: Vec<Vec<SweepRow>> = iter
        .map(|&(m, d)| run_group(&data, &cfg.fit, m, d, &spec.betas))
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

pub fn write(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let header: Vec<String> = [
        "method",
        "d",
        "beta",
        "rank_used",
        "eps_train",
        "eps_test",
        "eps_fd",
        "error",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let body = rows.iter().map(|r| {
        vec![
            r.method.to_string(),
            r.outputs.to_string(),
            fmt_f64(r.beta),
            r.rank_used.map_or_else(String::new, |k| k.to_string()),
            fmt_f64(r.eps_train),
            fmt_f64(r.eps_test),
            fmt_f64(r.eps_fd),
            r.error.clone().unwrap_or_default(),
        ]
    });
    io::write_csv(path, &header, body)
}

/// Sweep spec from the config, or an error naming the missing section.
pub fn spec_of(cfg: &ExperimentConfig) -> Result<SweepSpec> {
    cfg.sweep
        .clone()
        .ok_or_else(|| CliError::Config("the configuration has no [sweep] section".into()))
}
