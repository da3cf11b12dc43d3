use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::TimeGrid;

/// Input, output and (optionally) full-state samples on one time grid.
/// Every matrix has one column per grid sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub grid: TimeGrid,
    pub inputs: DMatrix<f64>,
    pub outputs: DMatrix<f64>,
    pub states: Option<DMatrix<f64>>,
    /// First sample index of each excitation phase, starting with 0.
    pub phases: Vec<PhaseSpan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSpan {
    pub start: usize,
    pub len: usize,
}

impl TrajectorySet {
    pub fn new(
        grid: TimeGrid,
        inputs: DMatrix<f64>,
        outputs: DMatrix<f64>,
        states: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        let set = Self {
            grid,
            inputs,
            outputs,
            states,
            phases: vec![PhaseSpan {
                start: 0,
                len: grid.count,
            }],
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let n = self.grid.count;
        let bad = |what: &str, cols: usize| {
            Error::ShapeMismatch(format!("{what} has {cols} samples, grid has {n}"))
        };
        if self.inputs.ncols() != n {
            return Err(bad("input matrix", self.inputs.ncols()));
        }
        if self.outputs.ncols() != n {
            return Err(bad("output matrix", self.outputs.ncols()));
        }
        if let Some(x) = &self.states {
            if x.ncols() != n {
                return Err(bad("state matrix", x.ncols()));
            }
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        self.grid.count
    }

    pub fn input_count(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn output_count(&self) -> usize {
        self.outputs.nrows()
    }

    /// Keeps only the listed output rows (0-based), in the given order.
    pub fn select_outputs(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.output_count()) {
            return Err(Error::InvalidSpec(format!(
                "output row {bad} out of range ({} outputs)",
                self.output_count()
            )));
        }
        let outputs = self.outputs.select_rows(rows.iter());
        Ok(Self {
            outputs,
            ..self.clone()
        })
    }

    /// Samples `start..start + len` as a standalone set.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if len < 2 || start + len > self.samples() {
            return Err(Error::InvalidSpec(format!(
                "window {start}..{} outside 0..{}",
                start + len,
                self.samples()
            )));
        }
        let grid = TimeGrid::new(self.grid.time(start), self.grid.dt, len)?;
        Ok(Self {
            grid,
            inputs: self.inputs.columns(start, len).into_owned(),
            outputs: self.outputs.columns(start, len).into_owned(),
            states: self.states.as_ref().map(|x| x.columns(start, len).into_owned()),
            phases: vec![PhaseSpan { start: 0, len }],
        })
    }
}
