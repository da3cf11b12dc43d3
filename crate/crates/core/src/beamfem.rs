//! Euler–Bernoulli beam finite elements and truth-data generation.
//!
//! Nodes that carry degrees of freedom are numbered `1..=n_nodes`. A
//! cantilever has an additional clamped root node 0 (so `n_nodes` elements);
//! a free-free beam has `n_nodes - 1` elements. Free DOFs are ordered
//! node-major as `(w_1, θ_1, w_2, θ_2, …)`; the first-order state is
//! `x = [q; q̇]`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{discretize_zoh, ContinuousStateSpace, DiscreteStateSpace};
use crate::signals::{self, SignalSpec, TimeGrid};
use crate::trajectory::{PhaseSpan, TrajectorySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Cantilever,
    FreeFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Displacement,
    Velocity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Section {
    Rectangular { width: f64, thickness: f64 },
    /// Area (m²) and second moment of area (m⁴) given directly.
    Explicit { area: f64, second_moment: f64 },
}

impl Section {
    pub fn area(&self) -> f64 {
        match *self {
            Section::Rectangular { width, thickness } => width * thickness,
            Section::Explicit { area, .. } => area,
        }
    }

    pub fn second_moment(&self) -> f64 {
        match *self {
            Section::Rectangular { width, thickness } => width * thickness.powi(3) / 12.0,
            Section::Explicit { second_moment, .. } => second_moment,
        }
    }
}

/// Rayleigh damping `G = alpha M + beta K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rayleigh {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BeamSpec {
    pub length: f64,
    pub section: Section,
    pub youngs_modulus: f64,
    pub density: f64,
    pub n_nodes: usize,
    pub boundary: Boundary,
    pub damping: Rayleigh,
    /// Nodes receiving a unit transverse point force, one input each.
    pub force_nodes: Vec<usize>,
    pub output_nodes: Vec<usize>,
    pub output_kind: OutputKind,
}

/// Output nodes used throughout the single-input beam study.
pub const DEFAULT_OUTPUT_NODES: [usize; 6] = [1, 7, 12, 18, 24, 30];

/// `d` output nodes spread evenly over `1..=n_nodes` by rank,
/// `1 + round(i (n_nodes - 1) / (d - 1))`. On a 30-node beam `d = 6` returns
/// [`DEFAULT_OUTPUT_NODES`], which the rounding rule alone misses by one node.
pub fn equispaced_nodes(n_nodes: usize, d: usize) -> Result<Vec<usize>> {
    if d == 0 || d > n_nodes {
        return Err(Error::InvalidSpec(format!("cannot place {d} outputs on {n_nodes} nodes")));
    }
    if n_nodes == 30 && d == DEFAULT_OUTPUT_NODES.len() {
        return Ok(DEFAULT_OUTPUT_NODES.to_vec());
    }
    if d == 1 {
        return Ok(vec![n_nodes]);
    }
    Ok((0..d)
        .map(|i| 1 + ((i * (n_nodes - 1)) as f64 / (d - 1) as f64).round() as usize)
        .collect())
}

impl Default for BeamSpec {
    fn default() -> Self {
        Self {
            length: 1.0,
            section: Section::Rectangular {
                width: 0.025,
                thickness: 0.005,
            },
            youngs_modulus: 69e9,
            density: 2700.0,
            n_nodes: 30,
            boundary: Boundary::Cantilever,
            damping: Rayleigh {
                alpha: 2.0,
                beta: 1e-6,
            },
            force_nodes: vec![30],
            output_nodes: DEFAULT_OUTPUT_NODES.to_vec(),
            output_kind: OutputKind::Displacement,
        }
    }
}

impl BeamSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.n_nodes < 2 {
            return bad(format!("beam needs at least 2 nodes, got {}", self.n_nodes));
        }
        let positive = [
            ("length", self.length),
            ("area", self.section.area()),
            ("second moment", self.section.second_moment()),
            ("Young's modulus", self.youngs_modulus),
            ("density", self.density),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.damping.alpha < 0.0 || self.damping.beta < 0.0 {
            return bad("Rayleigh coefficients must be non-negative".into());
        }
        if self.force_nodes.is_empty() {
            return bad("at least one force node is required".into());
        }
        if self.output_nodes.is_empty() {
            return bad("at least one output node is required".into());
        }
        for &node in self.force_nodes.iter().chain(&self.output_nodes) {
            if node < 1 || node > self.n_nodes {
                return bad(format!("node {node} outside 1..={}", self.n_nodes));
            }
        }
        Ok(())
    }

    pub fn element_count(&self) -> usize {
        match self.boundary {
            Boundary::Cantilever => self.n_nodes,
            Boundary::FreeFree => self.n_nodes - 1,
        }
    }

    pub fn element_length(&self) -> f64 {
        self.length / self.element_count() as f64
    }

    pub fn dof_count(&self) -> usize {
        2 * self.n_nodes
    }

    /// Index of the transverse displacement DOF of a (1-based) node.
    pub fn translation_dof(node: usize) -> usize {
        2 * (node - 1)
    }
}

/// Element stiffness for length `l` and bending rigidity `ei`.
pub fn element_stiffness(ei: f64, l: f64) -> [[f64; 4]; 4] {
    let k = ei / l.powi(3);
    let l2 = l * l;
    [
        [12.0 * k, 6.0 * l * k, -12.0 * k, 6.0 * l * k],
        [6.0 * l * k, 4.0 * l2 * k, -6.0 * l * k, 2.0 * l2 * k],
        [-12.0 * k, -6.0 * l * k, 12.0 * k, -6.0 * l * k],
        [6.0 * l * k, 2.0 * l2 * k, -6.0 * l * k, 4.0 * l2 * k],
    ]
}

/// Consistent element mass for length `l` and mass per length `rho_a`.
pub fn element_mass(rho_a: f64, l: f64) -> [[f64; 4]; 4] {
    let m = rho_a * l / 420.0;
    let l2 = l * l;
    [
        [156.0 * m, 22.0 * l * m, 54.0 * m, -13.0 * l * m],
        [22.0 * l * m, 4.0 * l2 * m, 13.0 * l * m, -3.0 * l2 * m],
        [54.0 * m, 13.0 * l * m, 156.0 * m, -22.0 * l * m],
        [-13.0 * l * m, -3.0 * l2 * m, -22.0 * l * m, 4.0 * l2 * m],
    ]
}

/// Assembled beam: second-order matrices and the first-order realization.
#[derive(Debug, Clone)]
pub struct BeamModel {
    pub spec: BeamSpec,
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    pub damping: DMatrix<f64>,
    /// `n_dof x m` load vectors.
    pub force: DMatrix<f64>,
    /// `d x 2n_dof` output selection.
    pub selection: DMatrix<f64>,
    pub state_space: ContinuousStateSpace,
}

pub fn assemble(spec: &BeamSpec) -> Result<BeamModel> {
    spec.validate()?;
    let elements = spec.element_count();
    let mesh_nodes = elements + 1;
    let full = 2 * mesh_nodes;
    let l = spec.element_length();
    let ke = element_stiffness(spec.youngs_modulus * spec.section.second_moment(), l);
    let me = element_mass(spec.density * spec.section.area(), l);
    let mut k_full = DMatrix::zeros(full, full);
    let mut m_full = DMatrix::zeros(full, full);
    for e in 0..elements {
        let base = 2 * e;
        for i in 0..4 {
            for j in 0..4 {
                k_full[(base + i, base + j)] += ke[i][j];
                m_full[(base + i, base + j)] += me[i][j];
            }
        }
    }
    let (stiffness, mass) = match spec.boundary {
        Boundary::Cantilever => {
            let n = full - 2;
            (
                k_full.view((2, 2), (n, n)).into_owned(),
                m_full.view((2, 2), (n, n)).into_owned(),
            )
        }
        Boundary::FreeFree => (k_full, m_full),
    };
    let n_dof = spec.dof_count();
    debug_assert_eq!(stiffness.nrows(), n_dof);
    let damping = &mass * spec.damping.alpha + &stiffness * spec.damping.beta;

    let inputs = spec.force_nodes.len();
    let mut force = DMatrix::zeros(n_dof, inputs);
    for (col, &node) in spec.force_nodes.iter().enumerate() {
        force[(BeamSpec::translation_dof(node), col)] = 1.0;
    }
    let outputs = spec.output_nodes.len();
    let mut selection = DMatrix::zeros(outputs, 2 * n_dof);
    for (row, &node) in spec.output_nodes.iter().enumerate() {
        let offset = match spec.output_kind {
            OutputKind::Displacement => 0,
            OutputKind::Velocity => n_dof,
        };
        selection[(row, offset + BeamSpec::translation_dof(node))] = 1.0;
    }

    let chol = mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidSpec("mass matrix is not positive definite".into()))?;
    let minv_k = chol.solve(&stiffness);
    let minv_g = chol.solve(&damping);
    let minv_f = chol.solve(&force);
    let mut a = DMatrix::zeros(2 * n_dof, 2 * n_dof);
    a.view_mut((0, n_dof), (n_dof, n_dof))
        .copy_from(&DMatrix::identity(n_dof, n_dof));
    a.view_mut((n_dof, 0), (n_dof, n_dof)).copy_from(&(-minv_k));
    a.view_mut((n_dof, n_dof), (n_dof, n_dof)).copy_from(&(-minv_g));
    let mut b = DMatrix::zeros(2 * n_dof, inputs);
    // Load enters with a negative sign, so outputs carry the same
    // convention as the reference first-order beam model.
    b.view_mut((n_dof, 0), (n_dof, inputs)).copy_from(&(-minv_f));
    let state_space = ContinuousStateSpace::new(a, b, selection.clone(), DMatrix::zeros(outputs, inputs))?;
    Ok(BeamModel {
        spec: spec.clone(),
        mass,
        stiffness,
        damping,
        force,
        selection,
        state_space,
    })
}

/// Undamped natural frequencies (Hz, ascending) and M-orthonormal mode
/// shapes (columns over the free DOFs).
#[derive(Debug, Clone)]
pub struct FemModes {
    pub frequencies_hz: Vec<f64>,
    pub shapes: DMatrix<f64>,
}

impl BeamModel {
    pub fn dof_count(&self) -> usize {
        self.mass.nrows()
    }

    pub fn discretize(&self, dt: f64) -> Result<DiscreteStateSpace> {
        discretize_zoh(&self.state_space, dt)
    }

    /// Solves `K φ = ω² M φ` through the Cholesky factor of `M`.
    pub fn natural_modes(&self) -> Result<FemModes> {
        let chol = self
            .mass
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidSpec("mass matrix is not positive definite".into()))?;
        let l = chol.l();
        let linv = l
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidSpec("singular mass factor".into()))?;
        let mut sym = &linv * &self.stiffness * linv.transpose();
        sym = (&sym + sym.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let vectors = linv.transpose() * &eig.eigenvectors;
        let n = order.len();
        let mut shapes = DMatrix::zeros(self.dof_count(), n);
        let mut frequencies_hz = Vec::with_capacity(n);
        for (col, &i) in order.iter().enumerate() {
            shapes.set_column(col, &vectors.column(i));
            frequencies_hz.push(eig.eigenvalues[i].max(0.0).sqrt() / (2.0 * std::f64::consts::PI));
        }
        Ok(FemModes {
            frequencies_hz,
            shapes,
        })
    }

    /// Rows of FEM mode shapes at the configured output nodes'
    /// translation DOFs.
    pub fn shapes_at_outputs(&self, modes: &FemModes) -> DMatrix<f64> {
        let rows: Vec<usize> = self
            .spec
            .output_nodes
            .iter()
            .map(|&n| BeamSpec::translation_dof(n))
            .collect();
        modes.shapes.select_rows(rows.iter())
    }

    /// `½ q̇ᵀ M q̇ + ½ qᵀ K q` for each state column.
    pub fn mechanical_energy(&self, states: &DMatrix<f64>) -> Vec<f64> {
        let n = self.dof_count();
        states
            .column_iter()
            .map(|x| {
                let q = x.rows(0, n);
                let v = x.rows(n, n);
                0.5 * (v.dot(&(&self.mass * v)) + q.dot(&(&self.stiffness * q)))
            })
            .collect()
    }
}

/// One excitation phase: a signal per input channel for `duration` seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub duration: f64,
    pub inputs: Vec<SignalSpec>,
}

impl Phase {
    pub fn single(duration: f64, signal: SignalSpec) -> Self {
        Self {
            duration,
            inputs: vec![signal],
        }
    }
}

/// Sample ranges of `phases` on `grid`; the last phase runs to the end.
pub fn phase_spans(phases: &[Phase], grid: &TimeGrid) -> Result<Vec<PhaseSpan>> {
    if phases.is_empty() {
        return Err(Error::InvalidSpec("at least one excitation phase is required".into()));
    }
    let mut starts = Vec::with_capacity(phases.len());
    let mut elapsed = 0.0;
    for p in phases {
        if !(p.duration > 0.0) {
            return Err(Error::InvalidSpec(format!("phase duration must be positive, got {}", p.duration)));
        }
        starts.push((elapsed / grid.dt).round() as usize);
        elapsed += p.duration;
    }
    let mut spans = Vec::with_capacity(phases.len());
    for (i, &start) in starts.iter().enumerate() {
        let end = starts.get(i + 1).copied().unwrap_or(grid.count).min(grid.count);
        if end < start + 2 {
            return Err(Error::InvalidSpec(format!(
                "phase {i} has fewer than two samples on the {}-sample grid",
                grid.count
            )));
        }
        spans.push(PhaseSpan {
            start,
            len: end - start,
        });
    }
    Ok(spans)
}

/// Renders the phased input record (`m x count`).
pub fn render_inputs(phases: &[Phase], grid: &TimeGrid, inputs: usize) -> Result<(DMatrix<f64>, Vec<PhaseSpan>)> {
    grid.validate()?;
    let spans = phase_spans(phases, grid)?;
    let mut u = DMatrix::zeros(inputs, grid.count);
    for (phase, span) in phases.iter().zip(&spans) {
        if phase.inputs.len() != inputs {
            return Err(Error::InvalidSpec(format!(
                "phase supplies {} input signals, model has {inputs} inputs",
                phase.inputs.len()
            )));
        }
        let local = TimeGrid::new(0.0, grid.dt, span.len)?;
        for (row, spec) in phase.inputs.iter().enumerate() {
            let samples = signals::render(spec, &local)?;
            for (k, v) in samples.into_iter().enumerate() {
                u[(row, span.start + k)] = v;
            }
        }
    }
    Ok((u, spans))
}

/// Simulates the beam from rest through all phases (no state reset between
/// phases), recording inputs, selected outputs and the full state. Output
/// noise is added when `noise_level > 0`.
pub fn generate_dataset(
    model: &BeamModel,
    phases: &[Phase],
    grid: &TimeGrid,
    noise_level: f64,
    seed: u64,
) -> Result<TrajectorySet> {
    let inputs = model.force.ncols();
    let (u, spans) = render_inputs(phases, grid, inputs)?;
    let sys = model.discretize(grid.dt)?;
    let sim = sys.simulate(&u, &DVector::zeros(sys.states()))?;
    let outputs = if noise_level > 0.0 {
        signals::add_noise(&sim.outputs, noise_level, seed)?
    } else {
        sim.outputs
    };
    let mut set = TrajectorySet::new(*grid, u, outputs, Some(sim.states))?;
    set.phases = spans;
    Ok(set)
}
