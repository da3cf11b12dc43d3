//! Subcommand implementations. Each takes resolved paths and configuration
//! and returns a JSON-serializable summary; `main` only parses arguments.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use wdmd::beamfem::{self, BeamModel, BeamSpec};
use wdmd::fit::{self, Method};
use wdmd::linalg::Complex64;
use wdmd::lti::{self, ModeSet};
use wdmd::metrics::{self, ErrorReport, MacMatrix, WelchOptions};
use wdmd::modwt::{self, FilterBank};
use wdmd::{DiscreteStateSpace, TrajectorySet, WaveletBasis};

use crate::config::{sha256_hex, ExperimentConfig, MetricsSpec};
use crate::error::{CliError, Result};
use crate::io::{self, fmt_f64, ModelFile, Provenance, StateFile, TOOL_VERSION};

pub const TRAIN_CSV: &str = "train.csv";
pub const TRAIN_STATES_CSV: &str = "train_states.csv";
pub const TEST_CSV: &str = "test.csv";
pub const TEST_STATES_CSV: &str = "test_states.csv";
pub const TRUTH_JSON: &str = "truth.json";
pub const MANIFEST_JSON: &str = "manifest.json";

/// Simulated records of one experiment.
#[derive(Debug, Clone)]
pub struct Records {
    pub model: BeamModel,
    pub train: TrajectorySet,
    pub test: Option<TrajectorySet>,
}

/// Assembles `beam` and simulates the configured records from rest. The
/// test record's noise uses the next seed so the two records are independent.
pub fn simulate_records(cfg: &ExperimentConfig, beam: &BeamSpec) -> Result<Records> {
    let model = beamfem::assemble(beam)?;
    let record = |rec: &crate::config::RecordSpec, seed: u64| -> Result<TrajectorySet> {
        let grid = rec.grid()?;
        Ok(beamfem::generate_dataset(&model, &rec.phases, &grid, rec.noise_level, seed)?)
    };
    let train = record(&cfg.train, cfg.seed)?;
    let test = cfg
        .test
        .as_ref()
        .map(|t| record(t, cfg.seed.wrapping_add(1)))
        .transpose()?;
    Ok(Records { model, train, test })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub rows: usize,
    pub columns: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub sample_rate: f64,
    pub force_nodes: Vec<usize>,
    pub output_nodes: Vec<usize>,
    pub states: usize,
    pub files: Vec<FileEntry>,
}

fn file_entry(dir: &Path, name: &str, rows: usize, columns: usize) -> Result<FileEntry> {
    let path = dir.join(name);
    let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
    Ok(FileEntry {
        name: name.into(),
        rows,
        columns,
        sha256: sha256_hex(&bytes),
    })
}

/// Writes the training (and test) trajectories, their full-state files,
/// the ZOH-discretized truth model and a manifest into `paths.out_dir`.
pub fn generate(cfg: &ExperimentConfig) -> Result<Manifest> {
    cfg.validate()?;
    let dir = &cfg.paths.out_dir;
    let rec = simulate_records(cfg, &cfg.beam)?;
    let mut files = Vec::new();
    let mut write = |set: &TrajectorySet, data: &str, states: &str| -> Result<()> {
        let times = set.grid.times();
        io::write_trajectory(&dir.join(data), &times, &set.inputs, &set.outputs)?;
        let x = set.states.as_ref().expect("generated records carry states");
        io::write_states(&dir.join(states), &times, x)?;
        files.push(file_entry(dir, data, times.len(), 1 + set.input_count() + set.output_count())?);
        files.push(file_entry(dir, states, times.len(), 1 + x.nrows())?);
        Ok(())
    };
    write(&rec.train, TRAIN_CSV, TRAIN_STATES_CSV)?;
    if let Some(test) = &rec.test {
        write(test, TEST_CSV, TEST_STATES_CSV)?;
    }
    let truth = rec.model.discretize(rec.train.grid.dt)?;
    let mut truth_file = ModelFile::from_model("truth", &truth, provenance(cfg, None));
    truth_file.output_nodes = Some(cfg.beam.output_nodes.clone());
    truth_file.save(&dir.join(TRUTH_JSON))?;
    files.push(file_entry(dir, TRUTH_JSON, 0, 0)?);
    let manifest = Manifest {
        tool_version: TOOL_VERSION.into(),
        config_sha256: cfg.digest(),
        seed: cfg.seed,
        sample_rate: cfg.train.sample_rate,
        force_nodes: cfg.beam.force_nodes.clone(),
        output_nodes: cfg.beam.output_nodes.clone(),
        states: truth.states(),
        files,
    };
    io::write_json(&dir.join(MANIFEST_JSON), &manifest)?;
    Ok(manifest)
}

fn provenance(cfg: &ExperimentConfig, data: Option<&Path>) -> Provenance {
    Provenance {
        config_sha256: cfg.digest(),
        data_sha256: data.and_then(|p| std::fs::read(p).ok()).map(|b| sha256_hex(&b)),
        tool_version: TOOL_VERSION.into(),
    }
}

/// Initial state for simulations of a saved model: zero (the records start
/// at rest), except for plain DMD, which has no input and only moves from
/// its fitted initial state.
pub fn default_initial_state(file: &ModelFile) -> DVector<f64> {
    if file.method == Method::Dmd.as_str() {
        file.initial_state()
    } else {
        DVector::zeros(file.dims.states)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub method: String,
    pub states: usize,
    pub rank_used: usize,
    pub residual: f64,
    pub eps_td_train: f64,
    pub model: PathBuf,
}

/// Fits `cfg.fit` to a trajectory CSV and writes the model JSON.
pub fn fit(cfg: &ExperimentConfig, data: &Path, states: Option<&Path>, out: &Path) -> Result<FitSummary> {
    cfg.fit.validate()?;
    if cfg.fit.method.needs_states() && states.is_none() {
        return Err(CliError::MissingStates(cfg.fit.method.to_string()));
    }
    let set = io::load_dataset(data, states)?;
    let result = fit::fit(&set, &cfg.fit)?;
    let mut file = ModelFile::from_fit(&result, provenance(cfg, Some(data)));
    if cfg.beam.output_nodes.len() == set.output_count() {
        file.output_nodes = Some(cfg.beam.output_nodes.clone());
    }
    let sim = result.model.simulate(&set.inputs, &default_initial_state(&file))?;
    let eps = metrics::eps_td(&set.outputs, &sim.outputs)?;
    file.save(out)?;
    Ok(FitSummary {
        method: result.method.to_string(),
        states: result.model.states(),
        rank_used: result.rank_used,
        residual: result.residual,
        eps_td_train: eps,
        model: out.to_path_buf(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub samples: usize,
    pub outputs: usize,
    pub final_state: Option<PathBuf>,
}

/// Drives a saved model with the inputs of a trajectory CSV.
pub fn simulate(
    model: &Path,
    input: &Path,
    z0: Option<&Path>,
    out: &Path,
    final_state: Option<&Path>,
) -> Result<SimulateSummary> {
    let file = ModelFile::load(model)?;
    let sys = file.model()?;
    let traj = io::read_trajectory(input)?;
    if traj.inputs.nrows() != sys.inputs() {
        return Err(CliError::DimMismatch(format!(
            "model has {} inputs, {} has {}",
            sys.inputs(),
            input.display(),
            traj.inputs.nrows()
        )));
    }
    let start = match z0 {
        Some(p) => {
            let s: StateFile = io::read_json(p)?;
            if s.state.len() != sys.states() {
                return Err(CliError::DimMismatch(format!(
                    "model has {} states, {} holds {}",
                    sys.states(),
                    p.display(),
                    s.state.len()
                )));
            }
            DVector::from_vec(s.state)
        }
        None => default_initial_state(&file),
    };
    let sim = sys.simulate(&traj.inputs, &start)?;
    io::write_trajectory(out, &traj.times, &traj.inputs, &sim.outputs)?;
    if let Some(p) = final_state {
        io::write_json(
            p,
            &StateFile {
                state: sim.final_state.iter().copied().collect(),
            },
        )?;
    }
    Ok(SimulateSummary {
        samples: traj.times.len(),
        outputs: sim.outputs.nrows(),
        final_state: final_state.map(Path::to_path_buf),
    })
}

fn frf_header(outputs: usize, inputs: usize) -> Vec<String> {
    let mut header = vec!["f_hz".to_string()];
    for i in 1..=outputs {
        for j in 1..=inputs {
            header.push(format!("re_y{i}_u{j}"));
            header.push(format!("im_y{i}_u{j}"));
        }
    }
    header
}

pub fn write_frf(path: &Path, freqs_hz: &[f64], h: &[DMatrix<Complex64>]) -> Result<()> {
    let (p, m) = h.first().map_or((0, 0), |b| b.shape());
    let rows = freqs_hz.iter().zip(h).map(|(f, b)| {
        let mut row = vec![fmt_f64(*f)];
        for i in 0..p {
            for j in 0..m {
                row.push(fmt_f64(b[(i, j)].re));
                row.push(fmt_f64(b[(i, j)].im));
            }
        }
        row
    });
    io::write_csv(path, &frf_header(p, m), rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrfSummary {
    pub points: usize,
    pub peak_gain: f64,
    pub peak_hz: f64,
}

/// Discrete FRF `C (e^{iωdt} I - A)^{-1} B + D` of a saved model.
pub fn frf(model: &Path, grid: &MetricsSpec, out: &Path) -> Result<FrfSummary> {
    let sys = ModelFile::load(model)?.model()?;
    let freqs = grid.frequencies_hz();
    let h = lti::frf_discrete(&sys, &grid.omegas())?;
    write_frf(out, &freqs, &h)?;
    let (peak_gain, peak_hz) = h
        .iter()
        .zip(&freqs)
        .map(|(b, f)| (wdmd::linalg::spectral_norm(b), *f))
        .fold((0.0, f64::NAN), |acc, x| if x.0 > acc.0 { x } else { acc });
    Ok(FrfSummary {
        points: freqs.len(),
        peak_gain,
        peak_hz,
    })
}

pub fn write_modes(path: &Path, modes: &ModeSet) -> Result<()> {
    let p = modes.shapes.nrows();
    let mut header: Vec<String> = [
        "mode",
        "freq_hz",
        "natural_freq_hz",
        "damping",
        "lambda_re",
        "lambda_im",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for i in 1..=p {
        header.push(format!("re_y{i}"));
        header.push(format!("im_y{i}"));
    }
    let rows = (0..modes.len()).map(|k| {
        let mut row = vec![
            (k + 1).to_string(),
            fmt_f64(modes.frequencies_hz[k]),
            fmt_f64(modes.natural_frequencies_hz[k]),
            fmt_f64(modes.damping[k]),
            fmt_f64(modes.discrete[k].re),
            fmt_f64(modes.discrete[k].im),
        ];
        for i in 0..p {
            row.push(fmt_f64(modes.shapes[(i, k)].re));
            row.push(fmt_f64(modes.shapes[(i, k)].im));
        }
        row
    });
    io::write_csv(path, &header, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModesSummary {
    pub modes: usize,
    /// Damped frequencies of the lowest modes (Hz).
    pub lowest_hz: Vec<f64>,
}

pub fn modes(model: &Path, out: &Path) -> Result<ModesSummary> {
    let sys = ModelFile::load(model)?.model()?;
    let set = lti::extract_modes(&sys)?;
    write_modes(out, &set)?;
    Ok(ModesSummary {
        modes: set.len(),
        lowest_hz: set.frequencies_hz.iter().take(10).copied().collect(),
    })
}

/// Where `eval` takes its frequency-domain and modal reference from.
#[derive(Debug, Clone)]
pub enum Reference {
    /// A saved discrete model (for example `truth.json` from `generate`).
    Truth(PathBuf),
    /// The continuous beam model of the configuration.
    Beam(Box<ExperimentConfig>),
    /// Welch estimate from the evaluated record itself (single input).
    Empirical,
}

/// Reference modes: frequencies (Hz) and output-space shapes as columns.
#[derive(Debug, Clone)]
pub struct ReferenceModes {
    pub frequencies_hz: Vec<f64>,
    pub shapes: DMatrix<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacSummary {
    pub reference_hz: Vec<f64>,
    /// Paired model frequency per reference mode (`None` when unpaired).
    pub model_hz: Vec<Option<f64>>,
    pub diagonal: Vec<f64>,
    pub max_off_diagonal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub reference: String,
    pub eps_td: f64,
    pub eps_fd: Option<f64>,
    /// Why `eps_fd` is missing, when it is.
    pub eps_fd_error: Option<String>,
    pub per_channel_td: Vec<f64>,
    pub samples: usize,
    pub frequencies: usize,
    pub mac: Option<MacSummary>,
}

/// Pairs model modes to the reference by frequency and tabulates MAC over
/// the paired modes (rows: reference, columns: paired model modes).
pub fn mac_against(reference: &ReferenceModes, model: &ModeSet) -> Result<(MacSummary, MacMatrix)> {
    if reference.shapes.nrows() != model.shapes.nrows() {
        return Err(CliError::DimMismatch(format!(
            "reference shapes have {} rows, model shapes {}",
            reference.shapes.nrows(),
            model.shapes.nrows()
        )));
    }
    let pairs = metrics::pair_by_frequency(&reference.frequencies_hz, &model.frequencies_hz);
    let paired: Vec<(usize, usize)> = pairs
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.map(|j| (i, j)))
        .collect();
    let refs = DMatrix::from_fn(reference.shapes.nrows(), paired.len(), |r, c| {
        reference.shapes[(r, paired[c].0)]
    });
    let cands = DMatrix::from_fn(model.shapes.nrows(), paired.len(), |r, c| model.shapes[(r, paired[c].1)]);
    let mut table = metrics::mac(&refs, &cands)?;
    table.row_labels = paired.iter().map(|(i, _)| format!("ref{}", i + 1)).collect();
    table.col_labels = paired.iter().map(|(_, j)| format!("model{}", j + 1)).collect();
    let summary = MacSummary {
        reference_hz: reference.frequencies_hz.clone(),
        model_hz: pairs.iter().map(|p| p.map(|j| model.frequencies_hz[j])).collect(),
        diagonal: table.diagonal(),
        max_off_diagonal: table.max_off_diagonal(),
    };
    Ok((summary, table))
}

pub fn write_mac(path: &Path, table: &MacMatrix) -> Result<()> {
    let header: Vec<String> = std::iter::once("mode".to_string())
        .chain(table.col_labels.iter().cloned())
        .collect();
    let rows = (0..table.values.nrows()).map(|i| {
        std::iter::once(table.row_labels[i].clone())
            .chain(table.values.row(i).iter().map(|v| fmt_f64(*v)))
            .collect()
    });
    io::write_csv(path, &header, rows)
}

/// FEM modes at the given output nodes, lowest `count` first.
pub fn beam_reference_modes(model: &BeamModel, count: usize) -> Result<ReferenceModes> {
    let modes = model.natural_modes()?;
    let shapes = model.shapes_at_outputs(&modes);
    let k = count.min(modes.frequencies_hz.len());
    Ok(ReferenceModes {
        frequencies_hz: modes.frequencies_hz[..k].to_vec(),
        shapes: shapes.columns(0, k).map(Complex64::from),
    })
}

fn discrete_reference_modes(sys: &DiscreteStateSpace, count: usize) -> Result<ReferenceModes> {
    let modes = lti::extract_modes(sys)?;
    let k = count.min(modes.len());
    Ok(ReferenceModes {
        frequencies_hz: modes.frequencies_hz[..k].to_vec(),
        shapes: modes.shapes.columns(0, k).into_owned(),
    })
}

/// Time-domain error on a record plus frequency-domain error and MAC
/// against the chosen reference.
pub fn eval(
    model: &Path,
    data: &Path,
    reference: &Reference,
    grid: &MetricsSpec,
    mac_out: Option<&Path>,
) -> Result<EvalReport> {
    let file = ModelFile::load(model)?;
    let sys = file.model()?;
    let traj = io::read_trajectory(data)?;
    let dt_grid = traj.grid(data)?;
    if traj.inputs.nrows() != sys.inputs() || traj.outputs.nrows() != sys.outputs() {
        return Err(CliError::DimMismatch(format!(
            "model is {} in / {} out, {} has {} / {}",
            sys.inputs(),
            sys.outputs(),
            data.display(),
            traj.inputs.nrows(),
            traj.outputs.nrows()
        )));
    }
    let sim = sys.simulate(&traj.inputs, &default_initial_state(&file))?;
    let omegas = grid.omegas();
    let hhat = lti::frf_discrete(&sys, &omegas).map_err(CliError::from);
    let (label, h, ref_modes): (&str, Result<Vec<DMatrix<Complex64>>>, Option<ReferenceModes>) = match reference {
        Reference::Truth(path) => {
            let truth = ModelFile::load(path)?.model()?;
            (
                "truth",
                lti::frf_discrete(&truth, &omegas).map_err(CliError::from),
                Some(discrete_reference_modes(&truth, grid.mac_modes)?),
            )
        }
        Reference::Beam(cfg) => {
            let mut spec = cfg.beam.clone();
            if let Some(nodes) = &file.output_nodes {
                spec.output_nodes = nodes.clone();
            }
            let beam = beamfem::assemble(&spec)?;
            (
                "beam",
                lti::frf_continuous(&beam.state_space, &omegas).map_err(CliError::from),
                Some(beam_reference_modes(&beam, grid.mac_modes)?),
            )
        }
        Reference::Empirical => (
            "empirical",
            metrics::empirical_frf(&traj.inputs, &traj.outputs, &dt_grid, &omegas, WelchOptions::default())
                .map_err(CliError::from),
            None,
        ),
    };
    let (eps_fd, eps_fd_error) = match (h, hhat) {
        (Ok(h), Ok(hhat)) => {
            if h.first().map(|b| b.shape()) != hhat.first().map(|b| b.shape()) {
                return Err(CliError::DimMismatch("reference and model FRFs differ in shape".into()));
            }
            (Some(metrics::eps_fd(&h, &hhat)?), None)
        }
        (Err(e), _) | (_, Err(e)) => (None, Some(e.to_string())),
    };
    let td = ErrorReport::new(&traj.outputs, &sim.outputs, None)?;
    let mac = match ref_modes {
        Some(r) => {
            let (summary, table) = mac_against(&r, &lti::extract_modes(&sys)?)?;
            if let Some(p) = mac_out {
                write_mac(p, &table)?;
            }
            Some(summary)
        }
        None => None,
    };
    Ok(EvalReport {
        method: file.method.clone(),
        reference: label.into(),
        eps_td: td.eps_td,
        eps_fd,
        eps_fd_error,
        per_channel_td: td.per_channel_td,
        samples: td.samples,
        frequencies: omegas.len(),
        mac,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpSummary {
    pub levels: usize,
    pub samples: usize,
    pub columns: Vec<String>,
}

/// Writes the MODWT coefficients (or MRA series) of one CSV column, one
/// output column per level.
pub fn modwt_dump(
    data: &Path,
    column: &str,
    levels: usize,
    bank: &str,
    basis: WaveletBasis,
    out: &Path,
) -> Result<DumpSummary> {
    let (header, rows) = io::read_csv(data)?;
    let col = header
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| CliError::format(data, format!("no column `{column}`")))?;
    if rows.iter().any(|r| r.len() != header.len()) {
        return Err(CliError::format(data, "ragged rows"));
    }
    let series: Vec<f64> = rows.iter().map(|r| r[col]).collect();
    let bank = FilterBank::by_name(bank)?;
    let dec = modwt::forward(&series, &bank, levels)?;
    let (names, parts) = match basis {
        WaveletBasis::Modwt => (("w", "v"), (dec.wavelet.clone(), dec.scaling.clone())),
        WaveletBasis::Mra => {
            let m = modwt::mra(&dec, &bank)?;
            (("d", "s"), (m.details, m.smooth))
        }
    };
    let mut out_header = vec!["t".to_string()];
    out_header.extend((1..=levels).map(|j| format!("{}{j}", names.0)));
    out_header.push(format!("{}{levels}", names.1));
    let t0 = header.iter().position(|h| h == "t");
    let body = (0..series.len()).map(|k| {
        let t = t0.map_or(k as f64, |c| rows[k][c]);
        std::iter::once(t)
            .chain(parts.0.iter().map(|w| w[k]))
            .chain(std::iter::once(parts.1[k]))
            .map(fmt_f64)
            .collect()
    });
    io::write_csv(out, &out_header, body)?;
    Ok(DumpSummary {
        levels,
        samples: series.len(),
        columns: out_header,
    })
}
