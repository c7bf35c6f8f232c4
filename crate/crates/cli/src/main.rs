//! Batch front-end for the magnon GKP simulator.
//!
//! Four subcommands: `derive` (device table → effective-model report),
//! `prepare` (run one preparation sequence and write its state/diagnostic
//! artifacts), `sweep` (tabulate the six logical presets against one swept
//! device parameter), and `wigner` (re-render a phase-space grid from a
//! saved state dump). Configs are JSON in file units (Hz/s/K, see
//! `config`); every output is a deterministic data file, so identical
//! configs give byte-identical artifacts on one platform.
//!
//! Status and warnings go to stderr; stdout carries data only.

mod config;
mod error;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use magnon_gkp::analysis::{
    effective_squeezing, effective_squeezing_pure, logical_tomography, logical_tomography_pure,
    squeezing_from_expectation, wigner, wigner_pure, GridSpec, LogicalTomography, SqueezingReport,
    WignerGrid,
};
use magnon_gkp::dynamics::IntegratorSettings;
use magnon_gkp::hilbert::{DensityState, FockSpace, HybridState, QubitOutcome};
use magnon_gkp::params::{derive, DeviceConfig, EffectiveModel};
use magnon_gkp::protocol::{
    preset_sequence, run_sequence, to_lab_frame, to_lab_frame_density, Evolution, LogicalTarget,
    ProtocolState, RunOutcome, Sequence,
};

use config::{
    load_config, resolve_device, resolve_sequence, set_device_field, validate_device, ModelReport,
    RunConfig, DEFAULT_TRUNCATION,
};
use error::CliError;

/// Pure states are handed to `drop_qubit` only when the qubit is collapsed
/// to better than this population; otherwise the qubit is traced out.
const COLLAPSE_TOL: f64 = 1e-9;

/// Dissipative step resolution: the RK4 step bound is the total sequence
/// evolution time divided by this (t₁/2000 for a standard two-round run).
const STEPS_PER_RUN: f64 = 4000.0;

#[derive(Parser)]
#[command(
    name = "mgkp",
    version,
    about = "Magnonic GKP state-preparation batch tool"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Derive the effective conditional-displacement model from a device
    /// config and report it (JSON).
    Derive(DeriveArgs),
    /// Run a preparation sequence and write state/diagnostic artifacts.
    Prepare(PrepareArgs),
    /// Tabulate the six logical presets against one swept device parameter.
    Sweep(SweepArgs),
    /// Re-render a Wigner grid from a saved state dump.
    Wigner(WignerArgs),
}

#[derive(Args)]
struct DeriveArgs {
    /// Run-config JSON path.
    #[arg(long)]
    config: PathBuf,
    /// Artifact directory (report to stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PrepareArgs {
    /// Run-config JSON path.
    #[arg(long)]
    config: PathBuf,
    /// Artifact directory (overrides the config's `output`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Magnon Fock truncation (overrides the config's `truncation`).
    #[arg(long)]
    dim: Option<usize>,
    /// Master-equation evolution on or off (overrides the config's `noise`).
    #[arg(long)]
    noise: Option<NoiseFlag>,
    /// Worker-thread bound for grid evaluation.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    /// Run-config JSON path (must contain a `sweep` spec).
    #[arg(long)]
    config: PathBuf,
    /// Artifact directory (table to stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Magnon Fock truncation (overrides the config's `truncation`).
    #[arg(long)]
    dim: Option<usize>,
    /// Master-equation evolution on or off (overrides the config's `noise`).
    #[arg(long)]
    noise: Option<NoiseFlag>,
    /// Concurrent-row bound.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct WignerArgs {
    /// Saved state dump (`state.json` from `prepare`).
    #[arg(long)]
    state: PathBuf,
    /// Optional run config supplying the grid spec.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Artifact directory (CSV to stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker-thread bound for grid evaluation.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseFlag {
    On,
    Off,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Derive(args) => cmd_derive(args),
        Cmd::Prepare(args) => cmd_prepare(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Wigner(args) => cmd_wigner(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

// ---------------------------------------------------------------------------
// shared plumbing
// ---------------------------------------------------------------------------

fn limit_threads(jobs: Option<usize>) -> Result<(), CliError> {
    if let Some(k) = jobs {
        if k == 0 {
            return Err(CliError::config("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::config(format!("cannot configure {k} worker threads: {e}")))?;
    }
    Ok(())
}

fn resolve_model(cfg: &RunConfig) -> Result<(DeviceConfig, EffectiveModel), CliError> {
    let resolved = resolve_device(&cfg.device)?;
    for w in &resolved.warnings {
        eprintln!("warning: {w}");
    }
    validate_device(&resolved.config)?;
    let model = derive(&resolved.config)?;
    Ok((resolved.config, model))
}

fn pick_dim(flag: Option<usize>, cfg: &RunConfig) -> usize {
    flag.or(cfg.truncation).unwrap_or(DEFAULT_TRUNCATION)
}

fn pick_noise(flag: Option<NoiseFlag>, cfg: &RunConfig) -> bool {
    match flag {
        Some(NoiseFlag::On) => true,
        Some(NoiseFlag::Off) => false,
        None => cfg.noise,
    }
}

fn pick_grid(cfg: Option<&RunConfig>) -> Result<GridSpec, CliError> {
    let grid = cfg.and_then(|c| c.grid).unwrap_or_default();
    grid.validate()?;
    Ok(grid)
}

fn out_dir(flag: Option<PathBuf>, cfg: &RunConfig) -> Option<PathBuf> {
    flag.or_else(|| cfg.output.clone())
}

fn create_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn integrator_for(seq: &Sequence) -> IntegratorSettings {
    let total = seq.total_duration();
    let max_dt = if total > 0.0 {
        total / STEPS_PER_RUN
    } else {
        1.0
    };
    IntegratorSettings::with_max_dt(max_dt)
}

fn run_prepared(
    seq: &Sequence,
    model: &EffectiveModel,
    noise: bool,
    space: FockSpace,
) -> Result<RunOutcome, CliError> {
    let initial = ProtocolState::ground_register(space, noise);
    let outcome = if noise {
        run_sequence(
            seq,
            initial,
            &Evolution::Dissipative {
                model,
                settings: integrator_for(seq),
            },
        )?
    } else {
        run_sequence(seq, initial, &Evolution::Pure { chi: model.chi })?
    };
    Ok(outcome)
}

/// Lab-frame magnon state extracted from a finished register.
#[derive(Debug)]
enum MagnonState {
    Pure(HybridState),
    Density(DensityState),
}

impl MagnonState {
    fn tomography(&self) -> Result<LogicalTomography, CliError> {
        Ok(match self {
            MagnonState::Pure(psi) => logical_tomography_pure(psi)?,
            MagnonState::Density(rho) => logical_tomography(rho)?,
        })
    }

    fn squeezing(&self) -> Result<SqueezingReport, CliError> {
        Ok(match self {
            MagnonState::Pure(psi) => effective_squeezing_pure(psi)?,
            MagnonState::Density(rho) => effective_squeezing(rho)?,
        })
    }

    fn wigner(&self, grid: &GridSpec) -> Result<WignerGrid, CliError> {
        Ok(match self {
            MagnonState::Pure(psi) => wigner_pure(psi, grid)?,
            MagnonState::Density(rho) => wigner(rho, grid)?,
        })
    }
}

/// Drop or trace out the qubit and undo the Bogoliubov frame. A qubit left
/// in superposition by an explicit sequence is traced out (the state then
/// continues on the density path); presets always end collapsed.
fn extract_lab_magnon(state: &ProtocolState, r: f64) -> Result<MagnonState, CliError> {
    match state {
        ProtocolState::Pure(psi) => {
            let excited: f64 = psi
                .amplitudes
                .iter()
                .skip(1)
                .step_by(2)
                .map(|a| a.norm_sqr())
                .sum();
            if excited < COLLAPSE_TOL {
                let m = psi.drop_qubit(QubitOutcome::G)?;
                Ok(MagnonState::Pure(to_lab_frame(&m, r)?))
            } else if excited > 1.0 - COLLAPSE_TOL {
                let m = psi.drop_qubit(QubitOutcome::E)?;
                Ok(MagnonState::Pure(to_lab_frame(&m, r)?))
            } else {
                let rho = psi.to_density().partial_trace_qubit()?;
                Ok(MagnonState::Density(to_lab_frame_density(&rho, r)?))
            }
        }
        ProtocolState::Mixed(rho) => {
            let m = rho.partial_trace_qubit()?;
            Ok(MagnonState::Density(to_lab_frame_density(&m, r)?))
        }
    }
}

// ---------------------------------------------------------------------------
// saved-state dumps
// ---------------------------------------------------------------------------

/// Saved lab-frame magnon state: `space_dims` plus flattened complex
/// entries as (re, im) pairs — a vector for pure states, a row-major matrix
/// for densities.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum StateDump {
    Pure {
        space_dims: Vec<usize>,
        amplitudes: Vec<f64>,
    },
    Density {
        space_dims: Vec<usize>,
        matrix: Vec<f64>,
    },
}

fn pack_pairs<'a>(values: impl Iterator<Item = &'a C64>) -> Vec<f64> {
    let mut out = Vec::new();
    for v in values {
        out.push(v.re);
        out.push(v.im);
    }
    out
}

fn unpack_pairs(data: &[f64], what: &str) -> Result<Vec<C64>, CliError> {
    if !data.len().is_multiple_of(2) {
        return Err(CliError::config(format!(
            "{what} holds {} numbers; (re, im) pairs need an even count",
            data.len()
        )));
    }
    if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
        return Err(CliError::config(format!(
            "{what} contains non-finite entry {bad}"
        )));
    }
    Ok(data.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect())
}

impl StateDump {
    fn from_magnon(state: &MagnonState) -> Self {
        match state {
            MagnonState::Pure(psi) => StateDump::Pure {
                space_dims: psi.space_dims.clone(),
                amplitudes: pack_pairs(psi.amplitudes.iter()),
            },
            MagnonState::Density(rho) => StateDump::Density {
                space_dims: rho.space_dims.clone(),
                matrix: pack_pairs(rho.matrix.iter()),
            },
        }
    }

    fn into_magnon(self) -> Result<MagnonState, CliError> {
        match self {
            StateDump::Pure {
                space_dims,
                amplitudes,
            } => {
                let amps = unpack_pairs(&amplitudes, "amplitudes")?;
                Ok(MagnonState::Pure(HybridState::new(
                    space_dims,
                    ndarray::Array1::from_vec(amps),
                )?))
            }
            StateDump::Density { space_dims, matrix } => {
                let entries = unpack_pairs(&matrix, "matrix")?;
                let n: usize = space_dims.iter().product();
                let m = ndarray::Array2::from_shape_vec((n, n), entries).map_err(|_| {
                    CliError::config(format!(
                        "matrix holds {} complex entries; dims {space_dims:?} require {}",
                        matrix.len() / 2,
                        n * n
                    ))
                })?;
                Ok(MagnonState::Density(DensityState::new(space_dims, m)?))
            }
        }
    }
}

fn load_state(path: &Path) -> Result<MagnonState, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let dump: StateDump = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    dump.into_magnon()
}

// ---------------------------------------------------------------------------
// derive
// ---------------------------------------------------------------------------

fn cmd_derive(args: DeriveArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.config)?;
    let (device, model) = resolve_model(&cfg)?;
    let report = ModelReport::new(&device, &model);
    match out_dir(args.out, &cfg) {
        Some(dir) => {
            create_out_dir(&dir)?;
            write_json(&dir.join("model.json"), &report)?;
            eprintln!("wrote {}", dir.join("model.json").display());
        }
        None => {
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            print!("{text}");
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// prepare
// ---------------------------------------------------------------------------

/// Run metadata written next to the state artifacts.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct RunReport {
    /// Logical-preset label when the sequence came from a preset.
    preset: Option<String>,
    noise: bool,
    truncation: usize,
    total_duration_s: f64,
    /// Born probability of each qubit projection, in order.
    projection_probabilities: Vec<f64>,
    /// Product of the projection probabilities (protocol success rate).
    cumulative_probability: f64,
    /// Worst top-of-ladder population seen at any step boundary.
    max_truncation_leakage: f64,
    /// Worst trace drift reported by the integrator (0 for pure runs).
    worst_trace_drift: f64,
}

fn cmd_prepare(args: PrepareArgs) -> Result<(), CliError> {
    limit_threads(args.jobs)?;
    let cfg = load_config(&args.config)?;
    let dir = out_dir(args.out, &cfg).ok_or_else(|| {
        CliError::config("prepare writes artifacts; give --out or set `output` in the config")
    })?;
    let (device, model) = resolve_model(&cfg)?;
    let noise = pick_noise(args.noise, &cfg);
    let dim = pick_dim(args.dim, &cfg);
    let grid = pick_grid(Some(&cfg))?;
    let seq_src = cfg
        .sequence
        .as_ref()
        .ok_or_else(|| CliError::config("prepare needs a `sequence` (preset or steps)"))?;
    let (seq, preset) = resolve_sequence(seq_src, &model)?;

    let space = FockSpace::new(dim)?;
    let outcome = run_prepared(&seq, &model, noise, space)?;
    let magnon = extract_lab_magnon(&outcome.state, model.r)?;

    create_out_dir(&dir)?;
    write_json(&dir.join("model.json"), &ModelReport::new(&device, &model))?;
    write_json(
        &dir.join("run.json"),
        &RunReport {
            preset: preset.map(|t| t.label().to_string()),
            noise,
            truncation: dim,
            total_duration_s: seq.total_duration(),
            projection_probabilities: outcome.probabilities.clone(),
            cumulative_probability: outcome.cumulative_probability,
            max_truncation_leakage: outcome.max_leakage,
            worst_trace_drift: outcome.worst_trace_drift,
        },
    )?;
    write_json(&dir.join("state.json"), &StateDump::from_magnon(&magnon))?;
    write_json(&dir.join("tomography.json"), &magnon.tomography()?)?;
    write_json(&dir.join("squeezing.json"), &magnon.squeezing()?)?;
    let w = magnon.wigner(&grid)?;
    write_wigner_artifacts(&dir, &w)?;

    eprintln!(
        "wrote artifacts to {} (P_success = {:.4}, leakage = {:.2e})",
        dir.display(),
        outcome.cumulative_probability,
        outcome.max_leakage
    );
    Ok(())
}

fn write_wigner_artifacts(dir: &Path, w: &WignerGrid) -> Result<(), CliError> {
    write_text(&dir.join("wigner.csv"), &w.to_csv())?;
    write_json(&dir.join("wigner.json"), w)?;
    let (pq, pp) = w.marginals();
    let mut q_csv = String::from("q,P\n");
    for (x, p) in w.q_axis.iter().zip(&pq) {
        q_csv.push_str(&format!("{x},{p}\n"));
    }
    let mut p_csv = String::from("p,P\n");
    for (x, p) in w.p_axis.iter().zip(&pp) {
        p_csv.push_str(&format!("{x},{p}\n"));
    }
    write_text(&dir.join("marginal_q.csv"), &q_csv)?;
    write_text(&dir.join("marginal_p.csv"), &p_csv)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepRow {
    value: f64,
    result: Result<SweepPoint, CliError>,
}

struct SweepPoint {
    f_bar: f64,
    fidelities: [f64; 6],
    avg_abs_sx: f64,
    avg_abs_sz: f64,
    db_x: f64,
    db_z: f64,
}

fn evaluate_point(
    base: &DeviceConfig,
    parameter: &str,
    value: f64,
    dim: usize,
    noise: bool,
) -> Result<SweepPoint, CliError> {
    let mut device = *base;
    set_device_field(&mut device, parameter, value)?;
    validate_device(&device)?;
    let model = derive(&device)?;
    let space = FockSpace::new(dim)?;

    let mut fidelities = [0.0; 6];
    let mut sx = [0.0; 6];
    let mut sz = [0.0; 6];
    for (k, target) in LogicalTarget::ALL.iter().enumerate() {
        let seq = preset_sequence(*target, &model);
        let outcome = run_prepared(&seq, &model, noise, space)?;
        let magnon = extract_lab_magnon(&outcome.state, model.r)?;
        fidelities[k] = magnon.tomography()?.fidelities[target];
        let sq = magnon.squeezing()?;
        sx[k] = sq.exp_sx.norm();
        sz[k] = sq.exp_sz.norm();
    }
    let mean = |v: &[f64; 6]| v.iter().sum::<f64>() / 6.0;
    let avg_abs_sx = mean(&sx);
    let avg_abs_sz = mean(&sz);
    let (_, db_x) = squeezing_from_expectation(C64::new(avg_abs_sx, 0.0));
    let (_, db_z) = squeezing_from_expectation(C64::new(avg_abs_sz, 0.0));
    Ok(SweepPoint {
        f_bar: mean(&fidelities),
        fidelities,
        avg_abs_sx,
        avg_abs_sz,
        db_x,
        db_z,
    })
}

fn sweep_csv(parameter: &str, rows: &[SweepRow]) -> String {
    let mut csv = format!(
        "{parameter},f_bar,f_zero,f_one,f_plus,f_minus,f_phi_plus,f_phi_minus,avg_abs_sx,avg_abs_sz,db_x,db_z,error\n"
    );
    for row in rows {
        match &row.result {
            Ok(p) => {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},\n",
                    row.value,
                    p.f_bar,
                    p.fidelities[0],
                    p.fidelities[1],
                    p.fidelities[2],
                    p.fidelities[3],
                    p.fidelities[4],
                    p.fidelities[5],
                    p.avg_abs_sx,
                    p.avg_abs_sz,
                    p.db_x,
                    p.db_z,
                ));
            }
            Err(e) => {
                let msg = e.to_string().replace(['\n', ','], ";");
                csv.push_str(&format!("{},,,,,,,,,,,,{msg}\n", row.value));
            }
        }
    }
    csv
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    limit_threads(args.jobs)?;
    let cfg = load_config(&args.config)?;
    let sweep = cfg
        .sweep
        .clone()
        .ok_or_else(|| CliError::config("sweep needs a `sweep` spec (parameter, values)"))?;
    if sweep.values.is_empty() {
        return Err(CliError::config("sweep needs at least one value"));
    }
    // Resolve and range-check the base device, but leave model derivation to
    // the rows: a swept field may be exactly what makes the base unstable.
    let resolved = resolve_device(&cfg.device)?;
    for w in &resolved.warnings {
        eprintln!("warning: {w}");
    }
    validate_device(&resolved.config)?;
    let device = resolved.config;
    let noise = pick_noise(args.noise, &cfg);
    let dim = pick_dim(args.dim, &cfg);

    // Path and value validity are config errors and abort the whole sweep;
    // later physics/numerics failures are recorded per row instead.
    for &v in &sweep.values {
        if !v.is_finite() {
            return Err(CliError::config(format!("sweep value {v} is not finite")));
        }
        let mut probe = device;
        set_device_field(&mut probe, &sweep.parameter, v)?;
        validate_device(&probe)?;
    }

    let rows: Vec<SweepRow> = sweep
        .values
        .par_iter()
        .map(|&value| SweepRow {
            value,
            result: evaluate_point(&device, &sweep.parameter, value, dim, noise),
        })
        .collect();

    for row in &rows {
        if let Err(e) = &row.result {
            eprintln!("warning: row {} failed: {e}", row.value);
        }
    }

    let csv = sweep_csv(&sweep.parameter, &rows);
    match out_dir(args.out, &cfg) {
        Some(dir) => {
            create_out_dir(&dir)?;
            write_text(&dir.join("sweep.csv"), &csv)?;
            eprintln!(
                "wrote {} ({} rows)",
                dir.join("sweep.csv").display(),
                rows.len()
            );
        }
        None => print!("{csv}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// wigner re-render
// ---------------------------------------------------------------------------

fn cmd_wigner(args: WignerArgs) -> Result<(), CliError> {
    limit_threads(args.jobs)?;
    let cfg = match &args.config {
        Some(path) => Some(load_config(path)?),
        None => None,
    };
    let grid = pick_grid(cfg.as_ref())?;
    let state = load_state(&args.state)?;
    let w = state.wigner(&grid)?;
    let out = args
        .out
        .or_else(|| cfg.as_ref().and_then(|c| c.output.clone()));
    match out {
        Some(dir) => {
            create_out_dir(&dir)?;
            write_wigner_artifacts(&dir, &w)?;
            eprintln!("wrote Wigner artifacts to {}", dir.display());
        }
        None => print!("{}", w.to_csv()),
    }
    Ok(())
}
