//! JSON run-configuration schema and its resolution into core types.
//!
//! File-facing units are chosen to keep 2π bookkeeping out of config files:
//! frequencies, couplings, and rates in Hz (`*_hz`), durations in seconds,
//! temperatures in kelvin (`*_k`), lengths in meters (`*_m`), fields in
//! tesla (`*_t`). Conversion to angular units (rad/s) happens exactly once,
//! at this boundary.
//!
//! A minimal config:
//!
//! ```json
//! {
//!   "device": "reference",
//!   "sequence": { "preset": "zero" }
//! }
//! ```
//!
//! A custom device replaces `"reference"` with `{"custom": {...}}`, where
//! the parametric strength may be given directly (`xi_hz`) or derived from
//! an ellipsoid `geometry` + `material` pair; when both are present the
//! direct values win and a consistency warning is emitted. Explicit step
//! lists use the protocol-step schema, e.g.
//! `{"steps": [{"kind": "cd", "duration": 1.44e-7},
//! {"kind": "project_qubit", "outcome": "g"},
//! {"kind": "displace", "alpha": [0.0, 0.3]}]}` (complex amplitudes are
//! `[re, im]` pairs).

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use magnon_gkp::analysis::GridSpec;
use magnon_gkp::params::{
    half_lattice_time, kittel_params, phase_residuals, DeviceConfig, EffectiveModel,
    EllipsoidGeometry, FnCoeffs, MaterialParams, ValidityReport,
};
use magnon_gkp::protocol::{preset_sequence, LogicalTarget, ProtocolStep, Sequence};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Default magnon Fock truncation when neither the config nor `--dim` sets
/// one: enough headroom for the reference protocol's three-peak combs.
pub const DEFAULT_TRUNCATION: usize = 120;

/// Top-level run configuration (one JSON object per file).
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Device inputs: `"reference"` or `{"custom": {...}}`.
    pub device: DeviceSource,
    /// What to run: `{"preset": "..."}` or `{"steps": [...]}`. `derive` and
    /// `sweep` ignore it; `prepare` requires it.
    #[serde(default)]
    pub sequence: Option<SequenceSource>,
    /// Evolve the master equation instead of pure states (`--noise`
    /// overrides).
    #[serde(default)]
    pub noise: bool,
    /// Magnon Fock truncation (`--dim` overrides; default 120).
    #[serde(default)]
    pub truncation: Option<usize>,
    /// Artifact directory (`--out` overrides).
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Wigner grid; 161×161 over [−6, 6]² when absent.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Parameter sweep table (used by `sweep` only).
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

/// Where the device table comes from.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceSource {
    /// Built-in reference operating point.
    Reference,
    /// Explicit device table in file units.
    Custom(Box<DeviceFile>),
}

/// Custom device table. `omega_m_hz`/`xi_hz` may be omitted when a
/// `geometry` + `material` pair supplies them.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceFile {
    pub omega_c_hz: f64,
    pub omega_q_hz: f64,
    #[serde(default)]
    pub omega_m_hz: Option<f64>,
    pub g_cq_hz: f64,
    pub g_cm_hz: f64,
    #[serde(default)]
    pub xi_hz: Option<f64>,
    pub kappa_m_hz: f64,
    pub gamma_hz: f64,
    pub gamma_phi_hz: f64,
    pub temperature_k: f64,
    pub epsilon_hz: f64,
    pub omega_p_hz: f64,
    #[serde(default)]
    pub geometry: Option<GeometryFile>,
    #[serde(default)]
    pub material: Option<MaterialFile>,
}

/// Prolate-spheroid semi-axes in meters (a ≥ b = c).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryFile {
    pub a_m: f64,
    pub b_m: f64,
    pub c_m: f64,
}

/// Magnetic material and bias field in file units.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialFile {
    /// Gyromagnetic ratio as an ordinary frequency per tesla (Hz/T).
    pub gamma0_hz_per_t: f64,
    /// μ₀·M_s in tesla.
    pub mu0_ms_t: f64,
    /// Static bias field in tesla.
    pub b0_t: f64,
}

/// What to run.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceSource {
    /// One of the six logical presets: `zero`/`one`/`plus`/`minus`/
    /// `phi_plus`/`phi_minus` (short forms `0 1 + - phi+ phi-` also parse).
    Preset(String),
    /// Explicit squeezed-frame step list.
    Steps(Vec<ProtocolStep>),
}

/// One-parameter sweep: re-derive the model at each value and tabulate the
/// six logical presets.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Dotted field path in file units, e.g. `device.kappa_m_hz`.
    pub parameter: String,
    /// Values in the field's file units.
    pub values: Vec<f64>,
}

/// A resolved device: angular-unit config plus any consistency warnings.
#[derive(Debug)]
pub struct ResolvedDevice {
    pub config: DeviceConfig,
    pub warnings: Vec<String>,
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// Resolve a device source to angular units, deriving the Kittel frequency
/// and parametric strength from geometry when asked to. Direct values win
/// over geometry-derived ones, with a warning recording the discrepancy.
pub fn resolve_device(src: &DeviceSource) -> Result<ResolvedDevice, CliError> {
    let d = match src {
        DeviceSource::Reference => {
            return Ok(ResolvedDevice {
                config: DeviceConfig::reference(),
                warnings: Vec::new(),
            })
        }
        DeviceSource::Custom(d) => d,
    };

    let derived = match (&d.geometry, &d.material) {
        (Some(g), Some(m)) => {
            let geom = EllipsoidGeometry {
                a: g.a_m,
                b: g.b_m,
                c: g.c_m,
            };
            let mat = MaterialParams {
                gamma0: TAU * m.gamma0_hz_per_t,
                mu0_ms: m.mu0_ms_t,
                b0: m.b0_t,
            };
            Some(kittel_params(&geom, &mat)?)
        }
        (None, None) => None,
        _ => {
            return Err(CliError::config(
                "geometry and material must be given together",
            ))
        }
    };

    let mut warnings = Vec::new();
    let mut pick = |name: &str, direct_hz: Option<f64>, geo: Option<f64>| match (direct_hz, geo) {
        (Some(hz), Some(g)) => {
            warnings.push(format!(
                "direct {name} = {hz} Hz overrides the geometry-derived {} Hz",
                g / TAU
            ));
            Ok(TAU * hz)
        }
        (Some(hz), None) => Ok(TAU * hz),
        (None, Some(g)) => Ok(g),
        (None, None) => Err(CliError::config(format!(
            "{name} missing and no geometry/material pair to derive it from"
        ))),
    };
    let omega_m = pick("omega_m_hz", d.omega_m_hz, derived.map(|k| k.0))?;
    let xi = pick("xi_hz", d.xi_hz, derived.map(|k| k.1))?;

    Ok(ResolvedDevice {
        config: DeviceConfig {
            omega_c: TAU * d.omega_c_hz,
            omega_q: TAU * d.omega_q_hz,
            omega_m,
            g_cq: TAU * d.g_cq_hz,
            g_cm: TAU * d.g_cm_hz,
            xi,
            kappa_m: TAU * d.kappa_m_hz,
            gamma: TAU * d.gamma_hz,
            gamma_phi: TAU * d.gamma_phi_hz,
            temperature: d.temperature_k,
            epsilon: TAU * d.epsilon_hz,
            omega_p: TAU * d.omega_p_hz,
        },
        warnings,
    })
}

/// Range checks on a resolved device: everything finite, mode frequencies
/// strictly positive, couplings/rates/temperature non-negative.
pub fn validate_device(cfg: &DeviceConfig) -> Result<(), CliError> {
    let strictly_positive = [
        ("omega_c_hz", cfg.omega_c),
        ("omega_q_hz", cfg.omega_q),
        ("omega_m_hz", cfg.omega_m),
        ("omega_p_hz", cfg.omega_p),
    ];
    for (name, v) in strictly_positive {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::config(format!(
                "{name} must be finite and positive, got {} Hz",
                v / TAU
            )));
        }
    }
    let non_negative = [
        ("g_cq_hz", cfg.g_cq),
        ("g_cm_hz", cfg.g_cm),
        ("epsilon_hz", cfg.epsilon),
        ("kappa_m_hz", cfg.kappa_m),
        ("gamma_hz", cfg.gamma),
        ("gamma_phi_hz", cfg.gamma_phi),
        ("temperature_k", cfg.temperature),
    ];
    for (name, v) in non_negative {
        if !(v.is_finite() && v >= 0.0) {
            let file_units = if name == "temperature_k" { v } else { v / TAU };
            return Err(CliError::config(format!(
                "{name} must be finite and non-negative, got {file_units}"
            )));
        }
    }
    if !cfg.xi.is_finite() {
        return Err(CliError::config("xi_hz must be finite"));
    }
    Ok(())
}

/// Overwrite one device field addressed by a sweep path (file units).
pub fn set_device_field(cfg: &mut DeviceConfig, path: &str, value: f64) -> Result<(), CliError> {
    let angular = TAU * value;
    match path {
        "device.omega_c_hz" => cfg.omega_c = angular,
        "device.omega_q_hz" => cfg.omega_q = angular,
        "device.omega_m_hz" => cfg.omega_m = angular,
        "device.g_cq_hz" => cfg.g_cq = angular,
        "device.g_cm_hz" => cfg.g_cm = angular,
        "device.xi_hz" => cfg.xi = angular,
        "device.kappa_m_hz" => cfg.kappa_m = angular,
        "device.gamma_hz" => cfg.gamma = angular,
        "device.gamma_phi_hz" => cfg.gamma_phi = angular,
        "device.epsilon_hz" => cfg.epsilon = angular,
        "device.omega_p_hz" => cfg.omega_p = angular,
        "device.temperature_k" => cfg.temperature = value,
        other => {
            return Err(CliError::config(format!(
                "unknown sweep parameter '{other}' (expected device.<field>_hz or device.temperature_k)"
            )))
        }
    }
    Ok(())
}

/// Resolve a sequence source against a derived model; presets remember
/// their logical target for reporting.
pub fn resolve_sequence(
    src: &SequenceSource,
    model: &EffectiveModel,
) -> Result<(Sequence, Option<LogicalTarget>), CliError> {
    match src {
        SequenceSource::Preset(name) => {
            let target: LogicalTarget = name.parse()?;
            Ok((preset_sequence(target, model), Some(target)))
        }
        SequenceSource::Steps(steps) => Ok((Sequence::new(steps.clone())?, None)),
    }
}

/// Hz-facing report of a derived effective model, with protocol timing and
/// the drive phase-condition residuals appended.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelReport {
    pub r: f64,
    pub mu: f64,
    pub nu: f64,
    pub omega_m_prime_hz: f64,
    pub omega_q_prime_hz: f64,
    pub omega_m_dprime_hz: f64,
    pub g_cm_prime_hz: f64,
    pub zeta_hz: f64,
    pub chi_hz: f64,
    pub fn_coeffs: FnCoeffs,
    pub kappa_m_prime_hz: f64,
    pub kappa_m_dprime_hz: f64,
    pub gamma_prime_hz: f64,
    pub gamma_dprime_hz: f64,
    pub nbar_m: f64,
    pub nbar_q: f64,
    pub nbar_c: f64,
    pub validity: ValidityReport,
    /// Half-lattice CD round duration √(2π)eʳ/χ.
    pub t1_s: f64,
    /// Distance of ω_p·t₁ from the nearest multiple of 4π (radians).
    pub drive_phase_residual: f64,
    /// Distance of ε·t₁ from the nearest multiple of 2π (radians).
    pub rabi_phase_residual: f64,
}

impl ModelReport {
    pub fn new(cfg: &DeviceConfig, model: &EffectiveModel) -> Self {
        let t1 = half_lattice_time(model.chi, model.r);
        let (drive, rabi) = phase_residuals(cfg.omega_p, cfg.epsilon, t1);
        let hz = |w: f64| w / TAU;
        ModelReport {
            r: model.r,
            mu: model.mu,
            nu: model.nu,
            omega_m_prime_hz: hz(model.omega_m_prime),
            omega_q_prime_hz: hz(model.omega_q_prime),
            omega_m_dprime_hz: hz(model.omega_m_dprime),
            g_cm_prime_hz: hz(model.g_cm_prime),
            zeta_hz: hz(model.zeta),
            chi_hz: hz(model.chi),
            fn_coeffs: model.fn_coeffs,
            kappa_m_prime_hz: hz(model.kappa_m_prime),
            kappa_m_dprime_hz: hz(model.kappa_m_dprime),
            gamma_prime_hz: hz(model.gamma_prime),
            gamma_dprime_hz: hz(model.gamma_dprime),
            nbar_m: model.nbar_m,
            nbar_q: model.nbar_q,
            nbar_c: model.nbar_c,
            validity: model.validity,
            t1_s: t1,
            drive_phase_residual: drive,
            rabi_phase_residual: rabi,
        }
    }
}
