//! Measurement-based preparation sequences for magnonic GKP states.
//!
//! A sequence interleaves conditional-displacement (CD) evolution of the
//! magnon–qubit register with projective qubit measurements, magnon
//! displacements, and qubit rotations. Two CD + projection rounds of duration
//! `t₁ = √(2π)·eʳ/χ` grow a three-peak grid state in the Bogoliubov frame;
//! appending displacements and a half-round realizes the other logical Pauli
//! eigenstates. `to_lab_frame` undoes the Bogoliubov transformation with the
//! squeezing operator `S(r)`, after which imaginary (momentum-like)
//! displacement amplitudes shrink by `e⁻ʳ` onto the square GKP lattice
//! `l = √(2π)`.
//!
//! All dynamics here run in the frame where the CD Hamiltonian is valid;
//! residual drive phases are assumed tuned away (the parameter layer reports
//! the actual residuals).

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_pure_cd, integrate, IntegratorSettings, LindbladModel};
use crate::hilbert::{
    displacement, sigma_x, sigma_y, sigma_z, squeezing, tensor, DensityState, FockSpace,
    HybridState, Operator, QubitOutcome,
};
use crate::params::{half_lattice_time, EffectiveModel};
use crate::{Error, Result};

/// Square-lattice GKP constant `l = √(2π)`: stabilizers translate by `±il`
/// and `−l`, logical Paulis by half of that.
pub fn lattice_constant() -> f64 {
    (2.0 * PI).sqrt()
}

/// Qubit rotation angle in the phase-gate template. The sign is calibrated
/// jointly with [`CENTERING_FRACTION`] (see `examples/calibrate_presets.rs`):
/// `R_x(+π/2)` maps the post-CD grid onto the +1 eigenstate of `Y_L`, making
/// the `φ₊` preset coincide with its analytic codeword.
pub const PHASE_GATE_ROTATION: f64 = FRAC_PI_2;

/// Comb-centering displacement applied after the half-round CD in the `+`,
/// `−`, and `φ±` presets, as a fraction of the in-frame lattice step
/// `√(2π)·eʳ`. A purely imaginary displacement cannot move the Bloch vector,
/// but it decides where the comb sits relative to the code lattice; −1/4 is
/// the unique choice (mod 1/2) that lands the half-round comb exactly on the
/// codeword-family grid, verified in `examples/calibrate_presets.rs`.
pub const CENTERING_FRACTION: f64 = -0.25;

/// Rotation axes for single-qubit gates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationAxis {
    X,
    Y,
    Z,
}

/// A single step of a preparation sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProtocolStep {
    /// Magnon–qubit coevolution under the CD Hamiltonian for `duration`
    /// seconds, displacing along the phase-space axis rotated by
    /// `axis_phase` from the default.
    Cd {
        duration: f64,
        #[serde(default)]
        axis_phase: f64,
    },
    /// Projective qubit measurement post-selected on `outcome`.
    ProjectQubit { outcome: QubitOutcome },
    /// Unconditional magnon displacement `D(alpha)` (in-frame amplitude).
    Displace { alpha: C64 },
    /// Single-qubit rotation `exp(−i·angle·σ_axis/2)`.
    QubitRotate { axis: RotationAxis, angle: f64 },
    /// Free evolution for `duration` seconds (identity when noiseless,
    /// dissipators only when noisy).
    Idle { duration: f64 },
}

impl ProtocolStep {
    fn duration(&self) -> f64 {
        match self {
            ProtocolStep::Cd { duration, .. } | ProtocolStep::Idle { duration } => *duration,
            _ => 0.0,
        }
    }
}

/// An ordered list of protocol steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    pub steps: Vec<ProtocolStep>,
}

impl Sequence {
    /// Validate step parameters (finite, non-negative durations).
    pub fn new(steps: Vec<ProtocolStep>) -> Result<Self> {
        for (i, step) in steps.iter().enumerate() {
            let d = step.duration();
            if !d.is_finite() || d < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "step {i} has invalid duration {d}"
                )));
            }
            if let ProtocolStep::Displace { alpha } = step {
                if !alpha.re.is_finite() || !alpha.im.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "step {i} has non-finite displacement"
                    )));
                }
            }
        }
        Ok(Sequence { steps })
    }

    /// Total evolution time (CD and idle steps; gates are instantaneous).
    pub fn total_duration(&self) -> f64 {
        self.steps.iter().map(ProtocolStep::duration).sum()
    }
}

/// Register state threaded through a sequence: a pure state for noiseless
/// runs, a density matrix for dissipative ones.
#[derive(Clone, Debug)]
pub enum ProtocolState {
    Pure(HybridState),
    Mixed(DensityState),
}

impl ProtocolState {
    pub fn space_dims(&self) -> &[usize] {
        match self {
            ProtocolState::Pure(s) => &s.space_dims,
            ProtocolState::Mixed(s) => &s.space_dims,
        }
    }

    /// Population proxy for truncation error (top of the magnon ladder).
    pub fn truncation_leakage(&self) -> f64 {
        match self {
            ProtocolState::Pure(s) => s.truncation_leakage(),
            ProtocolState::Mixed(s) => s.truncation_leakage(),
        }
    }

    /// The magnon factor alone: drops a collapsed qubit (pure) or traces it
    /// out (mixed).
    pub fn magnon_only(&self, collapsed: QubitOutcome) -> Result<ProtocolState> {
        match self {
            ProtocolState::Pure(s) => Ok(ProtocolState::Pure(s.drop_qubit(collapsed)?)),
            ProtocolState::Mixed(s) => Ok(ProtocolState::Mixed(s.partial_trace_qubit()?)),
        }
    }

    /// Fresh register `|0⟩_m ⊗ |g⟩` for a sequence run.
    pub fn ground_register(space: FockSpace, noisy: bool) -> Self {
        let psi = HybridState::vacuum(space).tensor(&HybridState::qubit_g());
        if noisy {
            ProtocolState::Mixed(psi.to_density())
        } else {
            ProtocolState::Pure(psi)
        }
    }
}

/// How to evolve CD and idle steps.
pub enum Evolution<'a> {
    /// Closed-form pure-state evolution with CD rate `chi`.
    Pure { chi: f64 },
    /// Master-equation evolution with the model's dissipators.
    Dissipative {
        model: &'a EffectiveModel,
        settings: IntegratorSettings,
    },
}

/// Result of executing a sequence.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub state: ProtocolState,
    /// Born probability of each `ProjectQubit` step, in order.
    pub probabilities: Vec<f64>,
    /// Product of the per-projection probabilities.
    pub cumulative_probability: f64,
    /// Worst truncation-leakage proxy seen at any step boundary.
    pub max_leakage: f64,
    /// Worst trace drift reported by the integrator (0 for pure runs).
    pub worst_trace_drift: f64,
}

/// Single-qubit rotation `R_axis(θ) = exp(−iθσ/2) = cos(θ/2)·1 −
/// i·sin(θ/2)·σ_axis`.
pub fn qubit_rotation(axis: RotationAxis, angle: f64) -> Operator {
    let sigma = match axis {
        RotationAxis::X => sigma_x(),
        RotationAxis::Y => sigma_y(),
        RotationAxis::Z => sigma_z(),
    };
    let cos = C64::new((angle / 2.0).cos(), 0.0);
    let msin = C64::new(0.0, -(angle / 2.0).sin());
    Operator::identity(vec![2])
        .scale(cos)
        .add(&sigma.scale(msin))
        .expect("2x2 shapes match")
}

fn mode_space(dims: &[usize]) -> Result<FockSpace> {
    match dims {
        [n, 2] => FockSpace::new(*n),
        other => Err(Error::DimMismatch(format!(
            "sequence execution needs a magnon ⊗ qubit register, got {other:?}"
        ))),
    }
}

/// Execute `seq` on `initial`. Pure inputs require `Evolution::Pure`, mixed
/// inputs `Evolution::Dissipative`; projections renormalize the state and
/// record their Born probability.
pub fn run_sequence(seq: &Sequence, initial: ProtocolState, how: &Evolution) -> Result<RunOutcome> {
    let space = mode_space(initial.space_dims())?;
    let mut probabilities = Vec::new();
    let mut max_leakage = initial.truncation_leakage();
    let mut worst_trace_drift = 0.0_f64;

    let mut state = match (initial, how) {
        (ProtocolState::Pure(psi), Evolution::Pure { .. }) => ProtocolState::Pure(psi),
        (ProtocolState::Mixed(rho), Evolution::Dissipative { .. }) => ProtocolState::Mixed(rho),
        (ProtocolState::Pure(_), Evolution::Dissipative { .. }) => {
            return Err(Error::InvalidArgument(
                "dissipative evolution needs a density-matrix state".into(),
            ))
        }
        (ProtocolState::Mixed(_), Evolution::Pure { .. }) => {
            return Err(Error::InvalidArgument(
                "pure evolution needs a pure state".into(),
            ))
        }
    };

    for step in &seq.steps {
        state = match (&state, step) {
            (
                ProtocolState::Pure(psi),
                ProtocolStep::Cd {
                    duration,
                    axis_phase,
                },
            ) => {
                let chi = match how {
                    Evolution::Pure { chi } => *chi,
                    _ => unreachable!("state/evolution pairing checked above"),
                };
                ProtocolState::Pure(evolve_pure_cd(psi, chi, *duration, *axis_phase)?)
            }
            (ProtocolState::Pure(psi), ProtocolStep::Idle { .. }) => {
                ProtocolState::Pure(psi.clone())
            }
            (ProtocolState::Pure(psi), ProtocolStep::ProjectQubit { outcome }) => {
                let (next, p) = psi.project_qubit(*outcome)?;
                probabilities.push(p.min(1.0));
                ProtocolState::Pure(next)
            }
            (ProtocolState::Pure(psi), ProtocolStep::Displace { alpha }) => {
                let op = tensor(&displacement(space, *alpha), &Operator::identity(vec![2]));
                ProtocolState::Pure(psi.apply(&op)?)
            }
            (ProtocolState::Pure(psi), ProtocolStep::QubitRotate { axis, angle }) => {
                let op = tensor(
                    &Operator::identity(vec![space.dim]),
                    &qubit_rotation(*axis, *angle),
                );
                ProtocolState::Pure(psi.apply(&op)?)
            }
            (
                ProtocolState::Mixed(rho),
                ProtocolStep::Cd {
                    duration,
                    axis_phase,
                },
            ) => {
                let (model, settings) = match how {
                    Evolution::Dissipative { model, settings } => (model, settings),
                    _ => unreachable!("state/evolution pairing checked above"),
                };
                let lindblad = LindbladModel::magnon_qubit(space, model, *axis_phase);
                let run = integrate(&lindblad, rho, *duration, settings)?;
                worst_trace_drift = run
                    .samples
                    .iter()
                    .map(|s| s.trace_drift)
                    .fold(worst_trace_drift, f64::max);
                ProtocolState::Mixed(run.state)
            }
            (ProtocolState::Mixed(rho), ProtocolStep::Idle { duration }) => {
                let (model, settings) = match how {
                    Evolution::Dissipative { model, settings } => (model, settings),
                    _ => unreachable!("state/evolution pairing checked above"),
                };
                let h0 = Operator::identity(vec![space.dim, 2]).scale(C64::new(0.0, 0.0));
                let lindblad = LindbladModel::new(
                    h0,
                    crate::dynamics::magnon_qubit_dissipators(space, model),
                )?;
                let run = integrate(&lindblad, rho, *duration, settings)?;
                worst_trace_drift = run
                    .samples
                    .iter()
                    .map(|s| s.trace_drift)
                    .fold(worst_trace_drift, f64::max);
                ProtocolState::Mixed(run.state)
            }
            (ProtocolState::Mixed(rho), ProtocolStep::ProjectQubit { outcome }) => {
                let (next, p) = rho.project_qubit(*outcome)?;
                probabilities.push(p.min(1.0));
                ProtocolState::Mixed(next)
            }
            (ProtocolState::Mixed(rho), ProtocolStep::Displace { alpha }) => {
                let op = tensor(&displacement(space, *alpha), &Operator::identity(vec![2]));
                ProtocolState::Mixed(rho.conjugate(&op)?)
            }
            (ProtocolState::Mixed(rho), ProtocolStep::QubitRotate { axis, angle }) => {
                let op = tensor(
                    &Operator::identity(vec![space.dim]),
                    &qubit_rotation(*axis, *angle),
                );
                ProtocolState::Mixed(rho.conjugate(&op)?)
            }
        };
        max_leakage = max_leakage.max(state.truncation_leakage());
    }

    let cumulative_probability = probabilities.iter().product();
    Ok(RunOutcome {
        state,
        probabilities,
        cumulative_probability,
        max_leakage,
        worst_trace_drift,
    })
}

// ---------------------------------------------------------------------------
// frame recovery
// ---------------------------------------------------------------------------

/// Map a Bogoliubov-frame magnon state to the laboratory frame by applying
/// `S(r)`. Under this map an in-frame displacement `D(ib)` becomes the lab
/// displacement `D(ib·e⁻ʳ)` (and a real amplitude grows by `eʳ`), which is
/// what puts the grid on the GKP lattice. Callers should inspect
/// `truncation_leakage()` of the result: squeezing pushes population up the
/// ladder.
pub fn to_lab_frame(state: &HybridState, r: f64) -> Result<HybridState> {
    match *state.space_dims {
        [n] => state.apply(&squeezing(FockSpace::new(n)?, r)),
        ref other => Err(Error::DimMismatch(format!(
            "lab-frame recovery expects a magnon-only state, got {other:?}"
        ))),
    }
}

/// Density-matrix version of [`to_lab_frame`].
pub fn to_lab_frame_density(rho: &DensityState, r: f64) -> Result<DensityState> {
    match *rho.space_dims {
        [n] => rho.conjugate(&squeezing(FockSpace::new(n)?, r)),
        ref other => Err(Error::DimMismatch(format!(
            "lab-frame recovery expects a magnon-only state, got {other:?}"
        ))),
    }
}

// ---------------------------------------------------------------------------
// analytic codewords
// ---------------------------------------------------------------------------

/// One grid component: `weight · D(displacement)` acting on the squeezed
/// vacuum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodewordComponent {
    pub weight: C64,
    pub displacement: C64,
}

/// Analytic finite-energy codeword `Σ_k c_k D(α_k) S(r)|0⟩`, normalized
/// numerically on construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodewordSpec {
    pub components: Vec<CodewordComponent>,
    pub squeeze_r: f64,
}

impl CodewordSpec {
    pub fn new(components: Vec<CodewordComponent>, squeeze_r: f64) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument(
                "codeword needs at least one component".into(),
            ));
        }
        Ok(CodewordSpec {
            components,
            squeeze_r,
        })
    }

    /// Three-peak grid `[D(2iα) + 2 + D(−2iα)]` on `S(r)|0⟩`: the output of
    /// two CD + projection rounds with per-round kick `±iα`.
    pub fn three_component(alpha: f64, squeeze_r: f64) -> Self {
        let peak = C64::new(0.0, 2.0 * alpha);
        CodewordSpec {
            components: vec![
                CodewordComponent {
                    weight: C64::new(1.0, 0.0),
                    displacement: peak,
                },
                CodewordComponent {
                    weight: C64::new(2.0, 0.0),
                    displacement: C64::new(0.0, 0.0),
                },
                CodewordComponent {
                    weight: C64::new(1.0, 0.0),
                    displacement: -peak,
                },
            ],
            squeeze_r,
        }
    }

    /// Four-peak grid `[D(3iα) + D(iα) + D(−iα) + D(−3iα)]` on `S(r)|0⟩`:
    /// the output of rounds with durations `t₁` then `2t₁`.
    pub fn four_component(alpha: f64, squeeze_r: f64) -> Self {
        let components = [3.0, 1.0, -1.0, -3.0]
            .iter()
            .map(|&k| CodewordComponent {
                weight: C64::new(1.0, 0.0),
                displacement: C64::new(0.0, k * alpha),
            })
            .collect();
        CodewordSpec {
            components,
            squeeze_r,
        }
    }

    /// Lab-frame analytic grid for a logical Pauli eigenstate, built from the
    /// three-peak `|0⟩_L` family: `|1⟩_L = D(−il/2)|0⟩_L` and superpositions
    /// `(|0⟩_L + w|1⟩_L)` with `w ∈ {±1, ±i}`.
    pub fn logical(target: LogicalTarget, squeeze_r: f64) -> Self {
        let l = lattice_constant();
        let zero = [
            (1.0, C64::new(0.0, l)),
            (2.0, C64::new(0.0, 0.0)),
            (1.0, C64::new(0.0, -l)),
        ];
        // D(−il/2) shifts every zero-grid peak; amplitudes on one axis
        // compose with no Weyl phase.
        let one = [
            (1.0, C64::new(0.0, l / 2.0)),
            (2.0, C64::new(0.0, -l / 2.0)),
            (1.0, C64::new(0.0, -1.5 * l)),
        ];
        let weight = |w: f64, ph: C64| {
            move |&(c, d): &(f64, C64)| CodewordComponent {
                weight: ph * C64::new(c * w, 0.0),
                displacement: d,
            }
        };
        let compose = |w: C64| -> Vec<CodewordComponent> {
            zero.iter()
                .map(weight(1.0, C64::new(1.0, 0.0)))
                .chain(one.iter().map(weight(1.0, w)))
                .collect()
        };
        let components = match target {
            LogicalTarget::Zero => zero.iter().map(weight(1.0, C64::new(1.0, 0.0))).collect(),
            LogicalTarget::One => one.iter().map(weight(1.0, C64::new(1.0, 0.0))).collect(),
            LogicalTarget::Plus => compose(C64::new(1.0, 0.0)),
            LogicalTarget::Minus => compose(C64::new(-1.0, 0.0)),
            LogicalTarget::PhiPlus => compose(C64::new(0.0, 1.0)),
            LogicalTarget::PhiMinus => compose(C64::new(0.0, -1.0)),
        };
        CodewordSpec {
            components,
            squeeze_r,
        }
    }
}

/// Construct the normalized codeword state `N · Σ_k c_k D(α_k) S(r)|0⟩` on
/// `space`.
pub fn build_codeword(spec: &CodewordSpec, space: FockSpace) -> Result<HybridState> {
    if spec.components.is_empty() {
        return Err(Error::InvalidArgument(
            "codeword needs at least one component".into(),
        ));
    }
    let base = HybridState::vacuum(space).apply(&squeezing(space, spec.squeeze_r))?;
    let mut acc = HybridState::new(vec![space.dim], ndarray::Array1::zeros(space.dim))?;
    for comp in &spec.components {
        let displaced = base.apply(&displacement(space, comp.displacement))?;
        for (dst, src) in acc.amplitudes.iter_mut().zip(displaced.amplitudes.iter()) {
            *dst += comp.weight * src;
        }
    }
    acc.normalize()
}

// ---------------------------------------------------------------------------
// logical presets
// ---------------------------------------------------------------------------

/// The six logical Pauli eigenstates: `Z_L` (`0`/`1`), `X_L` (`+`/`−`), and
/// `Y_L` (`φ₊`/`φ₋`) eigenstates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogicalTarget {
    Zero,
    One,
    Plus,
    Minus,
    PhiPlus,
    PhiMinus,
}

impl LogicalTarget {
    pub const ALL: [LogicalTarget; 6] = [
        LogicalTarget::Zero,
        LogicalTarget::One,
        LogicalTarget::Plus,
        LogicalTarget::Minus,
        LogicalTarget::PhiPlus,
        LogicalTarget::PhiMinus,
    ];

    /// (⟨Z⟩, ⟨X⟩, ⟨Y⟩) of the ideal logical state.
    pub fn bloch(&self) -> (f64, f64, f64) {
        match self {
            LogicalTarget::Zero => (1.0, 0.0, 0.0),
            LogicalTarget::One => (-1.0, 0.0, 0.0),
            LogicalTarget::Plus => (0.0, 1.0, 0.0),
            LogicalTarget::Minus => (0.0, -1.0, 0.0),
            LogicalTarget::PhiPlus => (0.0, 0.0, 1.0),
            LogicalTarget::PhiMinus => (0.0, 0.0, -1.0),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            LogicalTarget::Zero => "0",
            LogicalTarget::One => "1",
            LogicalTarget::Plus => "+",
            LogicalTarget::Minus => "-",
            LogicalTarget::PhiPlus => "phi+",
            LogicalTarget::PhiMinus => "phi-",
        }
    }
}

impl std::str::FromStr for LogicalTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0" | "zero" => Ok(LogicalTarget::Zero),
            "1" | "one" => Ok(LogicalTarget::One),
            "+" | "plus" => Ok(LogicalTarget::Plus),
            "-" | "minus" => Ok(LogicalTarget::Minus),
            "phi+" | "phi_plus" => Ok(LogicalTarget::PhiPlus),
            "phi-" | "phi_minus" => Ok(LogicalTarget::PhiMinus),
            other => Err(Error::InvalidArgument(format!(
                "unknown logical target '{other}'"
            ))),
        }
    }
}

/// Preparation sequence for a logical Pauli eigenstate.
///
/// `|0⟩_L` is two CD + projection rounds of `t₁ = √(2π)eʳ/χ`; `|1⟩_L`
/// appends the in-frame half-lattice displacement `−i(√(2π)/2)eʳ`. The
/// `X_L`/`Y_L` eigenstates append a half-round CD (the Hadamard-type
/// template), a projection, and a comb-centering displacement, with the `φ±`
/// variants inserting the calibrated qubit rotation before the projection;
/// `−`-type states differ from `+`-type by the real in-frame amplitude
/// `−(√(2π)/2)e⁻ʳ`, the lab-frame `Z_L` translation.
pub fn preset_sequence(target: LogicalTarget, model: &EffectiveModel) -> Sequence {
    let t1 = half_lattice_time(model.chi, model.r);
    let l = lattice_constant();
    let er = model.r.exp();
    let project_g = ProtocolStep::ProjectQubit {
        outcome: QubitOutcome::G,
    };
    let round = |duration: f64| ProtocolStep::Cd {
        duration,
        axis_phase: 0.0,
    };
    // in-frame amplitudes; the lab frame shrinks imaginary ones by e⁻ʳ and
    // grows real ones by eʳ
    let x_half = ProtocolStep::Displace {
        alpha: C64::new(0.0, -0.5 * l * er),
    };
    let centering = ProtocolStep::Displace {
        alpha: C64::new(0.0, CENTERING_FRACTION * l * er),
    };
    let z_half = ProtocolStep::Displace {
        alpha: C64::new(-0.5 * l / er, 0.0),
    };
    let rotate = ProtocolStep::QubitRotate {
        axis: RotationAxis::X,
        angle: PHASE_GATE_ROTATION,
    };

    let mut steps = vec![round(t1), project_g.clone(), round(t1), project_g.clone()];
    match target {
        LogicalTarget::Zero => {}
        LogicalTarget::One => steps.push(x_half),
        LogicalTarget::Plus | LogicalTarget::Minus => {
            steps.extend([round(t1 / 2.0), project_g, centering]);
            if target == LogicalTarget::Minus {
                steps.push(z_half);
            }
        }
        LogicalTarget::PhiPlus | LogicalTarget::PhiMinus => {
            steps.extend([round(t1 / 2.0), rotate, project_g, centering]);
            if target == LogicalTarget::PhiMinus {
                steps.push(z_half);
            }
        }
    }
    Sequence { steps }
}

/// Apply a logical Pauli to a lab-frame magnon state: half-lattice
/// displacements `X_L = D(−il/2)`, `Z_L = D(−l/2)`, `Y_L = D(l/2 − il/2)`.
/// The signs follow the codeword family (`|1⟩_L = D(−il/2)|0⟩_L`); the
/// opposite signs differ by a stabilizer translation and act identically on
/// the code space, and `Y_L` is the phase-free composition of the other two.
pub fn logical_pauli(which: RotationAxis, state: &HybridState) -> Result<HybridState> {
    let space = match *state.space_dims {
        [n] => FockSpace::new(n)?,
        ref other => {
            return Err(Error::DimMismatch(format!(
                "logical Pauli expects a magnon-only state, got {other:?}"
            )))
        }
    };
    let half = lattice_constant() / 2.0;
    let amp = match which {
        RotationAxis::X => C64::new(0.0, -half),
        RotationAxis::Z => C64::new(-half, 0.0),
        RotationAxis::Y => C64::new(half, -half),
    };
    state.apply(&displacement(space, amp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{fidelity, fidelity_rho};
    use crate::params::{derive, DeviceConfig};
    use approx::assert_abs_diff_eq;

    fn space(n: usize) -> FockSpace {
        FockSpace::new(n).unwrap()
    }

    fn reference_model() -> EffectiveModel {
        derive(&DeviceConfig::reference()).unwrap()
    }

    /// In-frame kick amplitude per t₁ round, α_s = √(2π)eʳ/2.
    fn alpha_s(model: &EffectiveModel) -> f64 {
        model.chi * half_lattice_time(model.chi, model.r) / 2.0
    }

    fn run_pure_preset(target: LogicalTarget, model: &EffectiveModel, dim: usize) -> RunOutcome {
        let seq = preset_sequence(target, model);
        run_sequence(
            &seq,
            ProtocolState::ground_register(space(dim), false),
            &Evolution::Pure { chi: model.chi },
        )
        .unwrap()
    }

    fn magnon_state(outcome: &RunOutcome) -> HybridState {
        match outcome.state.magnon_only(QubitOutcome::G).unwrap() {
            ProtocolState::Pure(s) => s,
            ProtocolState::Mixed(_) => panic!("expected pure state"),
        }
    }

    #[test]
    fn rotation_operators() {
        for axis in [RotationAxis::X, RotationAxis::Y, RotationAxis::Z] {
            let r = qubit_rotation(axis, 0.7);
            assert!(r.unitarity_defect() < 1e-12);
        }
        // R_x(π) = −iσ_x
        let r = qubit_rotation(RotationAxis::X, std::f64::consts::PI);
        let target = sigma_x().scale(C64::new(0.0, -1.0));
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(
                    (r.matrix[[i, j]] - target.matrix[[i, j]]).norm(),
                    0.0,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn empty_sequence_is_identity() {
        let init = ProtocolState::ground_register(space(10), false);
        let before = match &init {
            ProtocolState::Pure(s) => s.clone(),
            _ => unreachable!(),
        };
        let out = run_sequence(
            &Sequence { steps: vec![] },
            init,
            &Evolution::Pure { chi: 1.0 },
        )
        .unwrap();
        assert_eq!(out.cumulative_probability, 1.0);
        assert!(out.probabilities.is_empty());
        let after = magnon_state(&out);
        let vac = HybridState::vacuum(space(10));
        assert!(fidelity(&after, &vac).unwrap() > 1.0 - 1e-12);
        let _ = before;
    }

    #[test]
    fn two_rounds_produce_three_component_grid() {
        let model = reference_model();
        let out = run_pure_preset(LogicalTarget::Zero, &model, 140);
        let grid = build_codeword(
            &CodewordSpec::three_component(alpha_s(&model), 0.0),
            space(140),
        )
        .unwrap();
        let f = fidelity(&magnon_state(&out), &grid).unwrap();
        assert!(f > 1.0 - 1e-6, "grid fidelity {f}");
        // success probability: the two projections keep 6/16 of the comb up
        // to exponentially small cross terms
        assert_abs_diff_eq!(out.cumulative_probability, 0.375, epsilon = 1e-6);
        let prod: f64 = out.probabilities.iter().product();
        assert_abs_diff_eq!(out.cumulative_probability, prod, epsilon = 1e-12);
    }

    #[test]
    fn double_duration_round_produces_four_component_grid() {
        let model = reference_model();
        let t1 = half_lattice_time(model.chi, model.r);
        let seq = Sequence::new(vec![
            ProtocolStep::Cd {
                duration: t1,
                axis_phase: 0.0,
            },
            ProtocolStep::ProjectQubit {
                outcome: QubitOutcome::G,
            },
            ProtocolStep::Cd {
                duration: 2.0 * t1,
                axis_phase: 0.0,
            },
            ProtocolStep::ProjectQubit {
                outcome: QubitOutcome::G,
            },
        ])
        .unwrap();
        let out = run_sequence(
            &seq,
            ProtocolState::ground_register(space(200), false),
            &Evolution::Pure { chi: model.chi },
        )
        .unwrap();
        let grid = build_codeword(
            &CodewordSpec::four_component(alpha_s(&model), 0.0),
            space(200),
        )
        .unwrap();
        let f = fidelity(&magnon_state(&out), &grid).unwrap();
        assert!(f > 1.0 - 1e-6, "four-component fidelity {f}");
    }

    #[test]
    fn round_order_exchange_leaves_state_invariant() {
        let model = reference_model();
        let t1 = half_lattice_time(model.chi, model.r);
        let build = |first: f64, second: f64| {
            let seq = Sequence::new(vec![
                ProtocolStep::Cd {
                    duration: first,
                    axis_phase: 0.0,
                },
                ProtocolStep::ProjectQubit {
                    outcome: QubitOutcome::G,
                },
                ProtocolStep::Cd {
                    duration: second,
                    axis_phase: 0.0,
                },
                ProtocolStep::ProjectQubit {
                    outcome: QubitOutcome::G,
                },
            ])
            .unwrap();
            run_sequence(
                &seq,
                ProtocolState::ground_register(space(200), false),
                &Evolution::Pure { chi: model.chi },
            )
            .unwrap()
        };
        let fwd = build(t1, 2.0 * t1);
        let rev = build(2.0 * t1, t1);
        let f = fidelity(&magnon_state(&fwd), &magnon_state(&rev)).unwrap();
        assert!(f > 1.0 - 1e-8, "order-exchange fidelity {f}");
        assert_abs_diff_eq!(
            fwd.cumulative_probability,
            rev.cumulative_probability,
            epsilon = 1e-10
        );
    }

    #[test]
    fn codeword_norm_matches_closed_form() {
        // ‖[D(2iα)+2+D(−2iα)]|0⟩‖² = 6 + 8e^{−2α²} + 2e^{−8α²}
        for &alpha in &[0.5_f64, 1.0, 3.4] {
            let sp = space(200);
            let raw = {
                let vac = HybridState::vacuum(sp);
                let d_plus = vac
                    .apply(&displacement(sp, C64::new(0.0, 2.0 * alpha)))
                    .unwrap();
                let d_minus = vac
                    .apply(&displacement(sp, C64::new(0.0, -2.0 * alpha)))
                    .unwrap();
                let mut v = d_plus.amplitudes.clone();
                for (dst, (mid, minus)) in v
                    .iter_mut()
                    .zip(vac.amplitudes.iter().zip(d_minus.amplitudes.iter()))
                {
                    *dst += C64::new(2.0, 0.0) * mid + minus;
                }
                HybridState::new(vec![sp.dim], v).unwrap()
            };
            let closed =
                6.0 + 8.0 * (-2.0 * alpha * alpha).exp() + 2.0 * (-8.0 * alpha * alpha).exp();
            assert_abs_diff_eq!(raw.norm().powi(2), closed, epsilon = 1e-8);
            // and build_codeword returns exactly the normalized version
            let built = build_codeword(&CodewordSpec::three_component(alpha, 0.0), sp).unwrap();
            assert!(fidelity(&built, &raw.normalize().unwrap()).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn codeword_rejects_empty_and_destructive_specs() {
        assert!(CodewordSpec::new(vec![], 0.0).is_err());
        // D(0) − D(0) interferes away completely
        let spec = CodewordSpec {
            components: vec![
                CodewordComponent {
                    weight: C64::new(1.0, 0.0),
                    displacement: C64::new(0.0, 0.0),
                },
                CodewordComponent {
                    weight: C64::new(-1.0, 0.0),
                    displacement: C64::new(0.0, 0.0),
                },
            ],
            squeeze_r: 0.0,
        };
        assert!(matches!(
            build_codeword(&spec, space(20)),
            Err(Error::ZeroNorm(_))
        ));
    }

    #[test]
    fn single_component_codeword_is_vacuum() {
        let spec = CodewordSpec::new(
            vec![CodewordComponent {
                weight: C64::new(3.0, 0.0),
                displacement: C64::new(0.0, 0.0),
            }],
            0.0,
        )
        .unwrap();
        let built = build_codeword(&spec, space(12)).unwrap();
        assert!(fidelity(&built, &HybridState::vacuum(space(12))).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn one_codeword_is_displaced_zero_codeword() {
        let sp = space(140);
        let r = 1.0;
        let zero = build_codeword(&CodewordSpec::logical(LogicalTarget::Zero, r), sp).unwrap();
        let one = build_codeword(&CodewordSpec::logical(LogicalTarget::One, r), sp).unwrap();
        let displaced = zero
            .apply(&displacement(sp, C64::new(0.0, -lattice_constant() / 2.0)))
            .unwrap();
        assert!(fidelity(&one, &displaced).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn lab_frame_map_properties() {
        let sp = space(200);
        // r = 0 is the identity
        let probe = HybridState::vacuum(sp)
            .apply(&displacement(sp, C64::new(0.4, 0.2)))
            .unwrap();
        let same = to_lab_frame(&probe, 0.0).unwrap();
        assert!(fidelity(&probe, &same).unwrap() > 1.0 - 1e-12);
        // norm preserved
        let r = 1.000_031;
        let mapped = to_lab_frame(&probe, r).unwrap();
        assert_abs_diff_eq!(mapped.norm(), 1.0, epsilon = 1e-9);
        // in-frame D(ib)|0⟩ lands on D(ib·e⁻ʳ)S(r)|0⟩
        let b = 1.1;
        let frame = HybridState::vacuum(sp)
            .apply(&displacement(sp, C64::new(0.0, b)))
            .unwrap();
        let lab = to_lab_frame(&frame, r).unwrap();
        let target = HybridState::vacuum(sp)
            .apply(&squeezing(sp, r))
            .unwrap()
            .apply(&displacement(sp, C64::new(0.0, b * (-r).exp())))
            .unwrap();
        let f = fidelity(&lab, &target).unwrap();
        assert!(f > 1.0 - 1e-8, "frame map fidelity {f}");
        // qubit still attached → error
        let hybrid = HybridState::vacuum(sp).tensor(&HybridState::qubit_g());
        assert!(to_lab_frame(&hybrid, r).is_err());
    }

    #[test]
    fn preset_zero_is_two_plain_rounds() {
        let model = reference_model();
        let t1 = half_lattice_time(model.chi, model.r);
        let seq = preset_sequence(LogicalTarget::Zero, &model);
        assert_eq!(
            seq.steps,
            vec![
                ProtocolStep::Cd {
                    duration: t1,
                    axis_phase: 0.0
                },
                ProtocolStep::ProjectQubit {
                    outcome: QubitOutcome::G
                },
                ProtocolStep::Cd {
                    duration: t1,
                    axis_phase: 0.0
                },
                ProtocolStep::ProjectQubit {
                    outcome: QubitOutcome::G
                },
            ]
        );
    }

    #[test]
    fn phase_gate_presets_rotate_the_qubit() {
        let model = reference_model();
        let has_rotation = |t: LogicalTarget| {
            preset_sequence(t, &model)
                .steps
                .iter()
                .any(|s| matches!(s, ProtocolStep::QubitRotate { .. }))
        };
        assert!(!has_rotation(LogicalTarget::Plus));
        assert!(!has_rotation(LogicalTarget::Minus));
        assert!(has_rotation(LogicalTarget::PhiPlus));
        assert!(has_rotation(LogicalTarget::PhiMinus));
    }

    #[test]
    fn presets_hit_their_bloch_axes() {
        // noiseless logical Bloch components of each preset, against values
        // pinned by an independent dense-matrix implementation at dim 140
        let model = reference_model();
        let l = lattice_constant();
        let sp = space(140);
        let x_op = displacement(sp, C64::new(0.0, l / 2.0));
        let z_op = displacement(sp, C64::new(-l / 2.0, 0.0));
        let y_op = displacement(sp, C64::new(l / 2.0, -l / 2.0));
        let expect = |target: LogicalTarget| -> (f64, f64, f64) {
            let out = run_pure_preset(target, &model, 140);
            let lab = to_lab_frame(&magnon_state(&out), model.r).unwrap();
            (
                lab.expectation(&z_op).unwrap().re,
                lab.expectation(&x_op).unwrap().re,
                lab.expectation(&y_op).unwrap().re,
            )
        };
        let (z, x, y) = expect(LogicalTarget::Zero);
        assert_abs_diff_eq!(z, 0.8992, epsilon = 2e-3);
        assert_abs_diff_eq!(x, 0.0, epsilon = 2e-2);
        assert_abs_diff_eq!(y, 0.0, epsilon = 2e-2);
        let (z, _, _) = expect(LogicalTarget::One);
        assert_abs_diff_eq!(z, -0.8992, epsilon = 2e-3);
        let (z, x, _) = expect(LogicalTarget::Plus);
        assert_abs_diff_eq!(x, 0.8339, epsilon = 2e-3);
        assert_abs_diff_eq!(z, 0.0, epsilon = 2e-2);
        let (_, x, _) = expect(LogicalTarget::Minus);
        assert_abs_diff_eq!(x, -0.8339, epsilon = 2e-3);
        let (_, _, y) = expect(LogicalTarget::PhiPlus);
        assert_abs_diff_eq!(y, 0.7494, epsilon = 2e-3);
        let (_, _, y) = expect(LogicalTarget::PhiMinus);
        assert_abs_diff_eq!(y, -0.7494, epsilon = 2e-3);
    }

    #[test]
    fn preset_success_probabilities() {
        let model = reference_model();
        let cum = |t: LogicalTarget| run_pure_preset(t, &model, 140).cumulative_probability;
        assert_abs_diff_eq!(cum(LogicalTarget::Zero), 0.375, epsilon = 1e-3);
        assert_abs_diff_eq!(cum(LogicalTarget::Plus), 0.1884, epsilon = 1e-3);
        assert_abs_diff_eq!(cum(LogicalTarget::PhiPlus), 0.1875, epsilon = 1e-3);
    }

    #[test]
    fn plus_and_phi_presets_match_their_analytic_grids() {
        // the centering fraction and rotation sign are calibrated so the
        // half-round templates land exactly on the codeword-family states
        let model = reference_model();
        let sp = space(160);
        for target in [LogicalTarget::Plus, LogicalTarget::PhiPlus] {
            let out = run_pure_preset(target, &model, 160);
            let lab = to_lab_frame(&magnon_state(&out), model.r).unwrap();
            let grid = build_codeword(&CodewordSpec::logical(target, model.r), sp).unwrap();
            let f = fidelity(&lab, &grid).unwrap();
            assert!(
                f > 1.0 - 1e-5,
                "{target:?} preset vs analytic grid: overlap {f}"
            );
        }
    }

    #[test]
    fn logical_pauli_maps_zero_to_one() {
        let sp = space(140);
        let r = 1.0;
        let zero = build_codeword(&CodewordSpec::logical(LogicalTarget::Zero, r), sp).unwrap();
        let one = build_codeword(&CodewordSpec::logical(LogicalTarget::One, r), sp).unwrap();
        let x_zero = logical_pauli(RotationAxis::X, &zero).unwrap();
        let f = fidelity(&x_zero, &one).unwrap();
        assert!(f > 0.999, "X_L|0⟩_L vs |1⟩_L overlap {f}");
    }

    #[test]
    fn dissipative_run_with_zero_rates_matches_pure_run() {
        let mut model = reference_model();
        model.kappa_m_prime = 0.0;
        model.kappa_m_dprime = 0.0;
        model.gamma_prime = 0.0;
        model.gamma_dprime = 0.0;
        let t1 = half_lattice_time(model.chi, model.r);
        // short single round at small dim keeps the test fast
        let seq = Sequence::new(vec![
            ProtocolStep::Cd {
                duration: t1 / 8.0,
                axis_phase: 0.0,
            },
            ProtocolStep::ProjectQubit {
                outcome: QubitOutcome::G,
            },
            ProtocolStep::Displace {
                alpha: C64::new(0.0, 0.3),
            },
            ProtocolStep::QubitRotate {
                axis: RotationAxis::X,
                angle: 0.4,
            },
        ])
        .unwrap();
        let pure = run_sequence(
            &seq,
            ProtocolState::ground_register(space(24), false),
            &Evolution::Pure { chi: model.chi },
        )
        .unwrap();
        let settings = IntegratorSettings::with_max_dt(t1 / 2000.0);
        let noisy = run_sequence(
            &seq,
            ProtocolState::ground_register(space(24), true),
            &Evolution::Dissipative {
                model: &model,
                settings,
            },
        )
        .unwrap();
        let psi = match &pure.state {
            ProtocolState::Pure(s) => s.clone(),
            _ => unreachable!(),
        };
        let rho = match &noisy.state {
            ProtocolState::Mixed(s) => s.clone(),
            _ => unreachable!(),
        };
        let f = fidelity_rho(&rho, &psi).unwrap();
        assert!(f > 1.0 - 1e-6, "closed-loop sequence fidelity {f}");
        assert_abs_diff_eq!(
            pure.cumulative_probability,
            noisy.cumulative_probability,
            epsilon = 1e-6
        );
        assert!(noisy.worst_trace_drift < 1e-7);
    }

    #[test]
    fn evolution_state_pairing_is_enforced() {
        let model = reference_model();
        let settings = IntegratorSettings::with_max_dt(1e-9);
        let pure_state = ProtocolState::ground_register(space(8), false);
        let mixed_state = ProtocolState::ground_register(space(8), true);
        let seq = Sequence { steps: vec![] };
        assert!(run_sequence(
            &seq,
            pure_state,
            &Evolution::Dissipative {
                model: &model,
                settings,
            }
        )
        .is_err());
        assert!(run_sequence(&seq, mixed_state, &Evolution::Pure { chi: 1.0 }).is_err());
    }

    #[test]
    fn steps_serialize_round_trip() {
        let model = reference_model();
        let seq = preset_sequence(LogicalTarget::PhiMinus, &model);
        let json = serde_json::to_string(&seq).unwrap();
        let back: Sequence = serde_json::from_str(&json).unwrap();
        assert_eq!(seq, back);
        // axis_phase defaults to 0 when omitted
        let raw = r#"{"steps": [{"kind": "cd", "duration": 1e-7}]}"#;
        let parsed: Sequence = serde_json::from_str(raw).unwrap();
        assert_eq!(
            parsed.steps[0],
            ProtocolStep::Cd {
                duration: 1e-7,
                axis_phase: 0.0
            }
        );
    }

    #[test]
    fn sequence_validation_rejects_bad_steps() {
        assert!(Sequence::new(vec![ProtocolStep::Cd {
            duration: -1.0,
            axis_phase: 0.0
        }])
        .is_err());
        assert!(Sequence::new(vec![ProtocolStep::Idle { duration: f64::NAN }]).is_err());
        assert!(Sequence::new(vec![ProtocolStep::Displace {
            alpha: C64::new(f64::INFINITY, 0.0)
        }])
        .is_err());
    }
}
