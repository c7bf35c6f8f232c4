//! Time evolution engines.
//!
//! Three layers, by cost:
//! - closed-form conditional-displacement (CD) evolution on pure states;
//! - a fixed-step RK4 Lindblad integrator for the effective magnon-qubit
//!   master equation, with trace/Hermiticity/positivity drift monitoring;
//! - builders for the larger cavity⊗magnon⊗qubit Hamiltonians used only to
//!   cross-validate the cavity elimination at small dimensions.
//!
//! Dissipator convention: each `(rate, o)` pair contributes
//! (rate/2)·D\[o\]ρ with D\[o\]ρ = 2oρo† − {o†o, ρ}, so `rate` is the
//! standard Lindblad rate of the jump operator `o`.

use crate::hilbert::{
    annihilation, creation, expm_anti_hermitian, number, sigma_minus, sigma_plus, sigma_x, sigma_y,
    sigma_z, tensor, DensityState, FockSpace, HybridState, Operator,
};
use crate::params::{DeviceConfig, EffectiveModel};
use crate::{Error, Result};
use ndarray::{Array1, Array2, Zip};
use num_complex::Complex64 as C64;

/// Hard cap on the total dimension of cross-validation Hamiltonians; a dense
/// matrix at this size is 16·4096² bytes = 256 MB.
pub const FULL_MODEL_DIM_CAP: usize = 4096;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Effective magnon-qubit Lindblad model: a Hamiltonian plus weighted jump
/// operators, all on the same composite space.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    pub hamiltonian: Operator,
    /// (rate in rad/s, jump operator) pairs; each enters as (rate/2)·D\[jump\].
    pub dissipators: Vec<(f64, Operator)>,
}

impl LindbladModel {
    pub fn new(hamiltonian: Operator, dissipators: Vec<(f64, Operator)>) -> Result<Self> {
        for (rate, op) in &dissipators {
            if *rate < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "negative dissipator rate {rate}"
                )));
            }
            if op.space_dims != hamiltonian.space_dims {
                return Err(Error::DimMismatch(
                    "dissipator space does not match Hamiltonian".into(),
                ));
            }
        }
        Ok(LindbladModel {
            hamiltonian,
            dissipators,
        })
    }

    /// Closed system: Hamiltonian only.
    pub fn closed(hamiltonian: Operator) -> Self {
        LindbladModel {
            hamiltonian,
            dissipators: Vec::new(),
        }
    }

    /// The effective magnon-qubit master equation during a CD segment:
    /// H = −(χ/2)(m e^{−iθ} + m† e^{iθ})σ_x with magnon loss/gain seen
    /// through the Bogoliubov frame and x-basis qubit dissipators,
    ///   (κ′_m/2)D\[m\] + (κ″_m/2)D\[m†\] + (γ′/2)D\[σ_x\] + (γ″/4)(D\[σ_y\]+D\[σ_z\]).
    pub fn magnon_qubit(space: FockSpace, model: &EffectiveModel, axis_phase: f64) -> Self {
        let h = cd_hamiltonian(space, model.chi, axis_phase);
        let dissipators = magnon_qubit_dissipators(space, model);
        LindbladModel {
            hamiltonian: h,
            dissipators,
        }
    }
}

/// The five dissipator channels of the effective master equation, as
/// (rate, jump) pairs on the fock⊗qubit space.
pub fn magnon_qubit_dissipators(space: FockSpace, model: &EffectiveModel) -> Vec<(f64, Operator)> {
    let iq = Operator::identity(vec![2]);
    let im = Operator::identity(vec![space.dim]);
    let m = annihilation(space);
    vec![
        (model.kappa_m_prime, tensor(&m, &iq)),
        (model.kappa_m_dprime, tensor(&m.dagger(), &iq)),
        (model.gamma_prime, tensor(&im, &sigma_x())),
        (model.gamma_dprime / 2.0, tensor(&im, &sigma_y())),
        (model.gamma_dprime / 2.0, tensor(&im, &sigma_z())),
    ]
}

/// CD Hamiltonian H = −(χ/2)(m e^{−iθ} + m† e^{iθ}) σ_x on fock⊗qubit.
/// θ = 0 displaces along the phase (p) axis.
pub fn cd_hamiltonian(space: FockSpace, chi: f64, axis_phase: f64) -> Operator {
    let m = annihilation(space);
    let phase = C64::from_polar(1.0, axis_phase);
    let osc = m
        .scale(phase.conj())
        .add(&m.dagger().scale(phase))
        .unwrap()
        .scale(C64::new(-chi / 2.0, 0.0));
    tensor(&osc, &sigma_x())
}

/// Closed-form CD evolution: in the σ_x eigenbasis the joint propagator is
/// U(t) = |+⟩⟨+| D(iαe^{iθ}) + |−⟩⟨−| D(−iαe^{iθ}) with α = χt/2.
pub fn evolve_pure_cd(
    state: &HybridState,
    chi: f64,
    duration: f64,
    axis_phase: f64,
) -> Result<HybridState> {
    state.check_qubit_last()?;
    if state.space_dims.len() != 2 {
        return Err(Error::UnsupportedShape(format!(
            "CD evolution expects fock⊗qubit, got dims {:?}",
            state.space_dims
        )));
    }
    let nf = state.space_dims[0];
    let space = FockSpace::new(nf)?;
    let alpha = C64::new(0.0, chi * duration / 2.0) * C64::from_polar(1.0, axis_phase);
    let dplus = displacement_matrix(space, alpha);
    let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();

    // split into sigma_x sectors
    let mut vp = Array1::<C64>::zeros(nf);
    let mut vm = Array1::<C64>::zeros(nf);
    for f in 0..nf {
        let g = state.amplitudes[2 * f];
        let e = state.amplitudes[2 * f + 1];
        vp[f] = (g + e) * inv_sqrt2;
        vm[f] = (g - e) * inv_sqrt2;
    }
    let vp2 = dplus.dot(&vp);
    let vm2 = dplus.t().mapv(|c| c.conj()).dot(&vm); // D(−α) = D(α)†
    let mut amps = Array1::<C64>::zeros(2 * nf);
    for f in 0..nf {
        amps[2 * f] = (vp2[f] + vm2[f]) * inv_sqrt2;
        amps[2 * f + 1] = (vp2[f] - vm2[f]) * inv_sqrt2;
    }
    HybridState::new(state.space_dims.clone(), amps)
}

fn displacement_matrix(space: FockSpace, alpha: C64) -> Array2<C64> {
    crate::hilbert::displacement(space, alpha).matrix
}

/// Evolve a pure state under a time-independent Hamiltonian by exact
/// diagonalization: |ψ(t)⟩ = exp(−iHt)|ψ⟩.
pub fn evolve_static(h: &Operator, state: &HybridState, t: f64) -> Result<HybridState> {
    if h.space_dims != state.space_dims {
        return Err(Error::DimMismatch(
            "Hamiltonian space does not match state".into(),
        ));
    }
    let gen = h.matrix.mapv(|c| c * C64::new(0.0, -t));
    let u = expm_anti_hermitian(&gen);
    HybridState::new(state.space_dims.clone(), u.dot(&state.amplitudes))
}

/// Fixed-step RK4 controls and drift tolerances.
#[derive(Clone, Copy, Debug)]
pub struct IntegratorSettings {
    /// Step size upper bound in seconds; the actual step divides the duration
    /// evenly and never exceeds this.
    pub max_dt: f64,
    /// Steps between cheap drift samples (trace, Hermiticity); 0 samples only
    /// at the end.
    pub check_every: usize,
    /// Number of (expensive) positivity spot-checks spread over the run.
    pub positivity_checks: usize,
    pub trace_tol: f64,
    pub hermiticity_tol: f64,
    pub positivity_tol: f64,
}

impl IntegratorSettings {
    pub fn with_max_dt(max_dt: f64) -> Self {
        IntegratorSettings {
            max_dt,
            check_every: 200,
            positivity_checks: 2,
            trace_tol: 1e-7,
            hermiticity_tol: 1e-8,
            positivity_tol: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_dt <= 0.0 || !self.max_dt.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "max_dt must be positive and finite, got {}",
                self.max_dt
            )));
        }
        Ok(())
    }
}

/// One drift sample along an integration.
#[derive(Clone, Copy, Debug)]
pub struct DriftSample {
    pub time: f64,
    pub trace_drift: f64,
    pub hermiticity_defect: f64,
    /// Present only at positivity spot-checks.
    pub min_eigenvalue: Option<f64>,
}

/// Integration result: the final state and the drift samples recorded on the
/// way (always at least the final one).
#[derive(Clone, Debug)]
pub struct Integration {
    pub state: DensityState,
    pub samples: Vec<DriftSample>,
    pub steps: usize,
    pub dt: f64,
}

/// Right-hand side of the master equation, dρ/dt. Reference entry point for
/// tests and one-off evaluations; `integrate` amortizes the setup.
pub fn lindblad_rhs(model: &LindbladModel, rho: &DensityState) -> Result<Array2<C64>> {
    if rho.space_dims != model.hamiltonian.space_dims {
        return Err(Error::DimMismatch(
            "density matrix space does not match model".into(),
        ));
    }
    let mut engine = Engine::new(model);
    let mut out = Array2::zeros(rho.matrix.raw_dim());
    engine.rhs_into(&rho.matrix, &mut out);
    Ok(out)
}

/// Integrate the master equation for `duration` with fixed-step RK4.
///
/// The step count is ceil(duration/max_dt); drift beyond the configured
/// tolerances, or any non-finite value, aborts with a diagnostic error.
pub fn integrate(
    model: &LindbladModel,
    rho0: &DensityState,
    duration: f64,
    settings: &IntegratorSettings,
) -> Result<Integration> {
    settings.validate()?;
    if rho0.space_dims != model.hamiltonian.space_dims {
        return Err(Error::DimMismatch(
            "initial state space does not match model".into(),
        ));
    }
    if duration < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "negative duration {duration}"
        )));
    }
    let steps = (duration / settings.max_dt).ceil().max(1.0) as usize;
    let dt = duration / steps as f64;
    let n = rho0.dim();

    let mut engine = Engine::new(model);
    let mut rho = rho0.matrix.clone();
    let mut k1 = Array2::zeros((n, n));
    let mut k2 = Array2::zeros((n, n));
    let mut k3 = Array2::zeros((n, n));
    let mut k4 = Array2::zeros((n, n));
    let mut ytmp = Array2::zeros((n, n));

    let mut samples = Vec::new();
    let positivity_every = steps
        .checked_div(settings.positivity_checks)
        .map_or(usize::MAX, |per| per.max(1));

    for step in 1..=steps {
        let h = C64::new(dt, 0.0);
        let half = C64::new(0.5 * dt, 0.0);
        engine.rhs_into(&rho, &mut k1);
        Zip::from(&mut ytmp)
            .and(&rho)
            .and(&k1)
            .for_each(|y, &r, &k| *y = r + half * k);
        engine.rhs_into(&ytmp, &mut k2);
        Zip::from(&mut ytmp)
            .and(&rho)
            .and(&k2)
            .for_each(|y, &r, &k| *y = r + half * k);
        engine.rhs_into(&ytmp, &mut k3);
        Zip::from(&mut ytmp)
            .and(&rho)
            .and(&k3)
            .for_each(|y, &r, &k| *y = r + h * k);
        engine.rhs_into(&ytmp, &mut k4);
        let w = C64::new(dt / 6.0, 0.0);
        Zip::from(&mut rho)
            .and(&k1)
            .and(&k2)
            .and(&k3)
            .and(&k4)
            .for_each(|r, &a, &b, &c, &d| {
                *r += w * (a + b * 2.0 + c * 2.0 + d);
            });

        let at_sample = settings.check_every > 0 && step % settings.check_every == 0;
        let at_positivity = step % positivity_every == 0;
        let at_end = step == steps;
        if at_sample || at_positivity || at_end {
            let time = step as f64 * dt;
            let state = DensityState {
                space_dims: rho0.space_dims.clone(),
                matrix: rho.clone(),
            };
            let trace = state.trace();
            if !trace.re.is_finite() || !trace.im.is_finite() {
                return Err(Error::NonFinite(time));
            }
            let trace_drift = (trace.re - 1.0).hypot(trace.im);
            let herm = state.hermiticity_defect();
            let min_eig = if at_positivity || at_end {
                Some(state.min_eigenvalue())
            } else {
                None
            };
            samples.push(DriftSample {
                time,
                trace_drift,
                hermiticity_defect: herm,
                min_eigenvalue: min_eig,
            });
            if trace_drift > settings.trace_tol {
                return Err(Error::DriftExceeded(format!(
                    "trace drift {trace_drift:.3e} > {:.1e} at t = {time:.3e} s",
                    settings.trace_tol
                )));
            }
            if herm > settings.hermiticity_tol {
                return Err(Error::DriftExceeded(format!(
                    "Hermiticity defect {herm:.3e} > {:.1e} at t = {time:.3e} s",
                    settings.hermiticity_tol
                )));
            }
            if let Some(me) = min_eig {
                if me < -settings.positivity_tol {
                    return Err(Error::DriftExceeded(format!(
                        "negative eigenvalue {me:.3e} < -{:.1e} at t = {time:.3e} s",
                        settings.positivity_tol
                    )));
                }
            }
        }
    }

    Ok(Integration {
        state: DensityState {
            space_dims: rho0.space_dims.clone(),
            matrix: rho,
        },
        samples,
        steps,
        dt,
    })
}

// ---------------------------------------------------------------------------
// structured RHS engine
//
// With A = iH + Σ_k (rate_k/2) o_k†o_k, the master equation for Hermitian ρ is
//   dρ/dt = −(Aρ) − (Aρ)† + Σ_k rate_k · o_k (o_k ρ)†,
// since ρA† = (Aρ)† and o ρ o† = o (o ρ)†. All RK4 stage inputs stay
// Hermitian, so the shortcut is exact; it costs a few sparse-dense products
// per term instead of dense matmuls.
// ---------------------------------------------------------------------------

struct SparseRows {
    dim: usize,
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseRows {
    fn from_matrix(m: &Array2<C64>) -> Self {
        let dim = m.nrows();
        let rows = (0..dim)
            .map(|i| {
                (0..dim)
                    .filter(|&j| m[[i, j]] != ZERO)
                    .map(|j| (j, m[[i, j]]))
                    .collect()
            })
            .collect();
        SparseRows { dim, rows }
    }

    /// out = self · dense
    fn mul_into(&self, dense: &Array2<C64>, out: &mut Array2<C64>) {
        out.fill(ZERO);
        for i in 0..self.dim {
            let mut orow = out.row_mut(i);
            let orow = orow.as_slice_mut().expect("contiguous row");
            for &(k, a) in &self.rows[i] {
                let rrow = dense.row(k);
                let rrow = rrow.to_slice().expect("contiguous row");
                for j in 0..self.dim {
                    orow[j] += a * rrow[j];
                }
            }
        }
    }
}

struct Engine {
    a_op: SparseRows,
    jumps: Vec<(f64, SparseRows)>,
    s1: Array2<C64>,
    s2: Array2<C64>,
    s3: Array2<C64>,
}

impl Engine {
    fn new(model: &LindbladModel) -> Self {
        let n = model.hamiltonian.dim();
        let mut a = model.hamiltonian.matrix.mapv(|c| c * C64::new(0.0, 1.0));
        for (rate, op) in &model.dissipators {
            let oo = op.dagger().matmul(op).unwrap();
            a += &oo.matrix.mapv(|c| c * C64::new(rate / 2.0, 0.0));
        }
        Engine {
            a_op: SparseRows::from_matrix(&a),
            jumps: model
                .dissipators
                .iter()
                .filter(|(rate, _)| *rate > 0.0)
                .map(|(rate, op)| (*rate, SparseRows::from_matrix(&op.matrix)))
                .collect(),
            s1: Array2::zeros((n, n)),
            s2: Array2::zeros((n, n)),
            s3: Array2::zeros((n, n)),
        }
    }

    /// out = dρ/dt for Hermitian ρ.
    fn rhs_into(&mut self, rho: &Array2<C64>, out: &mut Array2<C64>) {
        let n = self.a_op.dim;
        self.a_op.mul_into(rho, &mut self.s1);
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] = -self.s1[[i, j]] - self.s1[[j, i]].conj();
            }
        }
        for (rate, jump) in &self.jumps {
            jump.mul_into(rho, &mut self.s1); // s1 = oρ
            for i in 0..n {
                for j in 0..n {
                    self.s2[[i, j]] = self.s1[[j, i]].conj(); // s2 = (oρ)† = ρo†
                }
            }
            jump.mul_into(&self.s2, &mut self.s3); // s3 = oρo†
            let r = C64::new(*rate, 0.0);
            Zip::from(&mut *out)
                .and(&self.s3)
                .for_each(|o, &x| *o += r * x);
        }
    }
}

// ---------------------------------------------------------------------------
// cross-validation Hamiltonians
// ---------------------------------------------------------------------------

fn guard_total_dim(total: usize) -> Result<()> {
    if total > FULL_MODEL_DIM_CAP {
        return Err(Error::MemoryGuard {
            total,
            cap: FULL_MODEL_DIM_CAP,
        });
    }
    Ok(())
}

/// Laboratory-frame three-body Hamiltonian on cavity⊗magnon⊗qubit:
/// H = ω_c c†c + (ω_q/2)σ_z + ω_m m†m + (ξ/2)(m†² + m²)
///     + g_cq(c† + c)σ_x + g_cm(c† + c)(m† + m).
pub fn full_model_hamiltonian(
    cfg: &DeviceConfig,
    cavity_dim: usize,
    magnon_dim: usize,
) -> Result<Operator> {
    guard_total_dim(cavity_dim * magnon_dim * 2)?;
    let sc = FockSpace::new(cavity_dim)?;
    let sm = FockSpace::new(magnon_dim)?;
    let (ic, im, iq) = (
        Operator::identity(vec![cavity_dim]),
        Operator::identity(vec![magnon_dim]),
        Operator::identity(vec![2]),
    );
    let c = annihilation(sc);
    let m = annihilation(sm);
    let xc = c.add(&c.dagger()).unwrap();
    let m2 = m.matmul(&m).unwrap();
    let para = m2
        .dagger()
        .add(&m2)
        .unwrap()
        .scale(C64::new(cfg.xi / 2.0, 0.0));
    let magnon_part = number(sm)
        .scale(C64::new(cfg.omega_m, 0.0))
        .add(&para)
        .unwrap();
    let h = tensor(
        &tensor(&number(sc).scale(C64::new(cfg.omega_c, 0.0)), &im),
        &iq,
    )
    .add(&tensor(
        &tensor(&ic, &im),
        &sigma_z().scale(C64::new(cfg.omega_q / 2.0, 0.0)),
    ))
    .unwrap()
    .add(&tensor(&tensor(&ic, &magnon_part), &iq))
    .unwrap()
    .add(&tensor(
        &tensor(&xc.scale(C64::new(cfg.g_cq, 0.0)), &im),
        &sigma_x(),
    ))
    .unwrap()
    .add(&tensor(
        &tensor(
            &xc.scale(C64::new(cfg.g_cm, 0.0)),
            &m.add(&m.dagger()).unwrap(),
        ),
        &iq,
    ))
    .unwrap();
    Ok(h)
}

/// Same three-body system after the Bogoliubov transformation of the magnon
/// mode: the parametric term is absorbed into ω′_m and the coupling scales
/// to g′_cm. Used as the "full model" side of the elimination cross-check.
pub fn squeezed_frame_hamiltonian(
    cfg: &DeviceConfig,
    model: &EffectiveModel,
    cavity_dim: usize,
    magnon_dim: usize,
) -> Result<Operator> {
    guard_total_dim(cavity_dim * magnon_dim * 2)?;
    let sc = FockSpace::new(cavity_dim)?;
    let sm = FockSpace::new(magnon_dim)?;
    let (ic, im, iq) = (
        Operator::identity(vec![cavity_dim]),
        Operator::identity(vec![magnon_dim]),
        Operator::identity(vec![2]),
    );
    let c = annihilation(sc);
    let m = annihilation(sm);
    let xc = c.add(&c.dagger()).unwrap();
    let xm = m.add(&m.dagger()).unwrap();
    let h = tensor(
        &tensor(&number(sc).scale(C64::new(cfg.omega_c, 0.0)), &im),
        &iq,
    )
    .add(&tensor(
        &tensor(&ic, &im),
        &sigma_z().scale(C64::new(cfg.omega_q / 2.0, 0.0)),
    ))
    .unwrap()
    .add(&tensor(
        &tensor(&ic, &number(sm).scale(C64::new(model.omega_m_prime, 0.0))),
        &iq,
    ))
    .unwrap()
    .add(&tensor(
        &tensor(&xc.scale(C64::new(cfg.g_cq, 0.0)), &im),
        &sigma_x(),
    ))
    .unwrap()
    .add(&tensor(
        &tensor(&xc.scale(C64::new(model.g_cm_prime, 0.0)), &xm),
        &iq,
    ))
    .unwrap();
    Ok(h)
}

/// Effective magnon-qubit Hamiltonian after cavity elimination, before any
/// drive or rotating frame:
/// H = (ω′_q/2)σ_z + ω″_m m†m − χ(m† + m)σ_x.
pub fn effective_hamiltonian(model: &EffectiveModel, space: FockSpace) -> Operator {
    let m = annihilation(space);
    let im = Operator::identity(vec![space.dim]);
    tensor(
        &number(space).scale(C64::new(model.omega_m_dprime, 0.0)),
        &Operator::identity(vec![2]),
    )
    .add(&tensor(
        &im,
        &sigma_z().scale(C64::new(model.omega_q_prime / 2.0, 0.0)),
    ))
    .unwrap()
    .add(&tensor(
        &m.add(&m.dagger()).unwrap().scale(C64::new(-model.chi, 0.0)),
        &sigma_x(),
    ))
    .unwrap()
}

/// Jaynes-Cummings Hamiltonian H = ω_mode m†m + (ω_qubit/2)σ_z
/// + g(mσ_+ + m†σ_−) on fock⊗qubit.
pub fn jc_hamiltonian(space: FockSpace, omega_mode: f64, omega_qubit: f64, g: f64) -> Operator {
    let m = annihilation(space);
    let im = Operator::identity(vec![space.dim]);
    tensor(
        &number(space).scale(C64::new(omega_mode, 0.0)),
        &Operator::identity(vec![2]),
    )
    .add(&tensor(
        &im,
        &sigma_z().scale(C64::new(omega_qubit / 2.0, 0.0)),
    ))
    .unwrap()
    .add(
        &tensor(&m, &sigma_plus())
            .add(&tensor(&creation(space), &sigma_minus()))
            .unwrap()
            .scale(C64::new(g, 0.0)),
    )
    .unwrap()
}
