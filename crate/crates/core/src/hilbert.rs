//! Truncated Fock space linear algebra: operators, hybrid oscillator-qubit
//! states, density matrices, and the few dense-matrix primitives everything
//! else is built from.
//!
//! Conventions fixed here once and used everywhere:
//! - Fock truncation keeps states |0>..|dim-1>.
//! - Qubit basis ordering is (|g>, |e>) with sigma_z|e> = +|e>; the sigma_x
//!   eigenvectors are |±>_x = (|g> ± |e>)/sqrt(2).
//! - In composite spaces the qubit is the last tensor factor, so the joint
//!   index is `fock_index * 2 + qubit_index`.
//! - `squeezing(r)` = exp[(r/2)(m†² − m²)] squeezes the p quadrature for
//!   r > 0 (peaks displaced along p stay narrow along p).

use crate::{Error, Result};
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

/// Tolerance used by Hermiticity assertions on operators.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Fraction of the top of the Fock ladder used for the truncation-leakage
/// estimate, together with the population threshold above which callers
/// should treat a state as unreliable.
pub const LEAKAGE_TOP_FRACTION: f64 = 0.05;
pub const LEAKAGE_WARN_THRESHOLD: f64 = 1e-6;

/// A truncated single-mode Fock space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockSpace {
    pub dim: usize,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::BadDim(dim));
        }
        Ok(FockSpace { dim })
    }
}

/// Dense operator on a (possibly composite) finite space.
#[derive(Clone, Debug)]
pub struct Operator {
    pub space_dims: Vec<usize>,
    pub matrix: Array2<C64>,
}

fn total_dim(dims: &[usize]) -> usize {
    dims.iter().product()
}

impl Operator {
    pub fn new(space_dims: Vec<usize>, matrix: Array2<C64>) -> Result<Self> {
        let n = total_dim(&space_dims);
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimMismatch(format!(
                "operator matrix is {}x{}, space dims {:?} require {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                space_dims,
                n,
                n
            )));
        }
        Ok(Operator { space_dims, matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Identity on an arbitrary composite space.
    pub fn identity(space_dims: Vec<usize>) -> Self {
        let n = total_dim(&space_dims);
        Operator {
            space_dims,
            matrix: Array2::eye(n).mapv(|x| C64::new(x, 0.0)),
        }
    }

    pub fn dagger(&self) -> Self {
        Operator {
            space_dims: self.space_dims.clone(),
            matrix: self.matrix.t().mapv(|z| z.conj()),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Operator {
            space_dims: self.space_dims.clone(),
            matrix: self.matrix.mapv(|z| z * s),
        }
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Operator {
            space_dims: self.space_dims.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn matmul(&self, other: &Operator) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Operator {
            space_dims: self.space_dims.clone(),
            matrix: self.matrix.dot(&other.matrix),
        })
    }

    fn check_same_space(&self, other: &Operator) -> Result<()> {
        if self.space_dims != other.space_dims {
            return Err(Error::DimMismatch(format!(
                "operator spaces differ: {:?} vs {:?}",
                self.space_dims, other.space_dims
            )));
        }
        Ok(())
    }

    /// Max-norm deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        let n = self.dim();
        for i in 0..n {
            for j in i..n {
                let d = (self.matrix[[i, j]] - self.matrix[[j, i]].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn assert_hermitian(&self) -> Result<()> {
        let d = self.hermiticity_defect();
        if d > HERMITICITY_TOL {
            return Err(Error::DriftExceeded(format!(
                "operator Hermiticity defect {d:.3e} exceeds {HERMITICITY_TOL:.1e}"
            )));
        }
        Ok(())
    }

    /// Max-norm of (U U† − 1); truncation leakage makes D and S slightly
    /// non-unitary near the top of the ladder.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.matrix.dot(&self.matrix.t().mapv(|z| z.conj()));
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                worst = worst.max((prod[[i, j]] - expect).norm());
            }
        }
        worst
    }
}

/// Annihilation operator: <n-1| m |n> = sqrt(n).
pub fn annihilation(space: FockSpace) -> Operator {
    let n = space.dim;
    let mut m = Array2::zeros((n, n));
    for k in 1..n {
        m[[k - 1, k]] = C64::new((k as f64).sqrt(), 0.0);
    }
    Operator {
        space_dims: vec![n],
        matrix: m,
    }
}

/// Creation operator m†.
pub fn creation(space: FockSpace) -> Operator {
    annihilation(space).dagger()
}

/// Number operator m†m (diagonal).
pub fn number(space: FockSpace) -> Operator {
    let n = space.dim;
    let mut m = Array2::zeros((n, n));
    for k in 0..n {
        m[[k, k]] = C64::new(k as f64, 0.0);
    }
    Operator {
        space_dims: vec![n],
        matrix: m,
    }
}

/// Position quadrature q = (m† + m)/sqrt(2).
pub fn position(space: FockSpace) -> Operator {
    let a = annihilation(space);
    let s = C64::new(1.0 / 2.0_f64.sqrt(), 0.0);
    a.add(&a.dagger()).unwrap().scale(s)
}

/// Momentum quadrature p = i(m† − m)/sqrt(2).
pub fn momentum(space: FockSpace) -> Operator {
    let a = annihilation(space);
    let ad = a.dagger();
    let s = C64::new(0.0, 1.0 / 2.0_f64.sqrt());
    ad.add(&a.scale(C64::new(-1.0, 0.0))).unwrap().scale(s)
}

/// Photon-number parity exp(i pi m†m) (diagonal ±1).
pub fn parity(space: FockSpace) -> Operator {
    let n = space.dim;
    let mut m = Array2::zeros((n, n));
    for k in 0..n {
        m[[k, k]] = C64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
    }
    Operator {
        space_dims: vec![n],
        matrix: m,
    }
}

/// Displacement D(alpha) = exp(alpha m† − alpha* m).
///
/// Soft validity: |alpha|² ≲ dim/4. Beyond that the truncated matrix loses
/// unitarity; check `unitarity_defect` or state leakage when in doubt.
pub fn displacement(space: FockSpace, alpha: C64) -> Operator {
    let a = annihilation(space);
    let gen = a
        .dagger()
        .scale(alpha)
        .add(&a.scale(-alpha.conj()))
        .unwrap();
    Operator {
        space_dims: vec![space.dim],
        matrix: expm_anti_hermitian(&gen.matrix),
    }
}

/// Squeezing S(r) = exp[(r/2)(m†² − m²)], r real.
///
/// Soft validity: e^{2r} ≲ dim/8.
pub fn squeezing(space: FockSpace, r: f64) -> Operator {
    let a = annihilation(space);
    let a2 = a.matmul(&a).unwrap();
    let gen = a2
        .dagger()
        .add(&a2.scale(C64::new(-1.0, 0.0)))
        .unwrap()
        .scale(C64::new(r / 2.0, 0.0));
    Operator {
        space_dims: vec![space.dim],
        matrix: expm_anti_hermitian(&gen.matrix),
    }
}

/// Qubit (2x2) operators in the (|g>, |e>) basis.
pub fn sigma_x() -> Operator {
    Operator::new(
        vec![2],
        ndarray::array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
        ],
    )
    .unwrap()
}

pub fn sigma_y() -> Operator {
    Operator::new(
        vec![2],
        ndarray::array![
            [C64::new(0.0, 0.0), C64::new(0.0, 1.0)],
            [C64::new(0.0, -1.0), C64::new(0.0, 0.0)]
        ],
    )
    .unwrap()
}

pub fn sigma_z() -> Operator {
    Operator::new(
        vec![2],
        ndarray::array![
            [C64::new(-1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
        ],
    )
    .unwrap()
}

/// sigma_+ = |e><g|.
pub fn sigma_plus() -> Operator {
    Operator::new(
        vec![2],
        ndarray::array![
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
        ],
    )
    .unwrap()
}

/// sigma_- = |g><e|.
pub fn sigma_minus() -> Operator {
    sigma_plus().dagger()
}

/// Kronecker product of two operators; `a`'s space comes first.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    let (na, nb) = (a.dim(), b.dim());
    let mut m = Array2::zeros((na * nb, na * nb));
    for i in 0..na {
        for j in 0..na {
            let aij = a.matrix[[i, j]];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    m[[i * nb + k, j * nb + l]] = aij * b.matrix[[k, l]];
                }
            }
        }
    }
    let mut dims = a.space_dims.clone();
    dims.extend_from_slice(&b.space_dims);
    Operator {
        space_dims: dims,
        matrix: m,
    }
}

/// Measurement outcome of a qubit projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QubitOutcome {
    G,
    E,
}

/// Pure state on a (possibly composite) finite space.
#[derive(Clone, Debug)]
pub struct HybridState {
    pub space_dims: Vec<usize>,
    pub amplitudes: Array1<C64>,
}

impl HybridState {
    pub fn new(space_dims: Vec<usize>, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != total_dim(&space_dims) {
            return Err(Error::DimMismatch(format!(
                "amplitude vector length {} does not match dims {:?}",
                amplitudes.len(),
                space_dims
            )));
        }
        Ok(HybridState {
            space_dims,
            amplitudes,
        })
    }

    /// Fock state |n>.
    pub fn fock(space: FockSpace, n: usize) -> Result<Self> {
        if n >= space.dim {
            return Err(Error::DimMismatch(format!(
                "fock index {n} outside dim {}",
                space.dim
            )));
        }
        let mut v = Array1::zeros(space.dim);
        v[n] = C64::new(1.0, 0.0);
        Ok(HybridState {
            space_dims: vec![space.dim],
            amplitudes: v,
        })
    }

    pub fn vacuum(space: FockSpace) -> Self {
        Self::fock(space, 0).unwrap()
    }

    /// Qubit basis states in the (|g>, |e>) ordering.
    pub fn qubit_g() -> Self {
        HybridState {
            space_dims: vec![2],
            amplitudes: ndarray::array![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        }
    }

    pub fn qubit_e() -> Self {
        HybridState {
            space_dims: vec![2],
            amplitudes: ndarray::array![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        }
    }

    pub fn qubit_plus_x() -> Self {
        let s = C64::new(1.0 / 2.0_f64.sqrt(), 0.0);
        HybridState {
            space_dims: vec![2],
            amplitudes: ndarray::array![s, s],
        }
    }

    pub fn qubit_minus_x() -> Self {
        let s = C64::new(1.0 / 2.0_f64.sqrt(), 0.0);
        HybridState {
            space_dims: vec![2],
            amplitudes: ndarray::array![s, -s],
        }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-150 {
            return Err(Error::ZeroNorm("cannot normalize".into()));
        }
        Ok(HybridState {
            space_dims: self.space_dims.clone(),
            amplitudes: self.amplitudes.mapv(|z| z / n),
        })
    }

    /// <self|other>.
    pub fn inner(&self, other: &HybridState) -> Result<C64> {
        if self.space_dims != other.space_dims {
            return Err(Error::DimMismatch(format!(
                "state spaces differ: {:?} vs {:?}",
                self.space_dims, other.space_dims
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn apply(&self, op: &Operator) -> Result<Self> {
        if op.space_dims != self.space_dims {
            return Err(Error::DimMismatch(format!(
                "operator space {:?} vs state space {:?}",
                op.space_dims, self.space_dims
            )));
        }
        Ok(HybridState {
            space_dims: self.space_dims.clone(),
            amplitudes: op.matrix.dot(&self.amplitudes),
        })
    }

    /// <psi| A |psi>.
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        let ap = self.apply(op)?;
        self.inner(&ap)
    }

    /// Tensor product |self> ⊗ |other>.
    pub fn tensor(&self, other: &HybridState) -> Self {
        let (na, nb) = (self.amplitudes.len(), other.amplitudes.len());
        let mut v = Array1::zeros(na * nb);
        for i in 0..na {
            for k in 0..nb {
                v[i * nb + k] = self.amplitudes[i] * other.amplitudes[k];
            }
        }
        let mut dims = self.space_dims.clone();
        dims.extend_from_slice(&other.space_dims);
        HybridState {
            space_dims: dims,
            amplitudes: v,
        }
    }

    /// Verify the state is a composite `mode ⊗ qubit` and return the mode-side
    /// dimension product.
    pub fn check_qubit_last(&self) -> Result<usize> {
        match self.space_dims.split_last() {
            Some((2, rest)) if !rest.is_empty() => Ok(total_dim(rest)),
            _ => Err(Error::DimMismatch(format!(
                "expected composite space with a qubit as last factor, got {:?}",
                self.space_dims
            ))),
        }
    }

    /// Project the trailing qubit onto |g> or |e>; returns the renormalized
    /// post-measurement state (qubit factor kept, collapsed) and the Born
    /// probability.
    pub fn project_qubit(&self, outcome: QubitOutcome) -> Result<(Self, f64)> {
        let nrest = self.check_qubit_last()?;
        let off = match outcome {
            QubitOutcome::G => 0,
            QubitOutcome::E => 1,
        };
        let mut v = Array1::zeros(self.amplitudes.len());
        let mut p = 0.0;
        for i in 0..nrest {
            let amp = self.amplitudes[2 * i + off];
            p += amp.norm_sqr();
            v[2 * i + off] = amp;
        }
        if p < 1e-12 {
            return Err(Error::ImpossibleOutcome(p));
        }
        let scale = C64::new(1.0 / p.sqrt(), 0.0);
        Ok((
            HybridState {
                space_dims: self.space_dims.clone(),
                amplitudes: v.mapv(|z| z * scale),
            },
            p,
        ))
    }

    /// Drop a collapsed trailing qubit factor, returning the oscillator part.
    pub fn drop_qubit(&self, outcome: QubitOutcome) -> Result<Self> {
        let nrest = self.check_qubit_last()?;
        let off = match outcome {
            QubitOutcome::G => 0,
            QubitOutcome::E => 1,
        };
        let mut v = Array1::zeros(nrest);
        for i in 0..nrest {
            v[i] = self.amplitudes[2 * i + off];
        }
        let dims = self.space_dims[..self.space_dims.len() - 1].to_vec();
        HybridState::new(dims, v)?.normalize()
    }

    /// Population in the top `LEAKAGE_TOP_FRACTION` of the first-factor Fock
    /// ladder; a cheap proxy for truncation error.
    pub fn truncation_leakage(&self) -> f64 {
        let nf = self.space_dims[0];
        let rest: usize = self.space_dims[1..].iter().product::<usize>().max(1);
        let cut = ((nf as f64) * (1.0 - LEAKAGE_TOP_FRACTION)).floor() as usize;
        let mut pop = 0.0;
        for n in cut..nf {
            for k in 0..rest {
                pop += self.amplitudes[n * rest + k].norm_sqr();
            }
        }
        pop
    }

    pub fn to_density(&self) -> DensityState {
        let n = self.amplitudes.len();
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                m[[i, j]] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityState {
            space_dims: self.space_dims.clone(),
            matrix: m,
        }
    }
}

/// Density matrix on a (possibly composite) finite space.
#[derive(Clone, Debug)]
pub struct DensityState {
    pub space_dims: Vec<usize>,
    pub matrix: Array2<C64>,
}

impl DensityState {
    pub fn new(space_dims: Vec<usize>, matrix: Array2<C64>) -> Result<Self> {
        let n = total_dim(&space_dims);
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimMismatch(format!(
                "density matrix is {}x{}, dims {:?} require {}",
                matrix.nrows(),
                matrix.ncols(),
                space_dims,
                n
            )));
        }
        Ok(DensityState { space_dims, matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.matrix[[i, i]]).sum()
    }

    /// Tr[rho A].
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        if op.space_dims != self.space_dims {
            return Err(Error::DimMismatch(format!(
                "operator space {:?} vs density space {:?}",
                op.space_dims, self.space_dims
            )));
        }
        let n = self.dim();
        let mut tr = C64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                tr += self.matrix[[i, k]] * op.matrix[[k, i]];
            }
        }
        Ok(tr)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[[i, j]] - self.matrix[[j, i]].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part; slightly negative values
    /// bound integrator drift.
    pub fn min_eigenvalue(&self) -> f64 {
        let evs = eigvalsh(&self.matrix);
        evs.into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Unitary conjugation rho -> U rho U†.
    pub fn conjugate(&self, u: &Operator) -> Result<Self> {
        if u.space_dims != self.space_dims {
            return Err(Error::DimMismatch(format!(
                "operator space {:?} vs density space {:?}",
                u.space_dims, self.space_dims
            )));
        }
        let m = u
            .matrix
            .dot(&self.matrix)
            .dot(&u.matrix.t().mapv(|z| z.conj()));
        Ok(DensityState {
            space_dims: self.space_dims.clone(),
            matrix: m,
        })
    }

    fn check_qubit_last(&self) -> Result<usize> {
        match self.space_dims.split_last() {
            Some((2, rest)) if !rest.is_empty() => Ok(total_dim(rest)),
            _ => Err(Error::DimMismatch(format!(
                "expected composite space with a qubit as last factor, got {:?}",
                self.space_dims
            ))),
        }
    }

    /// Project the trailing qubit; returns renormalized state and probability.
    pub fn project_qubit(&self, outcome: QubitOutcome) -> Result<(Self, f64)> {
        let nrest = self.check_qubit_last()?;
        let off = match outcome {
            QubitOutcome::G => 0,
            QubitOutcome::E => 1,
        };
        let n = self.dim();
        let mut m = Array2::zeros((n, n));
        let mut p = 0.0;
        for i in 0..nrest {
            p += self.matrix[[2 * i + off, 2 * i + off]].re;
        }
        if p < 1e-12 {
            return Err(Error::ImpossibleOutcome(p));
        }
        for i in 0..nrest {
            for j in 0..nrest {
                m[[2 * i + off, 2 * j + off]] = self.matrix[[2 * i + off, 2 * j + off]] / p;
            }
        }
        Ok((
            DensityState {
                space_dims: self.space_dims.clone(),
                matrix: m,
            },
            p,
        ))
    }

    /// Trace out the trailing qubit.
    pub fn partial_trace_qubit(&self) -> Result<Self> {
        let nrest = self.check_qubit_last()?;
        let mut m = Array2::zeros((nrest, nrest));
        for i in 0..nrest {
            for j in 0..nrest {
                m[[i, j]] = self.matrix[[2 * i, 2 * j]] + self.matrix[[2 * i + 1, 2 * j + 1]];
            }
        }
        Ok(DensityState {
            space_dims: self.space_dims[..self.space_dims.len() - 1].to_vec(),
            matrix: m,
        })
    }

    /// Population in the top fraction of the first-factor Fock ladder.
    pub fn truncation_leakage(&self) -> f64 {
        let nf = self.space_dims[0];
        let rest: usize = self.space_dims[1..].iter().product::<usize>().max(1);
        let cut = ((nf as f64) * (1.0 - LEAKAGE_TOP_FRACTION)).floor() as usize;
        let mut pop = 0.0;
        for n in cut..nf {
            for k in 0..rest {
                pop += self.matrix[[n * rest + k, n * rest + k]].re;
            }
        }
        pop
    }
}

/// |<a|b>|² for pure states.
pub fn fidelity(a: &HybridState, b: &HybridState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// <psi| rho |psi> for a mixed state against a pure target.
pub fn fidelity_rho(rho: &DensityState, psi: &HybridState) -> Result<f64> {
    if rho.space_dims != psi.space_dims {
        return Err(Error::DimMismatch(format!(
            "density space {:?} vs state space {:?}",
            rho.space_dims, psi.space_dims
        )));
    }
    let n = psi.amplitudes.len();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += psi.amplitudes[i].conj() * rho.matrix[[i, j]] * psi.amplitudes[j];
        }
    }
    Ok(acc.re)
}

// ---------------------------------------------------------------------------
// dense-matrix primitives (nalgebra bridge)
// ---------------------------------------------------------------------------

fn to_na(m: &Array2<C64>) -> nalgebra::DMatrix<C64> {
    let (r, c) = (m.nrows(), m.ncols());
    nalgebra::DMatrix::from_fn(r, c, |i, j| m[[i, j]])
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(m: &Array2<C64>) -> Vec<f64> {
    let h = to_na(m);
    // symmetrize to guard against roundoff-level drift in the input
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let mut evs: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().cloned().collect();
    evs.sort_by(|a, b| a.total_cmp(b));
    evs
}

/// exp(G) for an anti-Hermitian generator G, via the eigendecomposition of
/// the Hermitian matrix iG. Exact unitarity up to eigensolver roundoff.
pub fn expm_anti_hermitian(gen: &Array2<C64>) -> Array2<C64> {
    let n = gen.nrows();
    let h = to_na(gen) * C64::new(0.0, 1.0); // iG, Hermitian
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    // exp(G) = exp(-iH) = V exp(-i lambda) V†
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (k, lam) in eig.eigenvalues.iter().enumerate() {
        let phase = C64::new(0.0, -lam).exp();
        for i in 0..n {
            scaled[(i, k)] *= phase;
        }
    }
    let u = &scaled * v.adjoint();
    Array2::from_shape_fn((n, n), |(i, j)| u[(i, j)])
}
