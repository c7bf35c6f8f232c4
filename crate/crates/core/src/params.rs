//! Device-to-effective-model parameter chain.
//!
//! Starting from device-level inputs (cavity/qubit/magnon frequencies, bare
//! couplings, the parametric strength xi — given directly or derived from
//! ellipsoid shape anisotropy), this module produces the squeezed-frame
//! (Bogoliubov) magnon parameters, the cavity-eliminated magnon-qubit
//! coupling chi with its shifted frequencies, and the effective dissipation
//! rates entering the master equation.
//!
//! Unit conventions: all frequencies, couplings, and rates are angular
//! (rad/s) inside this crate; file-facing interfaces take Hz and convert.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const KB: f64 = 1.380_649e-23;

const TAU: f64 = std::f64::consts::TAU;

/// Prolate spheroid semi-axes in meters, a >= b = c.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EllipsoidGeometry {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl EllipsoidGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0 && self.c > 0.0) {
            return Err(Error::UnsupportedShape("semi-axes must be positive".into()));
        }
        if (self.b - self.c).abs() > 1e-12 * self.a {
            return Err(Error::UnsupportedShape(format!(
                "closed form requires b = c, got b = {}, c = {}",
                self.b, self.c
            )));
        }
        if self.a < self.c {
            return Err(Error::UnsupportedShape(format!(
                "closed form requires a >= c (prolate), got a = {}, c = {}",
                self.a, self.c
            )));
        }
        Ok(())
    }

    /// Eccentricity e = sqrt(1 - (c/a)²) in [0, 1).
    pub fn eccentricity(&self) -> f64 {
        (1.0 - (self.c / self.a).powi(2)).max(0.0).sqrt()
    }
}

/// Magnetic material and bias-field parameters.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Gyromagnetic ratio (rad s^-1 T^-1).
    pub gamma0: f64,
    /// mu_0 * M_s, saturation magnetization expressed in tesla.
    pub mu0_ms: f64,
    /// Static bias field (tesla).
    pub b0: f64,
}

/// Device-level inputs for the full derivation chain.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DeviceConfig {
    pub omega_c: f64,
    pub omega_q: f64,
    pub omega_m: f64,
    pub g_cq: f64,
    pub g_cm: f64,
    pub xi: f64,
    pub kappa_m: f64,
    pub gamma: f64,
    pub gamma_phi: f64,
    /// Temperature in kelvin.
    pub temperature: f64,
    /// Qubit drive Rabi rate (rad/s).
    pub epsilon: f64,
    /// Qubit drive frequency (rad/s).
    pub omega_p: f64,
}

impl DeviceConfig {
    /// Reference operating point used by the examples and regression tests:
    /// a hybrid cavity/qubit/magnon device with strong shape anisotropy
    /// (r ≈ 1) and millikelvin operation.
    pub fn reference() -> Self {
        let hz = |f: f64| TAU * f;
        DeviceConfig {
            omega_c: hz(5.127e9),
            omega_q: hz(4.790e9),
            omega_m: hz(18.016e9),
            g_cq: hz(65.0e6),
            g_cm: hz(103.0e6),
            xi: hz(17.368e9),
            kappa_m: hz(10.0e3), // 5 * gamma
            gamma: hz(2.0e3),
            gamma_phi: hz(2.0e3),
            temperature: 0.010,
            epsilon: hz(55.63e6),
            omega_p: hz(4.784e9),
        }
    }
}

/// Transformation coefficients of the cavity elimination; all four must stay
/// small for the large-detuning treatment to hold.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FnCoeffs {
    pub mu_q: f64,
    pub nu_q: f64,
    pub mu_m: f64,
    pub nu_m: f64,
}

impl FnCoeffs {
    pub fn max_abs(&self) -> f64 {
        self.mu_q
            .abs()
            .max(self.nu_q.abs())
            .max(self.mu_m.abs())
            .max(self.nu_m.abs())
    }
}

/// Diagnostic record of the regime checks; informative, never enforced.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ValidityReport {
    /// All elimination coefficients below 0.2.
    pub large_detuning_ok: bool,
    /// Drive strong against the conditional coupling: 2 epsilon > 5 chi.
    pub strong_drive_ok: bool,
}

/// Output of `eliminate_cavity`.
#[derive(Clone, Copy, Debug)]
pub struct CavityElimination {
    pub chi: f64,
    pub omega_q_prime: f64,
    pub omega_m_dprime: f64,
    pub zeta: f64,
    pub fn_coeffs: FnCoeffs,
}

/// Effective dissipation rates entering the master equation, plus the
/// thermal occupations they came from.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EffectiveRates {
    pub kappa_m_prime: f64,
    pub kappa_m_dprime: f64,
    pub gamma_prime: f64,
    pub gamma_dprime: f64,
    pub nbar_m: f64,
    pub nbar_q: f64,
}

/// Everything downstream modules need, derived once from a `DeviceConfig`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EffectiveModel {
    pub r: f64,
    pub mu: f64,
    pub nu: f64,
    pub omega_m_prime: f64,
    pub g_cm_prime: f64,
    pub omega_q_prime: f64,
    pub omega_m_dprime: f64,
    pub zeta: f64,
    pub chi: f64,
    pub fn_coeffs: FnCoeffs,
    pub kappa_m_prime: f64,
    pub kappa_m_dprime: f64,
    pub gamma_prime: f64,
    pub gamma_dprime: f64,
    pub nbar_m: f64,
    pub nbar_q: f64,
    pub nbar_c: f64,
    pub validity: ValidityReport,
}

/// Demagnetization factors of a prolate spheroid magnetized along x.
///
/// Nx follows the closed form in terms of the eccentricity; Ny = Nz by
/// symmetry and the trace is one. An exact sphere returns identical thirds
/// so the shape anisotropy (and with it the parametric strength) vanishes
/// identically rather than to rounding.
pub fn demag_tensor(geom: &EllipsoidGeometry) -> Result<(f64, f64, f64)> {
    geom.validate()?;
    let e = geom.eccentricity();
    if e == 0.0 {
        return Ok((1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0));
    }
    let nx = if e < 1e-4 {
        // series around the sphere: Nx = 1/3 - 2e²/15 + O(e⁴)
        1.0 / 3.0 - 2.0 * e * e / 15.0
    } else {
        let ln = ((1.0 + e) / (1.0 - e)).ln();
        (1.0 - e * e) / (2.0 * e.powi(3)) * (ln - 2.0 * e)
    };
    let ny = (1.0 - nx) / 2.0;
    Ok((nx, ny, ny))
}

/// Kittel-mode frequency and parametric strength from shape anisotropy:
/// omega_m = gamma0 mu0 B0 + gamma0 mu0 Ms (1 - 3 Nz)/2,
/// xi = gamma0 mu0 Ms (Nx - Ny)/2.
pub fn kittel_params(geom: &EllipsoidGeometry, mat: &MaterialParams) -> Result<(f64, f64)> {
    let (nx, ny, nz) = demag_tensor(geom)?;
    let omega_m = mat.gamma0 * mat.b0 + mat.gamma0 * mat.mu0_ms * (1.0 - 3.0 * nz) / 2.0;
    let xi = mat.gamma0 * mat.mu0_ms * (nx - ny) / 2.0;
    Ok((omega_m, xi))
}

/// Squeezing parameter r = (1/4) ln[(omega_m + xi)/(omega_m - xi)].
pub fn squeezing_r(omega_m: f64, xi: f64) -> Result<f64> {
    if xi.abs() >= omega_m {
        return Err(Error::Instability { omega_m, xi });
    }
    Ok(0.25 * ((omega_m + xi) / (omega_m - xi)).ln())
}

/// Squeezed-frame magnon frequency and coupling:
/// omega_m' = (omega_m - xi) e^{2r}, g_cm' = g_cm e^{-r}.
pub fn bogoliubov_frame(omega_m: f64, xi: f64, g_cm: f64) -> Result<(f64, f64)> {
    let r = squeezing_r(omega_m, xi)?;
    Ok(((omega_m - xi) * (2.0 * r).exp(), g_cm * (-r).exp()))
}

/// Cavity elimination: effective magnon-qubit coupling chi, shifted qubit
/// and magnon frequencies, and the elimination coefficients.
pub fn eliminate_cavity(
    cfg: &DeviceConfig,
    omega_m_prime: f64,
    g_cm_prime: f64,
) -> Result<CavityElimination> {
    let d_cq_m = cfg.omega_c - cfg.omega_q;
    let d_cq_p = cfg.omega_c + cfg.omega_q;
    let d_cm_m = cfg.omega_c - omega_m_prime;
    let d_cm_p = cfg.omega_c + omega_m_prime;
    for (name, d) in [
        ("omega_c - omega_q", d_cq_m),
        ("omega_c + omega_q", d_cq_p),
        ("omega_c - omega_m'", d_cm_m),
        ("omega_c + omega_m'", d_cm_p),
    ] {
        if d == 0.0 {
            return Err(Error::ZeroDetuning(name.into()));
        }
    }
    let chi =
        cfg.g_cq * g_cm_prime * (1.0 / d_cq_m + 1.0 / d_cq_p + 1.0 / d_cm_m + 1.0 / d_cm_p) / 2.0;
    let omega_q_prime = cfg.omega_q - cfg.g_cq.powi(2) * (1.0 / d_cq_m - 1.0 / d_cq_p) / 2.0;
    let zeta = g_cm_prime.powi(2) * (1.0 / d_cm_m + 1.0 / d_cm_p) / 2.0;
    let omega_m_dprime = omega_m_prime - 2.0 * zeta;
    let fn_coeffs = FnCoeffs {
        mu_q: cfg.g_cq / d_cq_p,
        nu_q: cfg.g_cq / d_cq_m,
        mu_m: g_cm_prime / d_cm_p,
        nu_m: g_cm_prime / d_cm_m,
    };
    Ok(CavityElimination {
        chi,
        omega_q_prime,
        omega_m_dprime,
        zeta,
        fn_coeffs,
    })
}

/// Bose-Einstein occupation at angular frequency omega and temperature T.
pub fn nbar(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = HBAR * omega / (KB * temperature);
    1.0 / x.exp_m1()
}

/// Effective dissipation rates. The squeezed-frame magnon sees its bath
/// through the Bogoliubov coefficients (mu, nu) = (cosh r, sinh r):
/// kappa' = kappa[(nbar+1)mu² + nbar nu²], kappa'' = kappa[(nbar+1)nu² + nbar mu²];
/// the qubit rates fold thermal excitation and pure dephasing into
/// gamma' = gamma(2 nbar_q + 1)/4, gamma'' = [gamma(2 nbar_q + 1) + 2 gamma_phi]/4.
/// Occupations use each mode's lab-frame frequency.
pub fn effective_rates(cfg: &DeviceConfig, r: f64) -> EffectiveRates {
    let mu = r.cosh();
    let nu = r.sinh();
    let nbar_m = nbar(cfg.omega_m, cfg.temperature);
    let nbar_q = nbar(cfg.omega_q, cfg.temperature);
    let kappa_m_prime = cfg.kappa_m * ((nbar_m + 1.0) * mu * mu + nbar_m * nu * nu);
    let kappa_m_dprime = cfg.kappa_m * ((nbar_m + 1.0) * nu * nu + nbar_m * mu * mu);
    let gamma_prime = cfg.gamma * (2.0 * nbar_q + 1.0) / 4.0;
    let gamma_dprime = (cfg.gamma * (2.0 * nbar_q + 1.0) + 2.0 * cfg.gamma_phi) / 4.0;
    EffectiveRates {
        kappa_m_prime,
        kappa_m_dprime,
        gamma_prime,
        gamma_dprime,
        nbar_m,
        nbar_q,
    }
}

/// CD duration for one half-lattice step: t1 = sqrt(2 pi) e^r / chi
/// (lab-frame displacement chi t/(2 e^r) = sqrt(2 pi)/2).
pub fn half_lattice_time(chi: f64, r: f64) -> f64 {
    (TAU).sqrt() * r.exp() / chi
}

/// Residual distances of omega_p * t1 from the nearest multiple of 4 pi and
/// epsilon * t1 from the nearest multiple of 2 pi (the drive periodicity
/// conditions). Reported as-is; nothing here assumes they vanish.
pub fn phase_residuals(omega_p: f64, epsilon: f64, t1: f64) -> (f64, f64) {
    let fold = |x: f64, period: f64| {
        let m = x.rem_euclid(period);
        m.min(period - m)
    };
    (fold(omega_p * t1, 2.0 * TAU), fold(epsilon * t1, TAU))
}

/// Run the whole chain on a device configuration.
pub fn derive(cfg: &DeviceConfig) -> Result<EffectiveModel> {
    let r = squeezing_r(cfg.omega_m, cfg.xi)?;
    let (omega_m_prime, g_cm_prime) = bogoliubov_frame(cfg.omega_m, cfg.xi, cfg.g_cm)?;
    let elim = eliminate_cavity(cfg, omega_m_prime, g_cm_prime)?;
    let rates = effective_rates(cfg, r);
    let validity = ValidityReport {
        large_detuning_ok: elim.fn_coeffs.max_abs() < 0.2,
        strong_drive_ok: 2.0 * cfg.epsilon > 5.0 * elim.chi,
    };
    Ok(EffectiveModel {
        r,
        mu: r.cosh(),
        nu: r.sinh(),
        omega_m_prime,
        g_cm_prime,
        omega_q_prime: elim.omega_q_prime,
        omega_m_dprime: elim.omega_m_dprime,
        zeta: elim.zeta,
        chi: elim.chi,
        fn_coeffs: elim.fn_coeffs,
        kappa_m_prime: rates.kappa_m_prime,
        kappa_m_dprime: rates.kappa_m_dprime,
        gamma_prime: rates.gamma_prime,
        gamma_dprime: rates.gamma_dprime,
        nbar_m: rates.nbar_m,
        nbar_q: rates.nbar_q,
        nbar_c: nbar(cfg.omega_c, cfg.temperature),
        validity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Direct quadrature of the demagnetization integral
    /// Nx = (abc/2) ∫_0^∞ ds / ((s+a²)^{3/2} (s+b²)^{1/2} (s+c²)^{1/2}),
    /// after the substitution s = a²(1-w²)/w² which maps it to the smooth
    /// integral  b c ∫_0^1 w² dw / sqrt((a² + (b²-a²)w²)(a² + (c²-a²)w²)).
    fn demag_nx_quadrature(a: f64, b: f64, c: f64) -> f64 {
        let f = |w: f64| {
            let t1 = a * a + (b * b - a * a) * w * w;
            let t2 = a * a + (c * c - a * a) * w * w;
            w * w / (t1 * t2).sqrt()
        };
        // composite Simpson
        let n = 100_000;
        let h = 1.0 / n as f64;
        let mut acc = f(0.0) + f(1.0);
        for k in 1..n {
            let w = k as f64 * h;
            acc += f(w) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        b * c * acc * h / 3.0
    }

    #[test]
    fn demag_sphere_limit() {
        let geom = EllipsoidGeometry {
            a: 1.0 + 1e-9,
            b: 1.0,
            c: 1.0,
        };
        let (nx, ny, nz) = demag_tensor(&geom).unwrap();
        assert_abs_diff_eq!(nx, 1.0 / 3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(ny, 1.0 / 3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(nz, 1.0 / 3.0, epsilon = 1e-6);
    }

    #[test]
    fn demag_matches_quadrature() {
        // e = 0.9 prolate spheroid
        let a = 1.0_f64;
        let e: f64 = 0.9;
        let c = (1.0 - e * e).sqrt();
        let geom = EllipsoidGeometry { a, b: c, c };
        let (nx, _, _) = demag_tensor(&geom).unwrap();
        let oracle = demag_nx_quadrature(a, c, c);
        assert_abs_diff_eq!(nx, oracle, epsilon = 1e-8);
    }

    #[test]
    fn demag_needle_limit() {
        let e: f64 = 0.9999999;
        let c = (1.0 - e * e).sqrt();
        let geom = EllipsoidGeometry { a: 1.0, b: c, c };
        let (nx, ny, nz) = demag_tensor(&geom).unwrap();
        assert!(nx < 1e-5);
        assert_abs_diff_eq!(ny, 0.5, epsilon = 1e-4);
        assert_abs_diff_eq!(nz, 0.5, epsilon = 1e-4);
    }

    #[test]
    fn demag_trace_is_one() {
        for e in [0.01, 0.3, 0.6, 0.9, 0.99] {
            let c = (1.0_f64 - e * e).sqrt();
            let geom = EllipsoidGeometry { a: 1.0, b: c, c };
            let (nx, ny, nz) = demag_tensor(&geom).unwrap();
            assert_abs_diff_eq!(nx + ny + nz, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn demag_rejects_oblate() {
        let geom = EllipsoidGeometry {
            a: 0.5,
            b: 1.0,
            c: 1.0,
        };
        assert!(demag_tensor(&geom).is_err());
    }

    #[test]
    fn kittel_sphere_and_needle() {
        let mat = MaterialParams {
            gamma0: 1.76e11,
            mu0_ms: 0.2455,
            b0: 0.5,
        };
        // sphere: xi = 0, omega_m = gamma0 B0
        let sphere = EllipsoidGeometry {
            a: 1.0 + 1e-12,
            b: 1.0,
            c: 1.0,
        };
        let (om, xi) = kittel_params(&sphere, &mat).unwrap();
        assert_abs_diff_eq!(om / (mat.gamma0 * mat.b0), 1.0, epsilon = 1e-9);
        assert!(xi.abs() < 1e-6 * om.abs());
        // needle limit: Nx - Ny -> -1/2, so xi -> -gamma0 mu0Ms / 4
        let e: f64 = 0.99999995;
        let c = (1.0 - e * e).sqrt();
        let needle = EllipsoidGeometry { a: 1.0, b: c, c };
        let (_, xi) = kittel_params(&needle, &mat).unwrap();
        assert_abs_diff_eq!(
            xi,
            -mat.gamma0 * mat.mu0_ms / 4.0,
            epsilon = 1e-3 * mat.gamma0 * mat.mu0_ms
        );
        // direct re-evaluation at an arbitrary shape
        let geom = EllipsoidGeometry {
            a: 2.0,
            b: 0.7,
            c: 0.7,
        };
        let (nx, ny, nz) = demag_tensor(&geom).unwrap();
        let (om, xi) = kittel_params(&geom, &mat).unwrap();
        assert_abs_diff_eq!(
            om,
            mat.gamma0 * mat.b0 + mat.gamma0 * mat.mu0_ms * (1.0 - 3.0 * nz) / 2.0,
            epsilon = 1e-3
        );
        assert_abs_diff_eq!(
            xi,
            mat.gamma0 * mat.mu0_ms * (nx - ny) / 2.0,
            epsilon = 1e-3
        );
    }

    #[test]
    fn squeezing_parameter() {
        assert_abs_diff_eq!(squeezing_r(1.0e9, 0.0).unwrap(), 0.0, epsilon = 1e-15);
        let cfg = DeviceConfig::reference();
        let r = squeezing_r(cfg.omega_m, cfg.xi).unwrap();
        assert!((r - 1.000).abs() < 0.001, "r = {r}");
        // both algebraic forms agree: exp(4r) = (w+xi)/(w-xi)
        for (w, xi) in [(3.0, 1.0), (10.0, 7.5), (2.0, -1.3)] {
            let r = squeezing_r(w, xi).unwrap();
            assert_abs_diff_eq!((4.0 * r).exp(), (w + xi) / (w - xi), epsilon = 1e-12);
        }
        assert!(squeezing_r(1.0, 1.0).is_err());
        assert!(squeezing_r(1.0, -1.2).is_err());
    }

    #[test]
    fn bogoliubov_outputs() {
        let cfg = DeviceConfig::reference();
        let (wmp, gp) = bogoliubov_frame(cfg.omega_m, cfg.xi, cfg.g_cm).unwrap();
        assert!(
            (wmp / TAU - 4.788e9).abs() < 1e6,
            "omega_m' = {} Hz",
            wmp / TAU
        );
        assert!((gp / TAU - 37.9e6).abs() < 0.1e6, "g_cm' = {} Hz", gp / TAU);
        // xi = 0 leaves both untouched
        let (w0, g0) = bogoliubov_frame(5.0e9, 0.0, 1.0e8).unwrap();
        assert_abs_diff_eq!(w0, 5.0e9, epsilon = 1e-3);
        assert_abs_diff_eq!(g0, 1.0e8, epsilon = 1e-6);
    }

    #[test]
    fn cavity_elimination_reference_point() {
        let cfg = DeviceConfig::reference();
        let (wmp, gp) = bogoliubov_frame(cfg.omega_m, cfg.xi, cfg.g_cm).unwrap();
        let elim = eliminate_cavity(&cfg, wmp, gp).unwrap();
        assert!(
            (elim.chi / TAU - 7.55e6).abs() < 0.02e6,
            "chi/2pi = {} MHz",
            elim.chi / TAU / 1e6
        );
        // the eliminated qubit and magnon lines sit close to each other
        assert!((elim.omega_q_prime / TAU - 4.784e9).abs() < 1e6);
        assert!((elim.omega_m_dprime / TAU - 4.784e9).abs() < 1e6);
        assert!(elim.zeta > 0.0);
        assert!(elim.fn_coeffs.max_abs() < 0.2);
    }

    #[test]
    fn cavity_elimination_limits() {
        let mut cfg = DeviceConfig::reference();
        cfg.g_cq = 0.0;
        let (wmp, gp) = bogoliubov_frame(cfg.omega_m, cfg.xi, cfg.g_cm).unwrap();
        let elim = eliminate_cavity(&cfg, wmp, gp).unwrap();
        assert_abs_diff_eq!(elim.chi, 0.0, epsilon = 1e-20);
        assert_abs_diff_eq!(elim.omega_q_prime, cfg.omega_q, epsilon = 1e-6);
        // far-detuned cavity: chi -> 2 g_cq g_cm' / omega_c
        let mut far = DeviceConfig::reference();
        far.omega_c = TAU * 5.0e12;
        let elim = eliminate_cavity(&far, wmp, gp).unwrap();
        let asym = 2.0 * far.g_cq * gp / far.omega_c;
        assert!((elim.chi - asym).abs() / asym < 5e-6, "chi vs asymptote");
        // zero detuning is a hard error
        let mut bad = DeviceConfig::reference();
        bad.omega_c = bad.omega_q;
        assert!(eliminate_cavity(&bad, wmp, gp).is_err());
    }

    #[test]
    fn chi_symmetric_under_subsystem_swap() {
        // chi is symmetric under (omega_m', g_cm') <-> (omega_q, g_cq)
        let cfg = DeviceConfig::reference();
        let (wmp, gp) = bogoliubov_frame(cfg.omega_m, cfg.xi, cfg.g_cm).unwrap();
        let chi1 = eliminate_cavity(&cfg, wmp, gp).unwrap().chi;
        let mut swapped = cfg;
        swapped.omega_q = wmp;
        swapped.g_cq = gp;
        let chi2 = eliminate_cavity(&swapped, cfg.omega_q, cfg.g_cq)
            .unwrap()
            .chi;
        assert_abs_diff_eq!(chi1 / chi2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn thermal_occupation() {
        assert_abs_diff_eq!(nbar(TAU * 4.784e9, 0.0), 0.0, epsilon = 1e-300);
        let n = nbar(TAU * 4.784e9, 0.010);
        assert!((n / 1.069e-10 - 1.0).abs() < 0.01, "nbar = {n:.4e}");
    }

    #[test]
    fn effective_rate_limits() {
        let mut cfg = DeviceConfig::reference();
        cfg.temperature = 0.0;
        let rates = effective_rates(&cfg, 0.0);
        assert_abs_diff_eq!(rates.kappa_m_prime, cfg.kappa_m, epsilon = 1e-9);
        assert_abs_diff_eq!(rates.kappa_m_dprime, 0.0, epsilon = 1e-12);
        // r = 1, nbar = 0: kappa''/kappa' = tanh²(1)
        let rates = effective_rates(&cfg, 1.0);
        assert_abs_diff_eq!(
            rates.kappa_m_dprime / rates.kappa_m_prime,
            1.0_f64.tanh().powi(2),
            epsilon = 1e-12
        );
        // qubit rates at nbar_q ~ 0
        assert_abs_diff_eq!(rates.gamma_prime, cfg.gamma / 4.0, epsilon = 1e-6);
        assert_abs_diff_eq!(
            rates.gamma_dprime,
            (cfg.gamma + 2.0 * cfg.gamma_phi) / 4.0,
            epsilon = 1e-6
        );
    }

    #[test]
    fn half_lattice_timing() {
        let cfg = DeviceConfig::reference();
        let model = derive(&cfg).unwrap();
        let t1 = half_lattice_time(model.chi, model.r);
        assert!((t1 - 143.8e-9).abs() < 0.5e-9, "t1 = {} ns", t1 * 1e9);
        // r = 0, chi = sqrt(2 pi) rad/s -> exactly 1 s
        assert_abs_diff_eq!(half_lattice_time(TAU.sqrt(), 0.0), 1.0, epsilon = 1e-12);
        // doubling chi halves t1
        assert_abs_diff_eq!(
            half_lattice_time(2.0 * model.chi, model.r) * 2.0,
            t1,
            epsilon = 1e-18
        );
    }

    #[test]
    fn derive_chain_consistency() {
        let model = derive(&DeviceConfig::reference()).unwrap();
        assert_abs_diff_eq!(
            model.mu * model.mu - model.nu * model.nu,
            1.0,
            epsilon = 1e-12
        );
        assert!(model.validity.large_detuning_ok);
        assert!(model.validity.strong_drive_ok);
        // nu_q is the largest elimination coefficient at this operating point
        assert!((model.fn_coeffs.nu_q - 0.193).abs() < 0.005);
        assert!(model.nbar_m < 1e-30);
        assert!(model.nbar_q < 1e-9);
    }

    #[test]
    fn phase_residuals_reported() {
        let cfg = DeviceConfig::reference();
        let model = derive(&cfg).unwrap();
        let t1 = half_lattice_time(model.chi, model.r);
        let (rp, re) = phase_residuals(cfg.omega_p, cfg.epsilon, t1);
        assert!((0.0..=2.0 * TAU).contains(&rp));
        assert!((0.0..=TAU).contains(&re));
        // exact multiples fold to zero
        let (zp, ze) = phase_residuals(2.0 * TAU / 1e-9 * 3.0, TAU / 1e-9 * 2.0, 1e-9);
        assert_abs_diff_eq!(zp, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(ze, 0.0, epsilon = 1e-6);
    }
}
