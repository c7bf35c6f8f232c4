//! Simulation of GKP logical-state preparation on a magnon (Kittel) mode.
//!
//! The pipeline mirrors the physical derivation chain: device-level
//! parameters (`params`) feed an effective conditional-displacement model
//! whose dynamics (`dynamics`) drive measurement-based preparation
//! sequences (`protocol`); the resulting oscillator states are scored by
//! phase-space and logical-qubit diagnostics (`analysis`). All operators
//! live in a truncated Fock space (`hilbert`).

pub mod analysis;
pub mod dynamics;
pub mod hilbert;
pub mod params;
pub mod protocol;

use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("fock dimension {0} too small; need dim >= 2")]
    BadDim(usize),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("impossible measurement outcome (probability {0:.3e})")]
    ImpossibleOutcome(f64),
    #[error("zero-norm state: {0}")]
    ZeroNorm(String),
    #[error("unsupported ellipsoid shape: {0}")]
    UnsupportedShape(String),
    #[error("parametric instability: |xi| = {xi:.6e} rad/s >= omega_m = {omega_m:.6e} rad/s")]
    Instability { omega_m: f64, xi: f64 },
    #[error("zero detuning: {0}")]
    ZeroDetuning(String),
    #[error("numerical drift exceeded: {0}")]
    DriftExceeded(String),
    #[error("non-finite value during integration at t = {0:.6e} s")]
    NonFinite(f64),
    #[error("memory guard: total dimension {total} exceeds cap {cap}")]
    MemoryGuard { total: usize, cap: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
