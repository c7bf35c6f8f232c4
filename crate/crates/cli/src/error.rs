//! Error classification and the exit-code policy.
//!
//! Exit codes: 0 success, 2 configuration/usage error (unreadable or invalid
//! files, bad keys, bad dimensions), 3 physics-validity hard failure
//! (parametric instability, degenerate detunings, impossible measurement
//! outcomes), 4 numerical-drift failure reported by the integrator.

use std::fmt;

use magnon_gkp::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Physics(String),
    Numerics(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Physics(_) => 3,
            CliError::Numerics(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Physics(m) => write!(f, "physics error: {m}"),
            CliError::Numerics(m) => write!(f, "numerics error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match &e {
            CoreError::Instability { .. }
            | CoreError::ZeroDetuning(_)
            | CoreError::UnsupportedShape(_)
            | CoreError::ImpossibleOutcome(_)
            | CoreError::ZeroNorm(_) => CliError::Physics(e.to_string()),
            CoreError::DriftExceeded(_) | CoreError::NonFinite(_) => {
                CliError::Numerics(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_errors_map_to_the_documented_codes() {
        let phys: CliError = CoreError::Instability {
            omega_m: 1.0,
            xi: 2.0,
        }
        .into();
        assert_eq!(phys.exit_code(), 3);
        let drift: CliError = CoreError::DriftExceeded("trace".into()).into();
        assert_eq!(drift.exit_code(), 4);
        let cfg: CliError = CoreError::InvalidArgument("bad".into()).into();
        assert_eq!(cfg.exit_code(), 2);
        let dim: CliError = CoreError::BadDim(1).into();
        assert_eq!(dim.exit_code(), 2);
    }
}
