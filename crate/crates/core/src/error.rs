use std::fmt;

use thiserror::Error;

/// One violated invariant in a device description.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    /// Dotted path of the offending field, e.g. `electrodes[1].b_m`.
    pub path: String,
    pub message: String,
}

/// Every invariant violation found while validating a [`DeviceConfig`](crate::DeviceConfig).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigError {
    pub issues: Vec<Issue>,
}

impl ConfigError {
    pub(crate) fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue {
            path: path.into(),
            message: message.into(),
        });
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}: {}", issue.path, issue.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration:\n{0}")]
    Config(#[from] ConfigError),

    #[error("cannot parse configuration: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("plate touches the electrode{} (residual gap {gap:.3e} m)", fmt_location(*.x))]
    Contact { x: Option<f64>, gap: f64 },

    #[error("capacitance torque integral is not positive ({0:e} F/rad); electrode geometry cannot drive the mirror")]
    NonPositiveTorque(f64),

    #[error("beam system is singular")]
    SingularSystem,

    #[error("x = {x:e} m lies outside the beam axis [0, {length:e}] m")]
    OutOfDomain { x: f64, length: f64 },

    #[error("{0}")]
    Usage(String),

    #[error("invalid theta grid: {0}")]
    InvalidGrid(String),

    #[error("no interior voltage maximum below the geometric limit; the {model} curve keeps rising until theta = {theta:.6e} rad")]
    NoPullIn { model: &'static str, theta: f64 },

    #[error("voltage {voltage} V exceeds the pull-in voltage {pullin} V; no static equilibrium exists")]
    BeyondPullIn { voltage: f64, pullin: f64 },

    #[error("fixed-point iteration did not converge at theta = {theta:e} rad after {iterations} iterations")]
    NotConverged { theta: f64, iterations: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn fmt_location(x: Option<f64>) -> String {
    match x {
        Some(x) => format!(" at x = {x:.6e} m"),
        None => String::new(),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
