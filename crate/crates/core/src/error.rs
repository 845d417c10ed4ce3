use thiserror::Error;

/// Errors raised by the physics and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid quantum numbers: {0}")]
    InvalidState(String),

    #[error("no quantum-defect series for l={l}, j={j}")]
    MissingSeries { l: u32, j: String },

    #[error("dipole transition {from} -> {to} is forbidden ({reason})")]
    SelectionRule { from: String, to: String, reason: &'static str },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid parameter `{name}`: {msg}")]
    InvalidParameter { name: &'static str, msg: String },

    #[error("steady state is ambiguous: null space of the Liouvillian has dimension > 1")]
    AmbiguousSteadyState,

    #[error("steady-state residual {residual:e} exceeds {tolerance:e} (relative to |L|)")]
    SteadyStateResidual { residual: f64, tolerance: f64 },

    #[error("time integration failed: step size underflow at t = {t:e} s")]
    IntegrationFailure { t: f64 },

    #[error("velocity quadrature not converged: achieved {achieved:e}, required {required:e}")]
    VelocityConvergence { achieved: f64, required: f64 },

    #[error("no peak above the prominence threshold (EIT suppressed)")]
    SuppressedPeak,

    #[error("fewer than two peaks ({found}) - no splitting")]
    NoSplitting { found: usize },

    /// Another error tagged with the scenario cell it came from.
    #[error("{context}: {source}")]
    At { context: String, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, msg: impl Into<String>) -> Self {
        Error::InvalidParameter { name, msg: msg.into() }
    }

    pub fn at(self, context: impl Into<String>) -> Self {
        Error::At { context: context.into(), source: Box::new(self) }
    }

    /// The innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::At { source, .. } => source.root(),
            e => e,
        }
    }
}
