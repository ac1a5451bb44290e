use thiserror::Error;

/// Errors raised by the geometric and transport routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("metric tensor is singular (|det g| = {det:e})")]
    SingularMetric { det: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("vector is not future-directed timelike: {0}")]
    NotTimelike(String),

    #[error("covector lies outside the polar cone")]
    OutsidePolarCone,

    #[error("geodesic left the chart at t = {t}")]
    BlowUp { t: f64 },

    #[error("geodesic tangent left the timelike cone at t = {t}")]
    CausalityLost { t: f64 },

    #[error("shooting failed: no seed converged and causality is ambiguous")]
    ShootingFailure,

    #[error("no maximizing geodesic between the given points")]
    NoMaximizer,

    #[error("no causal coupling exists between the measures")]
    NoCausalCoupling,

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("Jacobi matrix became singular at t = {t} (conjugate point)")]
    SingularJacobi { t: f64 },

    #[error("parallel frame degenerated (pairing error {err:e})")]
    FrameDegeneracy { err: f64 },

    #[error("transport Jacobian is not positive ({det:e})")]
    NegativeJacobian { det: f64 },

    #[error("measures are not q-separated: l = {l} at witness pair")]
    NotQSeparated { l: f64 },

    #[error("point {0} sees no causal partner in the transform")]
    NoCausalPartner(usize),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case identifier of the variant, for machine-readable
    /// reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::SingularMetric { .. } => "singular_metric",
            Error::NoConvergence { .. } => "no_convergence",
            Error::NotTimelike(_) => "not_timelike",
            Error::OutsidePolarCone => "outside_polar_cone",
            Error::BlowUp { .. } => "blow_up",
            Error::CausalityLost { .. } => "causality_lost",
            Error::ShootingFailure => "shooting_failure",
            Error::NoMaximizer => "no_maximizer",
            Error::NoCausalCoupling => "no_causal_coupling",
            Error::SizeLimit(_) => "size_limit",
            Error::Parameter(_) => "parameter",
            Error::SingularJacobi { .. } => "singular_jacobi",
            Error::FrameDegeneracy { .. } => "frame_degeneracy",
            Error::NegativeJacobian { .. } => "negative_jacobian",
            Error::NotQSeparated { .. } => "not_q_separated",
            Error::NoCausalPartner(_) => "no_causal_partner",
            Error::Unsupported(_) => "unsupported",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
