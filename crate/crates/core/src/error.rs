use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (relative deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("unitary does not have unit determinant (|det - 1| = {deviation:.3e})")]
    NotSpecial { deviation: f64 },

    #[error("Hamiltonian has nonzero trace {trace:.3e}")]
    NonzeroTrace { trace: f64 },

    #[error("propagator carries determinant phase {phase:.6e}; Hamiltonian is not traceless")]
    DeterminantPhase { phase: f64 },

    #[error("Hermitian eigensolver failed to converge")]
    EigensolverFailure,

    #[error("logarithm branch is ambiguous: eigenphase {phase:.12} is antipodal{}", fmt_time(.time))]
    BranchAmbiguity { phase: f64, time: Option<f64> },

    #[error("background Hamiltonian too strong: tr(H0^2) = {wind:.6}")]
    WindTooStrong { wind: f64 },

    #[error("target equals initial gate; transit time is zero")]
    IdentityTarget,

    #[error("derivative system is singular at lambda = {lambda:.6} (condition estimate {condition:.3e})")]
    SingularSystem { lambda: f64, condition: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no root of the boundary relation was found")]
    NoRoot,

    #[error("variation field does not vanish at the endpoints (max norm {norm:.3e})")]
    EndpointViolation { norm: f64 },

    #[error("Randers norm radicand is negative ({radicand:.3e})")]
    InconsistentBranch { radicand: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

fn fmt_time(time: &Option<f64>) -> String {
    match time {
        Some(t) => format!(" at T = {t:.12}"),
        None => String::new(),
    }
}

impl Error {
    /// Stable machine-readable code used in JSON error objects.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "not_square",
            Error::NonFinite => "non_finite",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::NotUnitary { .. } => "not_unitary",
            Error::NotSpecial { .. } => "not_special",
            Error::NonzeroTrace { .. } => "nonzero_trace",
            Error::DeterminantPhase { .. } => "determinant_phase",
            Error::EigensolverFailure => "eigensolver_failure",
            Error::BranchAmbiguity { .. } => "branch_ambiguity",
            Error::WindTooStrong { .. } => "wind_too_strong",
            Error::IdentityTarget => "identity_target",
            Error::SingularSystem { .. } => "singular_system",
            Error::NoConvergence { .. } => "no_convergence",
            Error::NoRoot => "no_root",
            Error::EndpointViolation { .. } => "endpoint_violation",
            Error::InconsistentBranch { .. } => "inconsistent_branch",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Parse(_) => "parse_error",
            Error::Io(_) => "io_error",
        }
    }

    /// True for errors caused by malformed input rather than solver failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NotSquare { .. }
                | Error::NonFinite
                | Error::DimensionMismatch { .. }
                | Error::NotHermitian { .. }
                | Error::NotUnitary { .. }
                | Error::NotSpecial { .. }
                | Error::NonzeroTrace { .. }
                | Error::WindTooStrong { .. }
                | Error::InvalidArgument(_)
                | Error::Parse(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
