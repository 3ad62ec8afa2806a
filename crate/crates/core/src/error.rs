use thiserror::Error;

/// Errors produced anywhere in the reconstruction, certification and forward pipelines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spectral data: {0}")]
    Validation(String),

    #[error("spectrum below ground state asymptotics: lambda[{index}] = {value} < 0")]
    NegativeEigenvalue { index: usize, value: f64 },

    #[error("GLM system singular at x = {x}")]
    SingularSystem { x: f64 },

    #[error("K(x, y) is only defined for 0 <= y <= x <= pi (got x = {x}, y = {y})")]
    Domain { x: f64, y: f64 },

    #[error("grid too small: m = {0}, need m >= 8")]
    GridTooSmall(usize),

    #[error("matrix numerically singular: no k <= {cap} makes A*A - k^-2 I positive definite")]
    NumericallySingular { cap: u64 },

    #[error("Riesz constant search exceeded J cap {cap} (bound M inconsistent with data?)")]
    RieszSearchExhausted { cap: usize },

    #[error("certificate requires Ω_{{0,M}}: {0}")]
    NotInOmega0M(String),

    #[error("N below certified threshold N_0: N = {n}, N_0 = {n0:.6e}")]
    BelowThreshold { n: usize, n0: f64 },

    #[error("integrator step size underflow at x = {x} (lambda = {lambda})")]
    StepUnderflow { x: f64, lambda: f64 },

    #[error("eigenvalue search failed for index {index}: {reason}")]
    EigenSearch { index: usize, reason: String },

    #[error(
        "finite-rank detection exceeded {cap} reads without {n_tilde} consecutive trivial pairs"
    )]
    ReadCapExceeded { cap: usize, n_tilde: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("eigenvalue list must be sorted ascending (violated at index {0})")]
    Unsorted(usize),

    #[error("{0}")]
    Io(String),
}

/// Coarse classification used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    CertificateRefused,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Validation(_)
            | Error::NegativeEigenvalue { .. }
            | Error::Domain { .. }
            | Error::GridTooSmall(_)
            | Error::LengthMismatch { .. }
            | Error::Unsorted(_)
            | Error::ReadCapExceeded { .. }
            | Error::Io(_) => ErrorKind::Validation,
            Error::NotInOmega0M(_) | Error::BelowThreshold { .. } => ErrorKind::CertificateRefused,
            Error::SingularSystem { .. }
            | Error::NumericallySingular { .. }
            | Error::RieszSearchExhausted { .. }
            | Error::StepUnderflow { .. }
            | Error::EigenSearch { .. } => ErrorKind::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
