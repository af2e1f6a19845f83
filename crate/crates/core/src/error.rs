use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spin {0} is not a positive half-integer")]
    InvalidSpin(f64),

    #[error("Bargmann index k = {0} must be positive and finite")]
    InvalidBargmannIndex(f64),

    #[error("truncation dimension {found} is below the minimum {min}")]
    TruncationTooSmall { found: usize, min: usize },

    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),

    #[error("coefficients are not Hermitian: {0}")]
    NonHermitian(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coefficients of kind `{coefficients}` do not drive representation `{rep}`")]
    IncompatibleCoefficients {
        coefficients: &'static str,
        rep: &'static str,
    },

    #[error("trajectory left the unit disc at t = {t} (|z| = {modulus})")]
    DomainExit { t: f64, modulus: f64 },

    #[error("projective chart became singular at t = {t} (|w0|/|w| = {ratio:e})")]
    ChartSingularity { t: f64, ratio: f64 },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("local error estimate {estimate:e} exceeds budget {budget:e} at t = {t}")]
    ErrorBudget { t: f64, estimate: f64, budget: f64 },

    #[error("time grid must be strictly increasing with at least two points")]
    InvalidGrid,

    #[error("point {0} lies outside the open unit disc")]
    OutsideDisc(num_complex::Complex64),

    #[error("tail mass {mass:e} exceeds tolerance {tol:e} at truncation {trunc}")]
    TailTolerance { mass: f64, tol: f64, trunc: usize },

    #[error(
        "truncation leakage at t = {t}: tail mass {mass:e} above {threshold:e} \
         (dimension {dim}); increase trunc_dim"
    )]
    TruncationLeakage {
        t: f64,
        mass: f64,
        threshold: f64,
        dim: usize,
    },

    #[error("Mobius denominator {magnitude:e} is numerically degenerate")]
    MobiusDegenerate { magnitude: f64 },

    #[error("Wronskian normalization violated: Im(eps* deps) = {0}, expected 1")]
    WronskianNormalization(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
