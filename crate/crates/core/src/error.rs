use thiserror::Error;

/// Error type for every fallible operation in the crate.
///
/// Real-valued payloads are carried as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("gapless mode at k = {k} (Lambda_k = {lam:e})")]
    Singular { k: f64, lam: f64 },

    #[error("degenerate ground state (gap {gap:e})")]
    Degenerate { gap: f64 },

    #[error("system size L = {l} exceeds the dense limit {max}")]
    SizeLimit { l: usize, max: usize },

    #[error("quadrature failed to converge on [{a}, {b}]: estimate {estimate:e}, error {error:e} after {evaluations} evaluations")]
    Quadrature {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("maximum at bracket edge {at} of [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64, at: f64 },

    #[error("null kernel: nothing to classify")]
    NullKernel,

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("shift exponent undefined: h*_L equals J exactly at L = {l} (use gamma != 1)")]
    ExponentUndefined { l: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("stage {stage}: {source}")]
    Stage { stage: u8, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;
