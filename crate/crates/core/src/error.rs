use thiserror::Error;

use crate::fock::ModeCutoff;
use crate::lindblad::StepDiagnostics;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    /// The Poisson tail of a coherent amplitude beyond the cutoff exceeds the
    /// truncation tolerance.
    #[error("cutoff {cutoff} too small for amplitude |alpha| = {amplitude}: Poisson tail {tail:e} exceeds {tol:e}")]
    CutoffTooSmall {
        amplitude: f64,
        cutoff: usize,
        tail: f64,
        tol: f64,
    },

    #[error("degenerate state: squared norm {norm_sqr:e} vanishes")]
    DegenerateState { norm_sqr: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid channel parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch {
        expected: ModeCutoff,
        found: ModeCutoff,
    },

    #[error("finite-difference step {h:e} is too small for double precision")]
    StepSize { h: f64 },

    #[error("integration failed at t = {t}: {reason} ({diagnostics})")]
    IntegrationFailure {
        t: f64,
        reason: String,
        diagnostics: StepDiagnostics,
    },

    #[error("Q-function value {value:e} below the non-negativity floor")]
    NegativeQ { value: f64 },
}
