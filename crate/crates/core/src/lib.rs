//! Two electromagnetic modes damped by a common thermal reservoir.
//!
//! The crate has two independent routes to the same physics:
//!
//! * [`lindblad`] integrates the correlated master equation (jump operator
//!   `a1 + a2`) and the independent-reservoir baseline in a truncated
//!   two-mode Fock space;
//! * [`channel`] evaluates the closed-form results: the zero-temperature map
//!   on coherent dyads, the characteristic function, the Q-function, and the
//!   purity and fidelity formulas.
//!
//! [`observables`] turns integrated density operators into numbers that can be
//! compared against [`channel`], and [`fock`] provides the shared linear
//! algebra (ladder operators, displacements, coherent and entangled coherent
//! states, coherent-dyad expansions).
//!
//! Basis convention: the product state `|n1, n2>` lives at flat index
//! `n1 * d2 + n2` (mode-1-major).

pub mod channel;
pub mod error;
pub mod fock;
pub mod lindblad;
pub mod observables;
mod sparse;

pub use num_complex::Complex64 as C64;

pub use channel::{ChannelParams, PhasePoint, QPoint};
pub use error::{Error, Result};
pub use fock::{
    CoherentSuperposition, CoherentTerm, DensityOperator, DyadExpansion, DyadTerm, ModeCutoff,
    Sign, StateVector,
};
pub use lindblad::{Generator, SimConfig, StepDiagnostics, Trajectory};
pub use observables::DfsReport;

/// Complex matrix type used for every operator in the crate.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Complex column vector type used for kets.
pub type CVector = nalgebra::DVector<C64>;

/// Largest entry modulus of a complex matrix or vector.
pub fn max_abs_entry<R, C, S>(m: &nalgebra::Matrix<C64, R, C, S>) -> f64
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::RawStorage<C64, R, C>,
{
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
