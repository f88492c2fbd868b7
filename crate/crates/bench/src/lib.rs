//! Shared inputs for the benchmarks.

use commonbath::fock::{superposition_to_density, CoherentSuperposition, ModeCutoff};
use commonbath::{ChannelParams, DensityOperator, C64};

/// Coherent state `|0.8, 0.3i>` at a square cutoff.
pub fn coherent_state(d: usize) -> DensityOperator {
    let cut = ModeCutoff::square(d).expect("positive cutoff");
    let psi = CoherentSuperposition::coherent(C64::new(0.8, 0.0), C64::new(0.0, 0.3));
    superposition_to_density(&psi, cut).expect("cutoff large enough")
}

pub fn warm_channel() -> ChannelParams {
    ChannelParams::new(1.0, 0.5).expect("valid parameters")
}
