//! Numerical functionals of density operators.

use std::f64::consts::PI;

use crate::channel::{ChannelParams, PhasePoint, QPoint};
use crate::error::{Error, Result};
use crate::fock::{
    coherent_ket_unchecked, displacement, poisson_tail, superposition_to_density,
    CoherentSuperposition, DensityOperator, ModeCutoff,
};
use crate::lindblad::{evolve, Generator, SimConfig};
use crate::{CMatrix, C64};

/// Verdict threshold on the trace distance for a decoherence-free state.
pub const DFS_TOL: f64 = 1e-6;

/// Floor below which a Q-function value counts as negative.
pub const Q_FLOOR: f64 = -1e-12;

/// Largest Poisson tail of `|lambda|` (or `|delta|`) beyond the cutoff
/// accepted by [`chi_numeric`] and [`q_numeric`].
///
/// Truncated matrix elements of `D(lambda)` and of `|delta>` are exact, so
/// this only rejects evaluation points far outside the phase-space region the
/// basis describes.
pub const PHASE_POINT_TOL: f64 = 1e-6;

fn check_point(z: C64, d: usize) -> Result<()> {
    let tail = poisson_tail(z.norm_sqr(), d);
    if tail > PHASE_POINT_TOL {
        return Err(Error::CutoffTooSmall {
            amplitude: z.norm(),
            cutoff: d,
            tail,
            tol: PHASE_POINT_TOL,
        });
    }
    Ok(())
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).unscale(2.0)
}

pub(crate) fn min_eigenvalue_matrix(m: &CMatrix) -> f64 {
    hermitian_part(m).symmetric_eigenvalues().min()
}

/// Smallest eigenvalue of the hermitian part of `rho`.
pub fn min_eigenvalue(rho: &DensityOperator) -> f64 {
    min_eigenvalue_matrix(rho.matrix())
}

/// `Tr rho^2` as the squared Frobenius norm.
pub fn purity_numeric(rho: &DensityOperator) -> f64 {
    rho.matrix().norm_squared()
}

/// `Tr[rho0 rho_t]`; the imaginary rounding residue is dropped.
pub fn overlap(rho0: &DensityOperator, rhot: &DensityOperator) -> Result<f64> {
    rho0.ensure_cutoff(rhot.cutoff())?;
    let a = rho0.matrix();
    let b = rhot.matrix();
    // Tr[AB] = sum_ij A_ij B_ji
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(acc.re)
}

/// `Tr[(D(l1) (x) D(l2)) rho]`.
pub fn chi_numeric(rho: &DensityOperator, pt: &PhasePoint) -> Result<C64> {
    let cut = rho.cutoff();
    check_point(pt.lambda1, cut.d1())?;
    check_point(pt.lambda2, cut.d2())?;
    let d1m = displacement(pt.lambda1, cut.d1())?;
    let d2m = displacement(pt.lambda2, cut.d2())?;
    let (d1, d2) = (cut.d1(), cut.d2());
    let m = rho.matrix();
    let mut total = C64::new(0.0, 0.0);
    for n1 in 0..d1 {
        for m1 in 0..d1 {
            let outer = d1m[(n1, m1)];
            if outer == C64::new(0.0, 0.0) {
                continue;
            }
            // Tr(D2 B) for the (m1, n1) block B of rho.
            let mut inner = C64::new(0.0, 0.0);
            for n2 in 0..d2 {
                for m2 in 0..d2 {
                    inner += d2m[(n2, m2)] * m[(m1 * d2 + m2, n1 * d2 + n2)];
                }
            }
            total += outer * inner;
        }
    }
    Ok(total)
}

/// `<d1, d2| rho |d1, d2> / pi^2`.
pub fn q_numeric(rho: &DensityOperator, q: &QPoint) -> Result<f64> {
    let cut = rho.cutoff();
    check_point(q.delta1, cut.d1())?;
    check_point(q.delta2, cut.d2())?;
    let k = coherent_ket_unchecked(q.delta1, cut.d1()).kronecker(&coherent_ket_unchecked(q.delta2, cut.d2()));
    let value = k.dotc(&(rho.matrix() * &k)).re / (PI * PI);
    if value < Q_FLOOR {
        return Err(Error::NegativeQ { value });
    }
    Ok(value)
}

/// `1/2 sum |eig(rho - sigma)|`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    rho.ensure_cutoff(sigma.cutoff())?;
    let diff = hermitian_part(&(rho.matrix() - sigma.matrix()));
    Ok(0.5 * diff.symmetric_eigenvalues().iter().map(|x| x.abs()).sum::<f64>())
}

/// Trace distance of the correlated-channel output to its input over time.
#[derive(Debug, Clone, PartialEq)]
pub struct DfsReport {
    pub times: Vec<f64>,
    pub trace_distance: Vec<f64>,
    pub max_deviation: f64,
    pub decoherence_free: bool,
}

/// Evolves `input` under the common-reservoir generator and measures how far
/// it moves from the initial state.
pub fn dfs_deviation(
    input: &CoherentSuperposition,
    p: &ChannelParams,
    grid: &[f64],
    config: &SimConfig,
    cutoff: ModeCutoff,
) -> Result<DfsReport> {
    let rho0 = superposition_to_density(input, cutoff)?;
    let traj = evolve(&rho0, Generator::Correlated, p, config, grid)?;
    let trace_distance = traj
        .states
        .iter()
        .map(|s| trace_distance(s, &rho0))
        .collect::<Result<Vec<_>>>()?;
    let max_deviation = trace_distance.iter().copied().fold(0.0, f64::max);
    Ok(DfsReport {
        times: traj.grid,
        trace_distance,
        max_deviation,
        decoherence_free: max_deviation < DFS_TOL,
    })
}
