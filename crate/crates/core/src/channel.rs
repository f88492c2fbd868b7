//! Closed-form results for the common-reservoir channel.
//!
//! Inputs are finite coherent-dyad expansions ([`DyadExpansion`]); every
//! formula acts term by term. With `a_pm = a1 +- a2` and `b_pm = b1 +- b2` for
//! a dyad `|a1, a2><b1, b2| / <b1, b2|a1, a2>`, the sum mode `a_+` is damped at
//! rate `Gamma` and picks up the thermal noise `N(t) = N0 (1 - e^{-2 Gamma t})`,
//! while the difference mode `a_-` is untouched.

use crate::error::{Error, Result};
use crate::fock::{DyadExpansion, DyadTerm};
use crate::C64;

/// Smallest finite-difference step accepted by [`chi_pde_residual`].
pub const MIN_FD_STEP: f64 = 1e-6;

/// Decay rate and reservoir occupancy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    gamma: f64,
    n0: f64,
}

impl ChannelParams {
    pub fn new(gamma: f64, n0: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParams(format!(
                "decay rate must be positive and finite, got {gamma}"
            )));
        }
        if !(n0.is_finite() && n0 >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "reservoir occupancy must be non-negative and finite, got {n0}"
            )));
        }
        Ok(ChannelParams { gamma, n0 })
    }

    /// Occupancy from the ratio `hbar omega0 / kT` via [`planck_occupancy`].
    pub fn from_temperature_ratio(gamma: f64, ratio: f64) -> Result<Self> {
        Self::new(gamma, planck_occupancy(ratio)?)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn with_n0(&self, n0: f64) -> Result<Self> {
        Self::new(self.gamma, n0)
    }
}

/// Complex pair `(l1, l2)` at which the characteristic function is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub lambda1: C64,
    pub lambda2: C64,
}

impl PhasePoint {
    pub fn new(lambda1: C64, lambda2: C64) -> Self {
        PhasePoint { lambda1, lambda2 }
    }

    /// Point with the given sum and difference coordinates.
    pub fn from_plus_minus(plus: C64, minus: C64) -> Self {
        PhasePoint {
            lambda1: (plus + minus) / 2.0,
            lambda2: (plus - minus) / 2.0,
        }
    }

    pub fn lambda_plus(&self) -> C64 {
        self.lambda1 + self.lambda2
    }

    pub fn lambda_minus(&self) -> C64 {
        self.lambda1 - self.lambda2
    }
}

/// Complex pair `(d1, d2)` at which the Q-function is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QPoint {
    pub delta1: C64,
    pub delta2: C64,
}

impl QPoint {
    pub fn new(delta1: C64, delta2: C64) -> Self {
        QPoint { delta1, delta2 }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// Bose-Einstein occupancy `1 / (e^x - 1)` for `x = hbar omega0 / kT`.
pub fn planck_occupancy(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "temperature ratio must be positive, got {x}"
        )));
    }
    Ok(1.0 / x.exp_m1())
}

/// Accumulated noise `N(t) = N0 (1 - e^{-2 Gamma t})`.
pub fn n_of_t(p: &ChannelParams, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(p.n0 * -(-2.0 * p.gamma * t).exp_m1())
}

/// Zero-temperature image of a two-mode amplitude after decay factor
/// `e^{-Gamma t}`: `((a_+ f + a_-) / 2, (a_+ f - a_-) / 2)`.
pub fn zero_temp_amplitudes(labels: (C64, C64), decay: f64) -> (C64, C64) {
    let plus = labels.0 + labels.1;
    let minus = labels.0 - labels.1;
    ((plus * decay + minus) / 2.0, (plus * decay - minus) / 2.0)
}

/// Zero-temperature channel on a dyad expansion.
///
/// Ket and bra labels follow [`zero_temp_amplitudes`]. The dyads are
/// normalized and the channel is trace preserving, so the weights carry over
/// unchanged. Requires `n0 == 0`.
pub fn zero_temp_map(input: &DyadExpansion, p: &ChannelParams, t: f64) -> Result<DyadExpansion> {
    check_time(t)?;
    if p.n0 != 0.0 {
        return Err(Error::InvalidParams(format!(
            "zero-temperature map needs n0 = 0, got {}",
            p.n0
        )));
    }
    let decay = (-p.gamma * t).exp();
    let terms = input
        .terms()
        .iter()
        .map(|d| DyadTerm {
            weight: d.weight,
            ket: zero_temp_amplitudes(d.ket, decay),
            bra: zero_temp_amplitudes(d.bra, decay),
        })
        .collect();
    DyadExpansion::new(terms)
}

/// Symmetrically ordered characteristic function at time `t`.
pub fn chi_analytic(
    input: &DyadExpansion,
    pt: &PhasePoint,
    p: &ChannelParams,
    t: f64,
) -> Result<C64> {
    let n = n_of_t(p, t)?;
    let decay = (-p.gamma * t).exp();
    let lp = pt.lambda_plus();
    let lm = pt.lambda_minus();
    let gauss = -0.5 * n * lp.norm_sqr() - 0.25 * lp.norm_sqr() - 0.25 * lm.norm_sqr();
    Ok(input
        .terms()
        .iter()
        .map(|d| {
            let (ap, am) = (d.ket.0 + d.ket.1, d.ket.0 - d.ket.1);
            let (bp, bm) = (d.bra.0 + d.bra.1, d.bra.0 - d.bra.1);
            let e = gauss
                - 0.5 * decay * (ap * lp.conj() - bp.conj() * lp)
                - 0.5 * (am * lm.conj() - bm.conj() * lm);
            d.weight * e.exp()
        })
        .sum())
}

/// Initial-time kernel `prod_i exp(-|l_i|^2/2 - l_i^* a_i + l_i b_i^*)` of one
/// dyad.
pub fn chi_initial_kernel(d: &DyadTerm, pt: &PhasePoint) -> C64 {
    let mode = |l: C64, a: C64, b: C64| -l.norm_sqr() / 2.0 - l.conj() * a + l * b.conj();
    (mode(pt.lambda1, d.ket.0, d.bra.0) + mode(pt.lambda2, d.ket.1, d.bra.1)).exp()
}

pub(crate) fn q_analytic_complex(
    input: &DyadExpansion,
    q: &QPoint,
    p: &ChannelParams,
    t: f64,
) -> Result<C64> {
    let n = n_of_t(p, t)?;
    let e1 = (-p.gamma * t).exp();
    let e2 = (-2.0 * p.gamma * t).exp();
    let s = 1.0 / (1.0 + n);
    let (d1, d2) = (q.delta1, q.delta2);
    let quad = -(2.0 + n) * s * (d1.norm_sqr() + d2.norm_sqr())
        + n * s * (d1 * d2.conj() + d1.conj() * d2).re;
    let sum: C64 = input
        .terms()
        .iter()
        .map(|d| {
            let (ap, am) = (d.ket.0 + d.ket.1, d.ket.0 - d.ket.1);
            let (bpc, bmc) = ((d.bra.0 + d.bra.1).conj(), (d.bra.0 - d.bra.1).conj());
            let f = quad - s * ap * bpc * e2 - am * bmc
                + (ap * e1 * s + am) * d1.conj()
                + (bpc * e1 * s + bmc) * d1
                + (ap * e1 * s - am) * d2.conj()
                + (bpc * e1 * s - bmc) * d2;
            d.weight * (f / 2.0).exp()
        })
        .sum();
    Ok(sum * s / std::f64::consts::PI.powi(2))
}

/// Husimi Q-function at time `t`. Hermitian inputs give a real value; the
/// imaginary rounding residue is dropped.
pub fn q_analytic(input: &DyadExpansion, q: &QPoint, p: &ChannelParams, t: f64) -> Result<f64> {
    Ok(q_analytic_complex(input, q, p, t)?.re)
}

/// Purity candidate for a coherent input: `2(1+N) / (2 + 6N + 5N^2)`.
pub fn purity_coherent_paper(p: &ChannelParams, t: f64) -> Result<f64> {
    let n = n_of_t(p, t)?;
    Ok(2.0 * (1.0 + n) / (2.0 + 6.0 * n + 5.0 * n * n))
}

/// Purity of a coherent input from the sum/difference mode decomposition:
/// a displaced thermal state with occupancy `N(t)` in the sum mode times a
/// pure difference mode, `1 / (1 + 2N)`.
pub fn purity_coherent_rotated(p: &ChannelParams, t: f64) -> Result<f64> {
    let n = n_of_t(p, t)?;
    Ok(1.0 / (1.0 + 2.0 * n))
}

/// Overlap fidelity `Tr[rho(0) rho(t)]` for the input `|a, -a>`; independent
/// of `a`.
pub fn fidelity_antisym(p: &ChannelParams, t: f64) -> Result<f64> {
    let n = n_of_t(p, t)?;
    Ok(1.0 / (1.0 + n))
}

/// Overlap fidelity `Tr[rho(0) rho(t)]` for the input `|a, a>`.
pub fn fidelity_sym(alpha: C64, p: &ChannelParams, t: f64) -> Result<f64> {
    let n = n_of_t(p, t)?;
    let loss = -(-p.gamma * t).exp_m1();
    Ok((-2.0 * loss * loss * alpha.norm_sqr() / (1.0 + n)).exp() / (1.0 + n))
}

/// Residual of the characteristic-function evolution equation
/// `d chi/dt = -Gamma (N0 + 1/2) |l_+|^2 chi - Gamma (l_+^* d/dl_+^* + l_+ d/dl_+) chi`
/// with central differences of step `h` in `t` and in the real and imaginary
/// directions of `l_+` (with `l_-` held fixed).
///
/// For `l_+ = x + i y` the Wirtinger combination reduces to
/// `x d/dx + y d/dy`.
pub fn chi_pde_residual(
    input: &DyadExpansion,
    pt: &PhasePoint,
    p: &ChannelParams,
    t: f64,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0 && t > h) {
        return Err(Error::Domain(format!(
            "need t > h > 0, got t = {t}, h = {h}"
        )));
    }
    if h < MIN_FD_STEP {
        return Err(Error::StepSize { h });
    }
    let lp = pt.lambda_plus();
    let lm = pt.lambda_minus();
    let chi = |plus: C64, time: f64| chi_analytic(input, &PhasePoint::from_plus_minus(plus, lm), p, time);

    let centre = chi(lp, t)?;
    let dt = (chi(lp, t + h)? - chi(lp, t - h)?) / (2.0 * h);
    let dx = (chi(lp + h, t)? - chi(lp - h, t)?) / (2.0 * h);
    let ih = C64::new(0.0, h);
    let dy = (chi(lp + ih, t)? - chi(lp - ih, t)?) / (2.0 * h);

    let g = p.gamma;
    let r = dt + g * (p.n0 + 0.5) * lp.norm_sqr() * centre + g * (lp.re * dx + lp.im * dy);
    Ok(r.norm())
}
