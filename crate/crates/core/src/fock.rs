//! Truncated two-mode Fock space: ladder operators, displacements, coherent
//! states and their dyad expansions.
//!
//! Coherent kets are never renormalized after truncation. The missing
//! probability is the Poisson tail beyond the cutoff and is checked against a
//! tolerance instead of being hidden.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::{CMatrix, CVector, C64};

/// Largest Poisson tail accepted when a coherent amplitude is truncated.
pub const TRUNCATION_TOL: f64 = 1e-12;

/// Squared norms below this are treated as a vanishing superposition.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Smallest per-mode cutoff chosen by [`ModeCutoff::auto`].
pub const MIN_AUTO_CUTOFF: usize = 16;

/// Number of Fock levels kept in each mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeCutoff {
    d1: usize,
    d2: usize,
}

impl ModeCutoff {
    pub fn new(d1: usize, d2: usize) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::InvalidDimension(format!(
                "mode cutoffs must be positive, got ({d1}, {d2})"
            )));
        }
        Ok(ModeCutoff { d1, d2 })
    }

    pub fn square(d: usize) -> Result<Self> {
        Self::new(d, d)
    }

    /// Default cutoff for coherent amplitudes up to `max_abs_alpha`:
    /// `max(16, ceil(|a|^2 + 6|a| + 12))` levels in each mode.
    pub fn auto(max_abs_alpha: f64) -> Self {
        let d = auto_levels(max_abs_alpha);
        ModeCutoff { d1: d, d2: d }
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    /// Total Hilbert-space dimension `d1 * d2`.
    pub fn dim(&self) -> usize {
        self.d1 * self.d2
    }

    /// Flat index of `|n1, n2>`.
    pub fn index(&self, n1: usize, n2: usize) -> usize {
        debug_assert!(n1 < self.d1 && n2 < self.d2);
        n1 * self.d2 + n2
    }

    /// Inverse of [`ModeCutoff::index`].
    pub fn levels(&self, index: usize) -> (usize, usize) {
        (index / self.d2, index % self.d2)
    }

    fn ensure_same(&self, other: &ModeCutoff) -> Result<()> {
        if self != other {
            return Err(Error::DimensionMismatch {
                expected: *self,
                found: *other,
            });
        }
        Ok(())
    }
}

impl fmt::Display for ModeCutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.d1, self.d2)
    }
}

/// Per-mode level count of the truncation policy for one amplitude.
pub fn auto_levels(max_abs_alpha: f64) -> usize {
    let a = max_abs_alpha.abs();
    let d = (a * a + 6.0 * a + 12.0).ceil() as usize;
    d.max(MIN_AUTO_CUTOFF)
}

/// `P(n >= d)` for a Poisson distribution with the given mean.
///
/// Summed directly over the tail so values far below machine epsilon keep
/// their relative accuracy.
pub fn poisson_tail(mean: f64, d: usize) -> f64 {
    if d == 0 {
        return 1.0;
    }
    if mean <= 0.0 {
        return 0.0;
    }
    if (d as f64) <= mean {
        // Tail is O(1); the head sum loses nothing.
        let mut term = (-mean).exp();
        let mut head = term;
        for n in 1..d {
            term *= mean / n as f64;
            head += term;
        }
        return (1.0 - head).max(0.0);
    }
    let ln_fact: f64 = (1..=d).map(|k| (k as f64).ln()).sum();
    let mut term = (-mean + d as f64 * mean.ln() - ln_fact).exp();
    let mut sum = 0.0;
    let mut n = d;
    while term > 0.0 && term > sum * 1e-18 {
        sum += term;
        n += 1;
        term *= mean / n as f64;
    }
    sum
}

/// Inner product `<bra|ket>` of two single-mode coherent states.
pub fn coherent_overlap_1(bra: C64, ket: C64) -> C64 {
    (-(bra.norm_sqr() + ket.norm_sqr()) / 2.0 + bra.conj() * ket).exp()
}

/// Inner product `<b1, b2|a1, a2>` of two two-mode coherent states.
pub fn coherent_overlap(bra: (C64, C64), ket: (C64, C64)) -> C64 {
    coherent_overlap_1(bra.0, ket.0) * coherent_overlap_1(bra.1, ket.1)
}

/// Single-mode annihilation operator on levels `0..d`.
pub fn annihilation(d: usize) -> Result<CMatrix> {
    if d == 0 {
        return Err(Error::InvalidDimension(
            "annihilation operator needs d >= 1".into(),
        ));
    }
    let mut a = CMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

/// Truncated coherent ket `e^{-|a|^2/2} a^n / sqrt(n!)`, `n < d`, with the
/// truncation tolerance on the Poisson tail.
pub fn coherent_ket(alpha: C64, d: usize, tol: f64) -> Result<CVector> {
    if d == 0 {
        return Err(Error::InvalidDimension("coherent ket needs d >= 1".into()));
    }
    let tail = poisson_tail(alpha.norm_sqr(), d);
    if tail > tol {
        return Err(Error::CutoffTooSmall {
            amplitude: alpha.norm(),
            cutoff: d,
            tail,
            tol,
        });
    }
    Ok(coherent_ket_unchecked(alpha, d))
}

pub(crate) fn coherent_ket_unchecked(alpha: C64, d: usize) -> CVector {
    let mut ket = CVector::zeros(d);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    ket[0] = c;
    for n in 1..d {
        c *= alpha / (n as f64).sqrt();
        ket[n] = c;
    }
    ket
}

/// Kronecker product with the mode-1-major convention of [`ModeCutoff::index`].
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Single-mode displacement operator `exp(l a^+ - l^* a)` on levels `0..d`.
///
/// Entries come from the closed form
/// `<m|D|n> = sqrt(n!/m!) l^{m-n} e^{-|l|^2/2} L_n^{(m-n)}(|l|^2)` for `m >= n`
/// (and its adjoint counterpart for `m < n`), so every kept element is exact
/// regardless of the truncation.
pub fn displacement(lambda: C64, d: usize) -> Result<CMatrix> {
    if d == 0 {
        return Err(Error::InvalidDimension(
            "displacement operator needs d >= 1".into(),
        ));
    }
    if lambda == C64::new(0.0, 0.0) {
        return Ok(CMatrix::identity(d, d));
    }
    let x = lambda.norm_sqr();
    let ln_abs = lambda.norm().ln();
    let unit = lambda / lambda.norm();
    let below = unit;
    let above = -unit.conj();

    let mut ln_fact = vec![0.0; d];
    for n in 1..d {
        ln_fact[n] = ln_fact[n - 1] + (n as f64).ln();
    }

    let mut out = CMatrix::zeros(d, d);
    let mut lag = vec![0.0; d];
    for k in 0..d {
        // lag[n] = L_n^{(k)}(x) for n + k < d.
        let len = d - k;
        laguerre_sequence(k as f64, x, &mut lag[..len]);
        let pb = below.powi(k as i32);
        let pa = above.powi(k as i32);
        for (lo, &l) in lag[..len].iter().enumerate() {
            let hi = lo + k;
            let mag = (0.5 * (ln_fact[lo] - ln_fact[hi]) + k as f64 * ln_abs - x / 2.0).exp() * l;
            out[(hi, lo)] = pb * mag;
            if k > 0 {
                out[(lo, hi)] = pa * mag;
            }
        }
    }
    Ok(out)
}

/// Fills `out[n] = L_n^{(a)}(x)` by the three-term recurrence.
fn laguerre_sequence(a: f64, x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = 1.0 + a - x;
    for n in 1..out.len() - 1 {
        let nf = n as f64;
        out[n + 1] = ((2.0 * nf + 1.0 + a - x) * out[n] - (nf + a) * out[n - 1]) / (nf + 1.0);
    }
}

/// A ket in the truncated two-mode space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
    cutoff: ModeCutoff,
}

impl StateVector {
    pub fn new(amplitudes: CVector, cutoff: ModeCutoff) -> Result<Self> {
        if amplitudes.len() != cutoff.dim() {
            return Err(Error::InvalidDimension(format!(
                "state vector of length {} does not match cutoff {cutoff}",
                amplitudes.len()
            )));
        }
        Ok(StateVector { amplitudes, cutoff })
    }

    /// `|a1, a2>` truncated at `cutoff`, checked against [`TRUNCATION_TOL`].
    pub fn coherent(alpha1: C64, alpha2: C64, cutoff: ModeCutoff) -> Result<Self> {
        let k1 = coherent_ket(alpha1, cutoff.d1, TRUNCATION_TOL)?;
        let k2 = coherent_ket(alpha2, cutoff.d2, TRUNCATION_TOL)?;
        Ok(StateVector {
            amplitudes: k1.kronecker(&k2),
            cutoff,
        })
    }

    pub fn fock(n1: usize, n2: usize, cutoff: ModeCutoff) -> Result<Self> {
        if n1 >= cutoff.d1 || n2 >= cutoff.d2 {
            return Err(Error::InvalidDimension(format!(
                "Fock state |{n1}, {n2}> outside cutoff {cutoff}"
            )));
        }
        let mut amplitudes = CVector::zeros(cutoff.dim());
        amplitudes[cutoff.index(n1, n2)] = C64::new(1.0, 0.0);
        Ok(StateVector { amplitudes, cutoff })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn cutoff(&self) -> ModeCutoff {
        self.cutoff
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }
}

/// Dense density operator over the truncated two-mode basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    cutoff: ModeCutoff,
}

impl DensityOperator {
    /// Wraps a matrix without checking the physical invariants; see
    /// [`DensityOperator::validate`].
    pub fn from_matrix(matrix: CMatrix, cutoff: ModeCutoff) -> Result<Self> {
        let dim = cutoff.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidDimension(format!(
                "{}x{} matrix does not match cutoff {cutoff}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(DensityOperator { matrix, cutoff })
    }

    /// `|psi><psi|` normalized to unit trace.
    pub fn pure(psi: &StateVector) -> Result<Self> {
        let n = psi.norm_sqr();
        if n <= DEGENERACY_TOL {
            return Err(Error::DegenerateState { norm_sqr: n });
        }
        let v = &psi.amplitudes;
        Ok(DensityOperator {
            matrix: (v * v.adjoint()).unscale(n),
            cutoff: psi.cutoff,
        })
    }

    pub fn vacuum(cutoff: ModeCutoff) -> Self {
        let mut matrix = CMatrix::zeros(cutoff.dim(), cutoff.dim());
        matrix[(0, 0)] = C64::new(1.0, 0.0);
        DensityOperator { matrix, cutoff }
    }

    pub fn maximally_mixed(cutoff: ModeCutoff) -> Self {
        let dim = cutoff.dim();
        let matrix = CMatrix::identity(dim, dim).unscale(dim as f64);
        DensityOperator { matrix, cutoff }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn cutoff(&self) -> ModeCutoff {
        self.cutoff
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Largest entry of `|rho - rho^+|`.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    /// Checks hermiticity, unit trace and positivity against the given
    /// tolerances.
    pub fn validate(&self, tol: f64, positivity_tol: f64) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > tol {
            return Err(Error::Domain(format!(
                "density operator is not hermitian (defect {defect:e})"
            )));
        }
        let drift = (self.trace() - 1.0).norm();
        if drift > tol {
            return Err(Error::Domain(format!(
                "density operator trace deviates from 1 by {drift:e}"
            )));
        }
        let min = crate::observables::min_eigenvalue(self);
        if min < -positivity_tol {
            return Err(Error::Domain(format!(
                "density operator has eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    pub(crate) fn ensure_cutoff(&self, other: ModeCutoff) -> Result<()> {
        self.cutoff.ensure_same(&other)
    }
}

pub(crate) fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in j..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Relative sign between the two branches of an entangled coherent state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl TryFrom<i64> for Sign {
    type Error = Error;

    fn try_from(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(Error::Domain(format!("sign must be +1 or -1, got {v}"))),
        }
    }
}

/// One term `c |a1, a2>` of a coherent superposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentTerm {
    pub coeff: C64,
    pub alpha1: C64,
    pub alpha2: C64,
}

impl CoherentTerm {
    pub fn labels(&self) -> (C64, C64) {
        (self.alpha1, self.alpha2)
    }
}

/// Finite superposition of two-mode coherent kets.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentSuperposition {
    terms: Vec<CoherentTerm>,
}

impl CoherentSuperposition {
    /// Builds the superposition as given, without normalizing.
    pub fn new(terms: Vec<CoherentTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Domain(
                "a coherent superposition needs at least one term".into(),
            ));
        }
        let all_finite = terms.iter().all(|t| {
            [t.coeff, t.alpha1, t.alpha2]
                .iter()
                .all(|z| z.re.is_finite() && z.im.is_finite())
        });
        if !all_finite {
            return Err(Error::Domain(
                "coherent superposition has non-finite entries".into(),
            ));
        }
        Ok(CoherentSuperposition { terms })
    }

    /// Builds and normalizes to `<psi|psi> = 1` using exact coherent overlaps.
    pub fn normalized(terms: Vec<CoherentTerm>) -> Result<Self> {
        let raw = Self::new(terms)?;
        let n = raw.norm_sqr();
        if n <= DEGENERACY_TOL {
            return Err(Error::DegenerateState { norm_sqr: n });
        }
        let s = n.sqrt();
        let terms = raw
            .terms
            .into_iter()
            .map(|t| CoherentTerm {
                coeff: t.coeff / s,
                ..t
            })
            .collect();
        Ok(CoherentSuperposition { terms })
    }

    pub fn coherent(alpha1: C64, alpha2: C64) -> Self {
        CoherentSuperposition {
            terms: vec![CoherentTerm {
                coeff: C64::new(1.0, 0.0),
                alpha1,
                alpha2,
            }],
        }
    }

    pub fn terms(&self) -> &[CoherentTerm] {
        &self.terms
    }

    /// `<psi|psi>` from pairwise coherent overlaps (untruncated).
    pub fn norm_sqr(&self) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for bra in &self.terms {
            for ket in &self.terms {
                acc += bra.coeff.conj() * ket.coeff * coherent_overlap(bra.labels(), ket.labels());
            }
        }
        acc.re
    }

    /// Largest `|alpha_i|` over all terms and both modes.
    pub fn max_amplitude(&self) -> f64 {
        self.terms
            .iter()
            .flat_map(|t| [t.alpha1.norm(), t.alpha2.norm()])
            .fold(0.0, f64::max)
    }

    /// Truncated ket `sum c_i |A_i>`, each coherent factor checked against
    /// [`TRUNCATION_TOL`].
    pub fn to_state_vector(&self, cutoff: ModeCutoff) -> Result<StateVector> {
        let mut v = CVector::zeros(cutoff.dim());
        for t in &self.terms {
            let k = StateVector::coherent(t.alpha1, t.alpha2, cutoff)?;
            v.axpy(t.coeff, &k.amplitudes, C64::new(1.0, 0.0));
        }
        StateVector::new(v, cutoff)
    }
}

/// Normalized entangled coherent state `c (|a, -a> + sign e^{i phi} |-a, a>)`.
pub fn entangled_coherent(alpha: C64, phi: f64, sign: Sign) -> Result<CoherentSuperposition> {
    let one = C64::new(1.0, 0.0);
    let rel = C64::from_polar(sign.value(), phi);
    CoherentSuperposition::normalized(vec![
        CoherentTerm {
            coeff: one,
            alpha1: alpha,
            alpha2: -alpha,
        },
        CoherentTerm {
            coeff: rel,
            alpha1: -alpha,
            alpha2: alpha,
        },
    ])
}

/// `|psi><psi|` in the truncated basis, normalized to unit trace.
pub fn superposition_to_density(
    psi: &CoherentSuperposition,
    cutoff: ModeCutoff,
) -> Result<DensityOperator> {
    DensityOperator::pure(&psi.to_state_vector(cutoff)?)
}

/// `w |a1, a2><b1, b2| / <b1, b2|a1, a2>`: a weighted normalized coherent dyad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadTerm {
    pub weight: C64,
    pub ket: (C64, C64),
    pub bra: (C64, C64),
}

/// Finite expansion of an operator in normalized coherent dyads.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadExpansion {
    terms: Vec<DyadTerm>,
}

impl DyadExpansion {
    pub fn new(terms: Vec<DyadTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Domain("a dyad expansion needs at least one term".into()));
        }
        Ok(DyadExpansion { terms })
    }

    pub fn terms(&self) -> &[DyadTerm] {
        &self.terms
    }

    /// Trace of the represented operator: each normalized dyad has unit trace.
    pub fn total_weight(&self) -> C64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// Every term has a partner with swapped labels and conjugate weight.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let close = |a: C64, b: C64| (a - b).norm() <= tol;
        self.terms.iter().all(|t| {
            self.terms.iter().any(|u| {
                close(u.ket.0, t.bra.0)
                    && close(u.ket.1, t.bra.1)
                    && close(u.bra.0, t.ket.0)
                    && close(u.bra.1, t.ket.1)
                    && close(u.weight, t.weight.conj())
            })
        })
    }

    pub fn max_amplitude(&self) -> f64 {
        self.terms
            .iter()
            .flat_map(|t| [t.ket.0, t.ket.1, t.bra.0, t.bra.1])
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Dense reconstruction `sum w |A><B| / <B|A>` in the truncated basis.
    ///
    /// No renormalization is applied, so the trace carries the truncation
    /// deficit.
    pub fn to_density(&self, cutoff: ModeCutoff) -> Result<DensityOperator> {
        let dim = cutoff.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for t in &self.terms {
            let ket = StateVector::coherent(t.ket.0, t.ket.1, cutoff)?;
            let bra = StateVector::coherent(t.bra.0, t.bra.1, cutoff)?;
            let scale = t.weight / coherent_overlap(t.bra, t.ket);
            m += (&ket.amplitudes * bra.amplitudes.adjoint()) * scale;
        }
        DensityOperator::from_matrix(m, cutoff)
    }
}

/// Expands `|psi><psi|` as `sum_ij w_ij Lambda(A_i; A_j)` with
/// `w_ij = c_i c_j^* <A_j|A_i>`.
pub fn dyad_expansion_of(psi: &CoherentSuperposition) -> DyadExpansion {
    let mut terms = Vec::with_capacity(psi.terms.len() * psi.terms.len());
    for ti in &psi.terms {
        for tj in &psi.terms {
            terms.push(DyadTerm {
                weight: ti.coeff * tj.coeff.conj() * coherent_overlap(tj.labels(), ti.labels()),
                ket: ti.labels(),
                bra: tj.labels(),
            });
        }
    }
    DyadExpansion { terms }
}

/// Embeds single-mode operators as `A (x) I` and `I (x) B`.
pub fn embed_mode1(a: &CMatrix, cutoff: ModeCutoff) -> CMatrix {
    tensor(a, &CMatrix::identity(cutoff.d2, cutoff.d2))
}

pub fn embed_mode2(b: &CMatrix, cutoff: ModeCutoff) -> CMatrix {
    tensor(&CMatrix::identity(cutoff.d1, cutoff.d1), b)
}

/// Partial trace over mode 2, leaving a `d1 x d1` matrix.
pub fn partial_trace_mode2(m: &CMatrix, cutoff: ModeCutoff) -> CMatrix {
    let (d1, d2) = (cutoff.d1, cutoff.d2);
    DMatrix::from_fn(d1, d1, |i, j| {
        (0..d2).map(|k| m[(i * d2 + k, j * d2 + k)]).sum()
    })
}

/// Partial trace over mode 1, leaving a `d2 x d2` matrix.
pub fn partial_trace_mode1(m: &CMatrix, cutoff: ModeCutoff) -> CMatrix {
    let (d1, d2) = (cutoff.d1, cutoff.d2);
    DMatrix::from_fn(d2, d2, |i, j| {
        (0..d1).map(|k| m[(k * d2 + i, k * d2 + j)]).sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Test-only `exp(M)` by scaling and squaring a Taylor series.
    fn expm(m: &CMatrix) -> CMatrix {
        let norm = m.iter().map(|z| z.norm()).sum::<f64>();
        let squarings = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
        let scaled = m.unscale(2f64.powi(squarings));
        let n = m.nrows();
        let mut term = CMatrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..40 {
            term = &term * &scaled / C64::new(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn annihilation_entries() {
        let a2 = annihilation(2).unwrap();
        assert_eq!(a2, CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]));
        let a3 = annihilation(3).unwrap();
        assert_abs_diff_eq!(a3[(1, 2)].re, std::f64::consts::SQRT_2, epsilon = 1e-12);
        assert!(matches!(annihilation(0), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn truncated_commutator_corner() {
        let a = annihilation(16).unwrap();
        let comm = &a * a.adjoint() - a.adjoint() * &a;
        for n in 0..15 {
            assert_abs_diff_eq!(comm[(n, n)].re, 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(comm[(15, 15)].re, -15.0, epsilon = 1e-12);
        let off: f64 = (0..16)
            .flat_map(|i| (0..16).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| comm[(i, j)].norm())
            .sum();
        assert_eq!(off, 0.0);
    }

    #[test]
    fn coherent_ket_examples() {
        let vac = coherent_ket(c(0., 0.), 5, TRUNCATION_TOL).unwrap();
        assert_eq!(vac[0], c(1., 0.));
        assert!(vac.iter().skip(1).all(|z| *z == c(0., 0.)));

        let k = coherent_ket(c(1., 0.), 2, 1.0).unwrap();
        let e = (-0.5f64).exp();
        assert_abs_diff_eq!(k[0].re, e, epsilon = 1e-15);
        assert_abs_diff_eq!(k[1].re, e, epsilon = 1e-15);

        match coherent_ket(c(1., 0.), 2, TRUNCATION_TOL) {
            Err(Error::CutoffTooSmall { tail, cutoff, .. }) => {
                assert_eq!(cutoff, 2);
                assert_abs_diff_eq!(tail, 1.0 - 2.0 * (-1f64).exp(), epsilon = 1e-14);
            }
            other => panic!("expected cutoff error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_overlap_matches_analytic() {
        let a = coherent_ket(c(0.8, 0.), 40, TRUNCATION_TOL).unwrap();
        let b = coherent_ket(c(-0.8, 0.), 40, TRUNCATION_TOL).unwrap();
        let dot = b.dotc(&a);
        assert_abs_diff_eq!(dot.re, (-1.28f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(dot.im, 0.0, epsilon = 1e-12);
        let analytic = coherent_overlap_1(c(-0.8, 0.), c(0.8, 0.));
        assert_abs_diff_eq!(analytic.re, (-1.28f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn norm_deficit_is_poisson_tail() {
        for &(r, th) in &[(0.3, 0.2), (1.0, 1.0), (1.5, -2.0), (2.0, 0.7)] {
            let alpha = C64::from_polar(r, th);
            for d in [10usize, 20, 30, 60] {
                let tail = poisson_tail(r * r, d);
                let k = coherent_ket_unchecked(alpha, d);
                assert_abs_diff_eq!(1.0 - k.norm_squared(), tail, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn poisson_tail_small_values() {
        // P(n >= 3) for mean 0.5 summed by hand: 1 - e^{-.5}(1 + .5 + .125)
        let direct = 1.0 - (-0.5f64).exp() * (1.0 + 0.5 + 0.125);
        assert_abs_diff_eq!(poisson_tail(0.5, 3), direct, epsilon = 1e-15);
        let t = poisson_tail(1.0, 19);
        let first = (-1f64).exp() / (1..=19).map(|k| k as f64).product::<f64>();
        assert!(t > first && t < first * 1.1);
        assert_eq!(poisson_tail(0.0, 1), 0.0);
        assert_eq!(poisson_tail(3.0, 0), 1.0);
    }

    #[test]
    fn displacement_identity_and_vacuum_column() {
        assert_eq!(displacement(c(0., 0.), 6).unwrap(), CMatrix::identity(6, 6));
        for &lambda in &[c(1.0, 0.0), c(0.3, -0.8), c(-0.6, 0.6), c(0.0, 1.0)] {
            let d = displacement(lambda, 30).unwrap();
            let k = coherent_ket(lambda, 30, TRUNCATION_TOL).unwrap();
            let diff = crate::max_abs_entry(&(d.column(0) - &k));
            assert!(diff < 1e-10, "lambda {lambda}: {diff}");
        }
    }

    #[test]
    fn displacement_inverse_on_low_block() {
        let lambda = c(0.5, 0.3);
        let d = 30;
        let prod = displacement(lambda, d).unwrap() * displacement(-lambda, d).unwrap();
        for i in 0..d / 2 {
            for j in 0..d / 2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - expect).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn displacement_matches_matrix_exponential() {
        // Exponentiate in a larger space so the truncation corner cannot reach
        // the compared block.
        let lambda = c(0.7, -0.4);
        let big = 60;
        let a = annihilation(big).unwrap();
        let gen = a.adjoint() * lambda - &a * lambda.conj();
        let e = expm(&gen);
        let d = displacement(lambda, 20).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                assert!((e[(i, j)] - d[(i, j)]).norm() < 1e-11, "({i},{j})");
            }
        }
    }

    #[test]
    fn displacement_large_levels_finite() {
        let d = displacement(c(1.5, 1.5), 60).unwrap();
        assert!(d.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        // Columns of a unitary stay normalized well inside the truncation.
        for n in 0..20 {
            assert_abs_diff_eq!(d.column(n).norm_squared(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn tensor_conventions() {
        let cut = ModeCutoff::new(3, 4).unwrap();
        let i3 = CMatrix::identity(3, 3);
        let i4 = CMatrix::identity(4, 4);
        assert_eq!(tensor(&i3, &i4), CMatrix::identity(12, 12));

        let a3 = annihilation(3).unwrap();
        let a4 = annihilation(4).unwrap();
        let lhs = embed_mode1(&a3, cut) * embed_mode2(&a4, cut);
        assert_eq!(lhs, tensor(&a3, &a4));

        // |n1, n2> sits at n1 * d2 + n2.
        let v = StateVector::fock(2, 1, cut).unwrap();
        assert_eq!(v.amplitudes()[9], c(1., 0.));
        assert_eq!(cut.index(2, 1), 9);
        assert_eq!(cut.levels(9), (2, 1));
    }

    #[test]
    fn trace_of_tensor_product() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut rand_m = |n| CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let a = rand_m(3);
        let b = rand_m(3);
        let t = tensor(&a, &b);
        // Direct sum over the diagonal of the Kronecker layout.
        let mut direct = c(0., 0.);
        for i in 0..3 {
            for k in 0..3 {
                direct += a[(i, i)] * b[(k, k)];
            }
        }
        assert!((t.trace() - direct).norm() < 1e-14);
        assert!((t.trace() - a.trace() * b.trace()).norm() < 1e-13);
    }

    #[test]
    fn partial_traces_recover_factors() {
        let cut = ModeCutoff::new(3, 2).unwrap();
        let a = CMatrix::from_fn(3, 3, |i, j| c(i as f64 + 1.0, j as f64 - 0.5));
        let b = CMatrix::from_fn(2, 2, |i, j| c(0.25 * i as f64, 1.0 + j as f64));
        let ab = tensor(&a, &b);
        let pa = partial_trace_mode2(&ab, cut);
        let pb = partial_trace_mode1(&ab, cut);
        assert!(crate::max_abs_entry(&(pa - &a * b.trace())) < 1e-13);
        assert!(crate::max_abs_entry(&(pb - &b * a.trace())) < 1e-13);
        let ea = embed_mode1(&a, cut);
        let eb = embed_mode2(&b, cut);
        assert!(crate::max_abs_entry(&(&ea * &eb - &eb * &ea)) < 1e-13);
    }

    #[test]
    fn entangled_coherent_norms() {
        // alpha = 0 with the plus sign collapses onto the vacuum.
        let ecs = entangled_coherent(c(0., 0.), 0.0, Sign::Plus).unwrap();
        let cut = ModeCutoff::square(4).unwrap();
        let rho = superposition_to_density(&ecs, cut).unwrap();
        assert!(crate::max_abs_entry(&(rho.matrix() - DensityOperator::vacuum(cut).matrix())) < 1e-14);

        assert!(matches!(
            entangled_coherent(c(0., 0.), 0.0, Sign::Minus),
            Err(Error::DegenerateState { .. })
        ));

        // Unnormalized norm from the truncated Fock-space inner product.
        let cut40 = ModeCutoff::square(40).unwrap();
        let fock_norm = |alpha: C64, phi: f64, sign: Sign| {
            let raw = CoherentSuperposition::new(vec![
                CoherentTerm { coeff: c(1., 0.), alpha1: alpha, alpha2: -alpha },
                CoherentTerm { coeff: C64::from_polar(sign.value(), phi), alpha1: -alpha, alpha2: alpha },
            ])
            .unwrap();
            (raw.to_state_vector(cut40).unwrap().norm_sqr(), raw.norm_sqr())
        };
        let (fock, exact) = fock_norm(c(0.5, 0.), 0.0, Sign::Plus);
        assert_abs_diff_eq!(fock, 2.0 + 2.0 * (-1f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(exact, 2.0 + 2.0 * (-1f64).exp(), epsilon = 1e-14);
        let (fock, exact) = fock_norm(c(2., 0.), PI / 3.0, Sign::Minus);
        let expect = 2.0 - 2.0 * (PI / 3.0).cos() * (-16f64).exp();
        assert_abs_diff_eq!(fock, expect, epsilon = 1e-12);
        assert_abs_diff_eq!(exact, expect, epsilon = 1e-14);

        let n = entangled_coherent(c(0.5, 0.), 0.3, Sign::Minus).unwrap().norm_sqr();
        assert_abs_diff_eq!(n, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn superposition_density_properties() {
        let cut = ModeCutoff::square(4).unwrap();
        let vac = superposition_to_density(&CoherentSuperposition::coherent(c(0., 0.), c(0., 0.)), cut).unwrap();
        assert_eq!(vac, DensityOperator::vacuum(cut));

        let ecs = entangled_coherent(c(0.8, 0.), 0.0, Sign::Plus).unwrap();
        let rho = superposition_to_density(&ecs, ModeCutoff::auto(0.8)).unwrap();
        let purity: f64 = rho.matrix().iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(purity, 1.0, epsilon = 1e-10);

        let psi = CoherentSuperposition::normalized(vec![
            CoherentTerm { coeff: c(0.5, 0.2), alpha1: c(0.3, -0.4), alpha2: c(-0.9, 0.1) },
            CoherentTerm { coeff: c(-0.1, 0.7), alpha1: c(0.6, 0.6), alpha2: c(0.2, 0.0) },
            CoherentTerm { coeff: c(0.3, 0.0), alpha1: c(-0.5, 0.1), alpha2: c(0.0, -1.0) },
        ])
        .unwrap();
        let rho = superposition_to_density(&psi, ModeCutoff::square(30).unwrap()).unwrap();
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-10);

        match superposition_to_density(&CoherentSuperposition::coherent(c(3., 0.), c(0., 0.)), cut) {
            Err(Error::CutoffTooSmall { .. }) => {}
            other => panic!("expected cutoff error, got {other:?}"),
        }
    }

    #[test]
    fn dyad_expansion_single_and_ecs() {
        let single = dyad_expansion_of(&CoherentSuperposition::coherent(c(0.4, 0.1), c(-0.2, 0.)));
        assert_eq!(single.terms().len(), 1);
        assert_abs_diff_eq!(single.terms()[0].weight.re, 1.0, epsilon = 1e-15);

        let alpha = 0.5;
        let ecs = entangled_coherent(c(alpha, 0.), 0.0, Sign::Plus).unwrap();
        let dy = dyad_expansion_of(&ecs);
        assert_eq!(dy.terms().len(), 4);
        assert!(dy.is_hermitian(1e-14));
        assert!((dy.total_weight() - 1.0).norm() < 1e-10);
        let c2 = 1.0 / (2.0 + 2.0 * (-1f64).exp());
        let cross: Vec<_> = dy.terms().iter().filter(|t| t.ket != t.bra).collect();
        assert_eq!(cross.len(), 2);
        for t in cross {
            assert_abs_diff_eq!(t.weight.re, c2 * (-4.0 * alpha * alpha).exp(), epsilon = 1e-14);
            assert_abs_diff_eq!(t.weight.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn dyad_reconstruction_matches_density() {
        let cut = ModeCutoff::square(30).unwrap();
        let ecs = entangled_coherent(c(0.5, 0.2), 0.9, Sign::Minus).unwrap();
        let rho = superposition_to_density(&ecs, cut).unwrap();
        let recon = dyad_expansion_of(&ecs).to_density(cut).unwrap();
        assert!(crate::max_abs_entry(&(rho.matrix() - recon.matrix())) < 1e-9);
    }

    #[test]
    fn auto_cutoff_policy() {
        assert_eq!(ModeCutoff::auto(0.0).d1(), 16);
        assert_eq!(ModeCutoff::auto(1.0).d1(), 19);
        assert_eq!(ModeCutoff::auto(2.0).d2(), 28);
        for a in [0.5, 1.0, 2.0, 3.0] {
            assert!(poisson_tail(a * a, auto_levels(a)) < TRUNCATION_TOL);
        }
        assert!(ModeCutoff::new(0, 3).is_err());
    }
}
