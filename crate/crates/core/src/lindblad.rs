//! Master-equation integration in the truncated two-mode Fock space.
//!
//! Two generators are available:
//!
//! * [`Generator::Correlated`]: one jump operator `L = a1 + a2` for the
//!   common reservoir,
//!   `(G/2)(N0+1)[2 L r L^+ - L^+L r - r L^+L] + (G/2) N0 [2 L^+ r L - L L^+ r - r L L^+]`;
//! * [`Generator::Independent`]: the same thermal damper applied to `a1` and
//!   `a2` separately, each at rate `G`.
//!
//! [`evolve`] uses classical fixed-step RK4, symmetrizes the state after each
//! step and checks trace and positivity at every output time.

use std::fmt;

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::fock::{hermiticity_defect, DensityOperator, ModeCutoff};
use crate::observables::min_eigenvalue_matrix;
use crate::sparse::SparseOp;
use crate::{CMatrix, C64};

/// Stability margin for RK4: warn when `dt` times the generator-norm
/// estimate exceeds this.
const RK4_STABILITY: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    Correlated,
    Independent,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Generator::Correlated => "correlated",
            Generator::Independent => "independent",
        })
    }
}

/// Precomputed Lindblad superoperator for one cutoff and parameter set:
/// `sum_j 2 r_j J_j rho J_j^+ - {K, rho}` with `K = sum_j r_j J_j^+ J_j`.
#[derive(Debug, Clone)]
pub struct Lindbladian {
    cutoff: ModeCutoff,
    jumps: Vec<(f64, SparseOp)>,
    anti: SparseOp,
    norm_estimate: f64,
}

fn sparse_annihilation(cutoff: ModeCutoff, mode: usize) -> SparseOp {
    let (d1, d2) = (cutoff.d1(), cutoff.d2());
    let trip = (0..d1).flat_map(move |n1| (0..d2).map(move |n2| (n1, n2))).filter_map(move |(n1, n2)| {
        let (n, lowered) = if mode == 1 { (n1, (n1.wrapping_sub(1), n2)) } else { (n2, (n1, n2.wrapping_sub(1))) };
        (n > 0).then(|| (cutoff.index(lowered.0, lowered.1), cutoff.index(n1, n2), C64::new((n as f64).sqrt(), 0.0)))
    });
    SparseOp::from_triplets(cutoff.dim(), trip)
}

impl Lindbladian {
    pub fn new(generator: Generator, p: &ChannelParams, cutoff: ModeCutoff) -> Result<Self> {
        let a1 = sparse_annihilation(cutoff, 1);
        let a2 = sparse_annihilation(cutoff, 2);
        let down = 0.5 * p.gamma() * (p.n0() + 1.0);
        let up = 0.5 * p.gamma() * p.n0();
        let candidates = match generator {
            Generator::Correlated => {
                let l = a1.scaled_sum(1.0, &a2, 1.0);
                let ld = l.adjoint();
                vec![(down, l), (up, ld)]
            }
            Generator::Independent => vec![
                (down, a1.clone()),
                (up, a1.adjoint()),
                (down, a2.clone()),
                (up, a2.adjoint()),
            ],
        };
        let jumps: Vec<(f64, SparseOp)> = candidates.into_iter().filter(|(r, _)| *r > 0.0).collect();
        let mut anti = SparseOp::from_triplets(cutoff.dim(), std::iter::empty());
        let mut norm_estimate = 0.0;
        for (rate, j) in &jumps {
            let jdj = j.adjoint().matmul(j);
            // ||D_J|| <= 4 r ||J^+J||
            norm_estimate += 4.0 * rate * jdj.inf_norm();
            anti = anti.scaled_sum(1.0, &jdj, *rate);
        }
        Ok(Lindbladian {
            cutoff,
            jumps,
            anti,
            norm_estimate,
        })
    }

    pub fn cutoff(&self) -> ModeCutoff {
        self.cutoff
    }

    /// Upper bound on the superoperator norm, used for step-size advice.
    pub fn norm_estimate(&self) -> f64 {
        self.norm_estimate
    }

    /// Time derivative of `rho`.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let n = rho.nrows();
        let mut out = CMatrix::zeros(n, n);
        for (rate, j) in &self.jumps {
            let j_rho = j.left_mul(rho);
            j.right_mul_adj_acc(&j_rho, C64::new(2.0 * rate, 0.0), &mut out);
        }
        // K is hermitian, so rho K = rho K^+.
        let minus_one = C64::new(-1.0, 0.0);
        self.anti.left_mul_acc(rho, minus_one, &mut out);
        self.anti.right_mul_adj_acc(rho, minus_one, &mut out);
        out
    }

    fn rk4_step(&self, rho: &CMatrix, h: f64) -> CMatrix {
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + &k1 * C64::new(h / 2.0, 0.0)));
        let k3 = self.apply(&(rho + &k2 * C64::new(h / 2.0, 0.0)));
        let k4 = self.apply(&(rho + &k3 * C64::new(h, 0.0)));
        let mut next = rho.clone();
        let w = h / 6.0;
        next += k1 * C64::new(w, 0.0);
        next += k2 * C64::new(2.0 * w, 0.0);
        next += k3 * C64::new(2.0 * w, 0.0);
        next += k4 * C64::new(w, 0.0);
        next
    }
}

fn generator_derivative(
    generator: Generator,
    rho: &DensityOperator,
    p: &ChannelParams,
) -> Result<CMatrix> {
    let l = Lindbladian::new(generator, p, rho.cutoff())?;
    Ok(l.apply(rho.matrix()))
}

/// `d rho / dt` under the common-reservoir master equation.
pub fn correlated_generator(rho: &DensityOperator, p: &ChannelParams) -> Result<CMatrix> {
    generator_derivative(Generator::Correlated, rho, p)
}

/// `d rho / dt` with an independent thermal reservoir on each mode.
pub fn independent_generator(rho: &DensityOperator, p: &ChannelParams) -> Result<CMatrix> {
    generator_derivative(Generator::Independent, rho, p)
}

/// Integration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_final: f64,
    pub trace_tol: f64,
    pub positivity_tol: f64,
    /// Re-run at `dt / 2` and record the largest state difference.
    pub step_halving: bool,
}

impl SimConfig {
    /// Default settings with a step of `1 / (4 G (2 N0 + 1) (d1 + d2))`.
    pub fn new(p: &ChannelParams, cutoff: ModeCutoff, t_final: f64) -> Self {
        SimConfig {
            dt: default_dt(p, cutoff),
            t_final,
            trace_tol: 1e-8,
            positivity_tol: 1e-8,
            step_halving: false,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_step_halving(mut self, on: bool) -> Self {
        self.step_halving = on;
        self
    }

    fn validate(&self) -> Result<()> {
        let ok = self.dt.is_finite()
            && self.dt > 0.0
            && self.t_final.is_finite()
            && self.t_final >= 0.0
            && self.trace_tol > 0.0
            && self.positivity_tol > 0.0;
        if !ok {
            return Err(Error::Domain(format!("invalid simulation config {self:?}")));
        }
        Ok(())
    }
}

pub fn default_dt(p: &ChannelParams, cutoff: ModeCutoff) -> f64 {
    1.0 / (4.0 * p.gamma() * (2.0 * p.n0() + 1.0) * (cutoff.d1() + cutoff.d2()) as f64)
}

/// Health of the state at one output time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    /// `|Tr rho - 1|` before renormalization.
    pub trace_drift: f64,
    /// Largest `|rho - rho^+|` entry before symmetrization of the last step.
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
}

impl fmt::Display for StepDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "trace drift {:e}, hermiticity defect {:e}, min eigenvalue {:e}",
            self.trace_drift, self.hermiticity_defect, self.min_eigenvalue
        )
    }
}

/// States and diagnostics on an output grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Vec<f64>,
    pub states: Vec<DensityOperator>,
    pub diagnostics: Vec<StepDiagnostics>,
    /// Largest entry of `|rho_dt - rho_{dt/2}|` over the grid, when step
    /// halving was requested.
    pub convergence: Option<f64>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn final_state(&self) -> &DensityOperator {
        self.states.last().expect("trajectory has at least one state")
    }

    pub fn max_trace_drift(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.trace_drift).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }
}

fn symmetrize(m: &mut CMatrix) {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)].im = 0.0;
        for i in j + 1..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) / 2.0;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

fn check_grid(grid: &[f64], t_final: f64) -> Result<()> {
    if grid.is_empty() || grid[0] != 0.0 {
        return Err(Error::Domain("time grid must start at 0".into()));
    }
    if grid.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        return Err(Error::Domain("time grid must be strictly increasing".into()));
    }
    let last = *grid.last().unwrap();
    if !last.is_finite() || last > t_final * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "time grid ends at {last}, beyond t_final = {t_final}"
        )));
    }
    Ok(())
}

fn integrate(
    rho0: &DensityOperator,
    lindbladian: &Lindbladian,
    config: &SimConfig,
    grid: &[f64],
    dt: f64,
) -> Result<(Vec<DensityOperator>, Vec<StepDiagnostics>)> {
    let cutoff = rho0.cutoff();
    let mut rho = rho0.matrix().clone();
    let mut states = Vec::with_capacity(grid.len());
    let mut diagnostics = Vec::with_capacity(grid.len());

    let mut record = |rho: &mut CMatrix, t: f64, defect: f64| -> Result<()> {
        let tr = rho.trace();
        let drift = (tr - 1.0).norm();
        let min_eigenvalue = min_eigenvalue_matrix(rho);
        let diag = StepDiagnostics {
            trace_drift: drift,
            hermiticity_defect: defect,
            min_eigenvalue,
        };
        if drift > config.trace_tol {
            return Err(Error::IntegrationFailure {
                t,
                reason: "trace drift beyond tolerance".into(),
                diagnostics: diag,
            });
        }
        if min_eigenvalue < -config.positivity_tol {
            return Err(Error::IntegrationFailure {
                t,
                reason: "negative eigenvalue beyond tolerance".into(),
                diagnostics: diag,
            });
        }
        *rho = rho.unscale(tr.re);
        states.push(DensityOperator::from_matrix(rho.clone(), cutoff)?);
        diagnostics.push(diag);
        Ok(())
    };

    let initial_defect = hermiticity_defect(&rho);
    record(&mut rho, 0.0, initial_defect)?;
    for w in grid.windows(2) {
        let span = w[1] - w[0];
        let steps = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        let mut defect = 0.0;
        for _ in 0..steps {
            rho = lindbladian.rk4_step(&rho, h);
            defect = hermiticity_defect(&rho);
            symmetrize(&mut rho);
        }
        record(&mut rho, w[1], defect)?;
    }
    Ok((states, diagnostics))
}

/// Integrates `rho0` and reports the state at every grid time.
///
/// `grid` must start at 0, increase strictly and stay within
/// `config.t_final`. Steps are shortened so that every grid time is hit
/// exactly.
pub fn evolve(
    rho0: &DensityOperator,
    generator: Generator,
    p: &ChannelParams,
    config: &SimConfig,
    grid: &[f64],
) -> Result<Trajectory> {
    config.validate()?;
    check_grid(grid, config.t_final)?;
    let lindbladian = Lindbladian::new(generator, p, rho0.cutoff())?;
    evolve_with(rho0, &lindbladian, config, grid)
}

/// [`evolve`] with a prebuilt superoperator.
pub fn evolve_with(
    rho0: &DensityOperator,
    lindbladian: &Lindbladian,
    config: &SimConfig,
    grid: &[f64],
) -> Result<Trajectory> {
    config.validate()?;
    check_grid(grid, config.t_final)?;
    rho0.ensure_cutoff(lindbladian.cutoff())?;

    let mut warnings = Vec::new();
    let stiffness = config.dt * lindbladian.norm_estimate();
    if stiffness > RK4_STABILITY {
        warnings.push(format!(
            "dt = {} times generator norm estimate {:.3} = {:.2} exceeds the RK4 stability margin",
            config.dt,
            lindbladian.norm_estimate(),
            stiffness
        ));
    }

    let (states, diagnostics) = integrate(rho0, lindbladian, config, grid, config.dt)?;
    let convergence = if config.step_halving {
        let (fine, _) = integrate(rho0, lindbladian, config, grid, config.dt / 2.0)?;
        Some(
            states
                .iter()
                .zip(&fine)
                .map(|(a, b)| crate::max_abs_entry(&(a.matrix() - b.matrix())))
                .fold(0.0, f64::max),
        )
    } else {
        None
    };

    Ok(Trajectory {
        grid: grid.to_vec(),
        states,
        diagnostics,
        convergence,
        warnings,
    })
}
