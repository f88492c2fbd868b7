//! Executes a scenario: integrates each requested generator and evaluates
//! the requested observables on the output grid.

use commonbath::channel::{chi_analytic, q_analytic};
use commonbath::fock::{dyad_expansion_of, superposition_to_density, ModeCutoff};
use commonbath::lindblad::evolve;
use commonbath::observables::{chi_numeric, overlap, purity_numeric, q_numeric, trace_distance};
use commonbath::{DensityOperator, Generator, PhasePoint, QPoint, SimConfig, C64};
use rayon::prelude::*;

use crate::scenario::{Output, Scenario};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct ChiRow {
    pub t: f64,
    pub lambda: [f64; 4],
    pub numeric: C64,
    /// Closed form for the common-reservoir channel.
    pub analytic: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QRow {
    pub t: f64,
    pub delta: [f64; 4],
    pub analytic: f64,
    pub numeric: f64,
}

/// Observables for one generator. Unrequested series stay empty.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorRun {
    pub generator: Generator,
    pub times: Vec<f64>,
    pub purity: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub trace_distance: Vec<f64>,
    pub chi: Vec<ChiRow>,
    pub q: Vec<QRow>,
    pub warnings: Vec<String>,
    pub convergence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub cutoff: ModeCutoff,
    pub outputs: Vec<Output>,
    pub runs: Vec<GeneratorRun>,
}

fn phase_point(x: [f64; 4]) -> PhasePoint {
    PhasePoint::new(C64::new(x[0], x[1]), C64::new(x[2], x[3]))
}

fn q_point(x: [f64; 4]) -> QPoint {
    QPoint::new(C64::new(x[0], x[1]), C64::new(x[2], x[3]))
}

fn sim_config(s: &Scenario, cutoff: ModeCutoff) -> Result<SimConfig, CliError> {
    let p = s.params()?;
    let mut cfg = SimConfig::new(&p, cutoff, s.time_grid.t_max);
    if let Some(spec) = s.integrator {
        if let Some(dt) = spec.dt {
            cfg = cfg.with_dt(dt);
        }
        cfg = cfg.with_step_halving(spec.step_halving);
    }
    Ok(cfg)
}

pub fn execute(s: &Scenario) -> Result<RunOutput, CliError> {
    let p = s.params()?;
    let psi = s.input()?;
    let cutoff = s.cutoff()?;
    let rho0 = superposition_to_density(&psi, cutoff)?;
    let dyads = dyad_expansion_of(&psi);
    let times = s.times();
    let cfg = sim_config(s, cutoff)?;
    let mut outputs = s.outputs.clone();
    outputs.sort();
    outputs.dedup();
    let wants = |o: Output| outputs.contains(&o);
    let grid_points = if wants(Output::ChiGrid) || wants(Output::QGrid) {
        s.phase_grid().points()
    } else {
        Vec::new()
    };

    let runs = s
        .generator
        .generators()
        .into_par_iter()
        .map(|generator| -> Result<GeneratorRun, CliError> {
            let traj = evolve(&rho0, generator, &p, &cfg, &times)?;
            let series = |f: &(dyn Fn(&DensityOperator) -> commonbath::Result<f64> + Sync)| {
                traj.states.iter().map(f).collect::<commonbath::Result<Vec<f64>>>()
            };
            let purity = if wants(Output::Purity) {
                series(&|r| Ok(purity_numeric(r)))?
            } else {
                Vec::new()
            };
            let fidelity = if wants(Output::Fidelity) {
                series(&|r| overlap(&rho0, r))?
            } else {
                Vec::new()
            };
            let distance = if wants(Output::Dfs) {
                series(&|r| trace_distance(r, &rho0))?
            } else {
                Vec::new()
            };

            let mut chi = Vec::new();
            let mut q = Vec::new();
            for (&t, state) in traj.grid.iter().zip(&traj.states) {
                if wants(Output::ChiGrid) {
                    let rows = grid_points
                        .par_iter()
                        .map(|&x| {
                            let pt = phase_point(x);
                            Ok(ChiRow {
                                t,
                                lambda: x,
                                numeric: chi_numeric(state, &pt)?,
                                analytic: chi_analytic(&dyads, &pt, &p, t)?,
                            })
                        })
                        .collect::<commonbath::Result<Vec<_>>>()?;
                    chi.extend(rows);
                }
                if wants(Output::QGrid) {
                    let rows = grid_points
                        .par_iter()
                        .map(|&x| {
                            let pt = q_point(x);
                            Ok(QRow {
                                t,
                                delta: x,
                                analytic: q_analytic(&dyads, &pt, &p, t)?,
                                numeric: q_numeric(state, &pt)?,
                            })
                        })
                        .collect::<commonbath::Result<Vec<_>>>()?;
                    q.extend(rows);
                }
            }

            Ok(GeneratorRun {
                generator,
                times: traj.grid,
                purity,
                fidelity,
                trace_distance: distance,
                chi,
                q,
                warnings: traj.warnings,
                convergence: traj.convergence,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(RunOutput {
        cutoff,
        outputs,
        runs,
    })
}

/// Q-function of the correlated-channel output at time `t` on a grid:
/// analytic and numeric columns side by side.
pub fn q_grid(s: &Scenario, t: f64, points: &[[f64; 4]]) -> Result<Vec<QRow>, CliError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(CliError::Config(format!("time must be >= 0, got {t}")));
    }
    let p = s.params()?;
    let psi = s.input()?;
    let cutoff = s.cutoff()?;
    let rho0 = superposition_to_density(&psi, cutoff)?;
    let dyads = dyad_expansion_of(&psi);
    let grid: Vec<f64> = if t > 0.0 { vec![0.0, t] } else { vec![0.0] };
    let cfg = sim_config(s, cutoff)?;
    let cfg = SimConfig { t_final: t, ..cfg };
    let traj = evolve(&rho0, Generator::Correlated, &p, &cfg, &grid)?;
    let state = traj.final_state();
    points
        .par_iter()
        .map(|&x| {
            let pt = q_point(x);
            Ok(QRow {
                t,
                delta: x,
                analytic: q_analytic(&dyads, &pt, &p, t)?,
                numeric: q_numeric(state, &pt)?,
            })
        })
        .collect::<commonbath::Result<Vec<_>>>()
        .map_err(CliError::from)
}

/// Runs every value of the scenario's sweep; results keep the value order.
pub fn sweep(s: &Scenario) -> Result<Vec<(f64, RunOutput)>, CliError> {
    let spec = s
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep: scenario declares no swept field".into()))?;
    if let Some(o) = s.outputs.iter().find(|o| !o.is_scalar()) {
        return Err(CliError::Config(format!(
            "outputs: {} is not available in a sweep (use purity, fidelity or dfs)",
            o.name()
        )));
    }
    spec.values
        .par_iter()
        .map(|&v| {
            let point = s.with_swept(spec.field, v)?;
            Ok((v, execute(&point)?))
        })
        .collect()
}
