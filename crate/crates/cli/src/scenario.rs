//! Scenario files: JSON, versioned, unknown fields rejected.

use std::path::Path;

use commonbath::fock::{entangled_coherent, CoherentSuperposition, CoherentTerm, ModeCutoff, Sign};
use commonbath::{ChannelParams, Generator, C64};
use serde::Deserialize;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Extra Fock levels added to the automatic cutoff when the reservoir is warm.
pub const THERMAL_MARGIN: usize = 4;

/// Complex number written as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct Complex(pub [f64; 2]);

impl Complex {
    pub fn value(self) -> C64 {
        C64::new(self.0[0], self.0[1])
    }

    fn is_finite(self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub channel: ChannelSpec,
    pub input_state: InputState,
    pub time_grid: TimeGrid,
    #[serde(default)]
    pub cutoff: CutoffSpec,
    #[serde(default)]
    pub generator: GeneratorChoice,
    pub outputs: Vec<Output>,
    #[serde(default)]
    pub phase_grid: Option<AxisGrid>,
    #[serde(default)]
    pub integrator: Option<IntegratorSpec>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub gamma: f64,
    #[serde(default)]
    pub n0: Option<f64>,
    /// `hbar omega0 / kT`; converted with the Planck law.
    #[serde(default)]
    pub temperature_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputState {
    Coherent {
        alpha1: Complex,
        alpha2: Complex,
    },
    Superposition {
        terms: Vec<TermSpec>,
        #[serde(default = "yes")]
        normalize: bool,
    },
    EntangledCoherent {
        alpha: Complex,
        phi: f64,
        sign: SignSpec,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coeff: Complex,
    pub alpha1: Complex,
    pub alpha2: Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum SignSpec {
    #[serde(rename = "+", alias = "plus")]
    Plus,
    #[serde(rename = "-", alias = "minus")]
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    pub n_points: usize,
}

/// `"auto"` or `[d1, d2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(try_from = "RawCutoff")]
pub enum CutoffSpec {
    #[default]
    Auto,
    Explicit([usize; 2]),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawCutoff {
    Name(String),
    Levels([usize; 2]),
}

impl TryFrom<RawCutoff> for CutoffSpec {
    type Error = String;

    fn try_from(raw: RawCutoff) -> Result<Self, String> {
        match raw {
            RawCutoff::Name(s) if s == "auto" => Ok(CutoffSpec::Auto),
            RawCutoff::Name(s) => Err(format!("cutoff must be \"auto\" or [d1, d2], got {s:?}")),
            RawCutoff::Levels(l) => Ok(CutoffSpec::Explicit(l)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorChoice {
    #[default]
    Correlated,
    Independent,
    Both,
}

impl GeneratorChoice {
    pub fn generators(self) -> Vec<Generator> {
        match self {
            GeneratorChoice::Correlated => vec![Generator::Correlated],
            GeneratorChoice::Independent => vec![Generator::Independent],
            GeneratorChoice::Both => vec![Generator::Correlated, Generator::Independent],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Purity,
    Fidelity,
    ChiGrid,
    QGrid,
    Dfs,
}

impl Output {
    pub fn name(self) -> &'static str {
        match self {
            Output::Purity => "purity",
            Output::Fidelity => "fidelity",
            Output::ChiGrid => "chi_grid",
            Output::QGrid => "q_grid",
            Output::Dfs => "dfs",
        }
    }

    pub fn is_scalar(self) -> bool {
        matches!(self, Output::Purity | Output::Fidelity | Output::Dfs)
    }
}

/// Uniform axis `min, min + step, ..., max` applied to all four real
/// coordinates of a phase-space point.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for AxisGrid {
    fn default() -> Self {
        AxisGrid {
            min: -1.0,
            max: 1.0,
            step: 1.0,
        }
    }
}

impl AxisGrid {
    pub fn validate(&self) -> Result<(), CliError> {
        let ok = self.min.is_finite()
            && self.max.is_finite()
            && self.step.is_finite()
            && self.step > 0.0
            && self.max >= self.min;
        if !ok {
            return Err(CliError::Config(format!(
                "invalid grid: min {}, max {}, step {}",
                self.min, self.max, self.step
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.min + k as f64 * self.step).collect()
    }

    /// Every `(x1, y1, x2, y2)` in row-major order, last coordinate fastest.
    pub fn points(&self) -> Vec<[f64; 4]> {
        let v = self.values();
        let mut out = Vec::with_capacity(v.len().pow(4));
        for &a in &v {
            for &b in &v {
                for &c in &v {
                    for &d in &v {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub step_halving: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub field: SweepField,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepField {
    N0,
    Gamma,
    /// Multiplies every coherent amplitude of the input.
    Alpha,
    TMax,
}

impl SweepField {
    pub fn name(self) -> &'static str {
        match self {
            SweepField::N0 => "n0",
            SweepField::Gamma => "gamma",
            SweepField::Alpha => "alpha",
            SweepField::TMax => "t_max",
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "version: unsupported schema version {}, expected {SCHEMA_VERSION}",
                self.version
            )));
        }
        self.params()?;
        let tg = self.time_grid;
        if !(tg.t_max.is_finite() && tg.t_max > 0.0) {
            return Err(CliError::Config(format!("time_grid.t_max: must be > 0, got {}", tg.t_max)));
        }
        if tg.n_points == 0 {
            return Err(CliError::Config("time_grid.n_points: must be >= 1".into()));
        }
        self.check_amplitudes()?;
        if let CutoffSpec::Explicit([d1, d2]) = self.cutoff {
            ModeCutoff::new(d1, d2).map_err(|e| CliError::Config(format!("cutoff: {e}")))?;
        }
        if self.outputs.is_empty() {
            return Err(CliError::Config("outputs: at least one output is required".into()));
        }
        if let Some(g) = &self.phase_grid {
            g.validate()?;
        }
        if let Some(dt) = self.integrator.and_then(|i| i.dt) {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(CliError::Config(format!("integrator.dt: must be > 0, got {dt}")));
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(CliError::Config("sweep.values: empty list".into()));
            }
            for &v in &s.values {
                self.with_swept(s.field, v)?.validate_point()?;
            }
        }
        Ok(())
    }

    fn validate_point(&self) -> Result<(), CliError> {
        self.params()?;
        self.check_amplitudes()?;
        if !(self.time_grid.t_max.is_finite() && self.time_grid.t_max > 0.0) {
            return Err(CliError::Config(format!(
                "time_grid.t_max: must be > 0, got {}",
                self.time_grid.t_max
            )));
        }
        Ok(())
    }

    fn check_amplitudes(&self) -> Result<(), CliError> {
        let ok = match &self.input_state {
            InputState::Coherent { alpha1, alpha2 } => alpha1.is_finite() && alpha2.is_finite(),
            InputState::Superposition { terms, .. } => {
                !terms.is_empty()
                    && terms
                        .iter()
                        .all(|t| t.coeff.is_finite() && t.alpha1.is_finite() && t.alpha2.is_finite())
            }
            InputState::EntangledCoherent { alpha, phi, .. } => alpha.is_finite() && phi.is_finite(),
        };
        if !ok {
            return Err(CliError::Config(
                "input_state: amplitudes must be finite and the term list non-empty".into(),
            ));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ChannelParams, CliError> {
        let c = self.channel;
        let p = match (c.n0, c.temperature_ratio) {
            (Some(n0), None) => ChannelParams::new(c.gamma, n0),
            (None, Some(r)) => ChannelParams::from_temperature_ratio(c.gamma, r),
            (None, None) => ChannelParams::new(c.gamma, 0.0),
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "channel: give either n0 or temperature_ratio, not both".into(),
                ))
            }
        };
        p.map_err(|e| CliError::Config(format!("channel: {e}")))
    }

    pub fn input(&self) -> Result<CoherentSuperposition, CliError> {
        let psi = match &self.input_state {
            InputState::Coherent { alpha1, alpha2 } => {
                Ok(CoherentSuperposition::coherent(alpha1.value(), alpha2.value()))
            }
            InputState::Superposition { terms, normalize } => {
                let terms = terms
                    .iter()
                    .map(|t| CoherentTerm {
                        coeff: t.coeff.value(),
                        alpha1: t.alpha1.value(),
                        alpha2: t.alpha2.value(),
                    })
                    .collect();
                if *normalize {
                    CoherentSuperposition::normalized(terms)
                } else {
                    CoherentSuperposition::new(terms)
                }
            }
            InputState::EntangledCoherent { alpha, phi, sign } => {
                let sign = match sign {
                    SignSpec::Plus => Sign::Plus,
                    SignSpec::Minus => Sign::Minus,
                };
                entangled_coherent(alpha.value(), *phi, sign)
            }
        };
        psi.map_err(|e| CliError::Config(format!("input_state: {e}")))
    }

    /// Output times `t_max * k / (n_points - 1)`; a single point means `[0]`.
    pub fn times(&self) -> Vec<f64> {
        let TimeGrid { t_max, n_points } = self.time_grid;
        if n_points == 1 {
            return vec![0.0];
        }
        (0..n_points)
            .map(|k| {
                if k + 1 == n_points {
                    t_max
                } else {
                    t_max * k as f64 / (n_points - 1) as f64
                }
            })
            .collect()
    }

    pub fn cutoff(&self) -> Result<ModeCutoff, CliError> {
        match self.cutoff {
            CutoffSpec::Explicit([d1, d2]) => {
                ModeCutoff::new(d1, d2).map_err(|e| CliError::Config(format!("cutoff: {e}")))
            }
            CutoffSpec::Auto => {
                let auto = ModeCutoff::auto(self.input()?.max_amplitude());
                if self.params()?.n0() > 0.0 {
                    let d = auto.d1() + THERMAL_MARGIN;
                    Ok(ModeCutoff::square(d).expect("positive cutoff"))
                } else {
                    Ok(auto)
                }
            }
        }
    }

    pub fn phase_grid(&self) -> AxisGrid {
        self.phase_grid.unwrap_or_default()
    }

    /// Copy with one field replaced by a sweep value; the copy has no sweep.
    pub fn with_swept(&self, field: SweepField, value: f64) -> Result<Scenario, CliError> {
        let mut s = self.clone();
        s.sweep = None;
        match field {
            SweepField::N0 => {
                s.channel.n0 = Some(value);
                s.channel.temperature_ratio = None;
            }
            SweepField::Gamma => s.channel.gamma = value,
            SweepField::TMax => s.time_grid.t_max = value,
            SweepField::Alpha => {
                if !value.is_finite() {
                    return Err(CliError::Config(format!("sweep: alpha scale must be finite, got {value}")));
                }
                let scale = |z: &mut Complex| z.0 = [z.0[0] * value, z.0[1] * value];
                match &mut s.input_state {
                    InputState::Coherent { alpha1, alpha2 } => {
                        scale(alpha1);
                        scale(alpha2);
                    }
                    InputState::Superposition { terms, .. } => {
                        for t in terms {
                            scale(&mut t.alpha1);
                            scale(&mut t.alpha2);
                        }
                    }
                    InputState::EntangledCoherent { alpha, .. } => scale(alpha),
                }
            }
        }
        Ok(s)
    }
}
