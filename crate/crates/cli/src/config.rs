//! Experiment configuration files.
//!
//! Configs are TOML. Every file has an `[experiment]` section; the other
//! sections are read only by the experiment kinds that need them.
//!
//! ```toml
//! [experiment]
//! kind = "tv-curve"          # see `Kind`
//! seed = 42
//! replications = 100000
//! grid = [5.0, 10.0, 20.0, 40.0]
//!
//! [distribution]             # a lifetime law
//! kind = "closed_form"       # constant_hazard | table_hazard | closed_form
//! family = "uniform"         # exponential | uniform | gamma | weibull
//! low = 0.0
//! high = 1.0
//! atoms = [{ at = 0.5, jump = 0.25 }]   # optional; `mass` instead of `jump` also works
//!
//! [bounds]
//! theta = 0.9
//! ell = 1
//! b1 = 0.0
//! b2 = 0.3
//! ```
//!
//! Hazards elsewhere in the file (envelopes, reliability channels) use the
//! same inline form, e.g. `{ kind = "table_hazard", knots = [[0, 0], [10, 20]] }`.

use std::path::Path;

use serde::Deserialize;

use renewal_coupling::models::{Channels, Envelopes, Interaction};
use renewal_coupling::plmp::{SimulationMode, SimulationOptions, DEFAULT_STEP};
use renewal_coupling::renewal::QuasiRenewalSpec;
use renewal_coupling::{CustomHazard, DistributionSpec, Hazard, HazardSpec};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    RenewalSurvey,
    QuasiRenewalSurvey,
    Couple,
    TvCurve,
    PlmpRun,
    Reliability,
    Queue,
    RegenCopy,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::RenewalSurvey => "renewal-survey",
            Kind::QuasiRenewalSurvey => "quasi-renewal-survey",
            Kind::Couple => "couple",
            Kind::TvCurve => "tv-curve",
            Kind::PlmpRun => "plmp-run",
            Kind::Reliability => "reliability",
            Kind::Queue => "queue",
            Kind::RegenCopy => "regen-copy",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub distribution: Option<DistributionSpec>,
    pub bounds: Option<Bounds>,
    pub quasi: Option<QuasiConfig>,
    pub plmp: Option<PlmpConfig>,
    pub reliability: Option<ReliabilityConfig>,
    pub queue: Option<QueueConfig>,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub kind: Kind,
    pub seed: u64,
    pub replications: usize,
    /// Observation times, strictly increasing.
    #[serde(default)]
    pub grid: Vec<f64>,
    /// Simulation horizon for the model kinds.
    pub horizon: Option<f64>,
    /// Elapsed time of the first period at time 0 (renewal surveys).
    #[serde(default)]
    pub initial_elapsed: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub theta: f64,
    #[serde(default = "one")]
    pub ell: u32,
    #[serde(default = "two")]
    pub holder_r: f64,
    #[serde(default)]
    pub b1: f64,
    #[serde(default)]
    pub b2: f64,
    pub attempt_cap: Option<usize>,
    /// Largest tolerated fraction of censored replications.
    #[serde(default = "censor_default")]
    pub censor_threshold: f64,
    #[serde(default = "bins_default")]
    pub tv_bins: usize,
    /// Also compute the stationary coefficient `C̄`.
    #[serde(default)]
    pub stationary: bool,
}

fn one() -> u32 {
    1
}
fn two() -> f64 {
    2.0
}
fn censor_default() -> f64 {
    1e-4
}
fn bins_default() -> usize {
    20
}

/// How period hazards are picked inside the envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// Always the lower envelope.
    Lower,
    /// Always the upper envelope.
    Upper,
    /// Lower and upper envelopes in turn.
    Alternating,
    /// Slow period after a short one, fast period after a long one.
    History,
    /// Pointwise blend whose weight is a deterministic function of the history.
    Blend,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasiConfig {
    pub lower: HazardSpec,
    pub upper: HazardSpec,
    #[serde(default)]
    pub delay: f64,
    pub generator: Generator,
    /// Largest finite envelope moment order.
    #[serde(default = "three")]
    pub moment_order: u32,
}

fn three() -> u32 {
    3
}

impl QuasiConfig {
    pub fn spec(&self) -> QuasiRenewalSpec {
        quasi_spec(self.lower.clone(), self.upper.clone(), self.delay, self.generator).with_moment_order(self.moment_order)
    }
}

/// Quasi-renewal stream whose period hazards come from `generator`.
pub fn quasi_spec(lower: HazardSpec, upper: HazardSpec, delay: f64, generator: Generator) -> QuasiRenewalSpec {
    let (lo, hi) = (lower.clone(), upper.clone());
    QuasiRenewalSpec::new(lower, upper, delay, move |period, history| match generator {
        Generator::Lower => Hazard::Spec(lo.clone()),
        Generator::Upper => Hazard::Spec(hi.clone()),
        Generator::Alternating if period % 2 == 0 => Hazard::Spec(lo.clone()),
        Generator::Alternating => Hazard::Spec(hi.clone()),
        Generator::History => match history.last() {
            Some(&p) if p < 1.0 => Hazard::Spec(lo.clone()),
            _ => Hazard::Spec(hi.clone()),
        },
        Generator::Blend => {
            let w = history.last().map_or(0.5, |p| (p * 7.31).fract());
            let (lo, hi) = (lo.clone(), hi.clone());
            Hazard::Custom(CustomHazard::new(move |s| w * lo.eval(s) + (1.0 - w) * hi.eval(s)))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionKind {
    Zero,
    Add,
    Delete,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transition {
    pub kind: TransitionKind,
    pub labels: Vec<u32>,
    /// Constant intensity.
    pub rate: Option<f64>,
    /// Intensity as a hazard of the clock of `clock`.
    pub hazard: Option<HazardSpec>,
    pub clock: Option<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlmpConfig {
    /// `(label, clock)` pairs.
    pub initial: Vec<(u32, f64)>,
    #[serde(rename = "transition")]
    pub transitions: Vec<Transition>,
    /// Bound on the total intensity; without it the run uses fixed steps.
    pub majorant: Option<f64>,
    /// Label set of the regeneration state (all clocks zero).
    pub anchor: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReliabilityConfig {
    pub failure: [HazardSpec; 2],
    pub repair: [HazardSpec; 2],
    #[serde(default)]
    pub interactions: Vec<Interaction>,
    pub envelopes: Option<Envelopes>,
    /// Times at which the state is recorded.
    #[serde(default)]
    pub snapshots: Vec<f64>,
}

impl ReliabilityConfig {
    pub fn channels(&self) -> Channels {
        Channels {
            failure: self.failure.clone(),
            repair: self.repair.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueueConfig {
    pub arrival_rate: f64,
    pub service_rate: f64,
    /// Divide the arrival rate by `1 + n`.
    #[serde(default)]
    pub discouraged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    Event,
    Stepped,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default)]
    pub mode: ModeName,
    pub step: Option<f64>,
}

impl SimulationConfig {
    pub fn options(&self) -> SimulationOptions {
        let step = self.step.unwrap_or(DEFAULT_STEP);
        match self.mode {
            ModeName::Event => SimulationOptions::event().with_mode(SimulationMode::Event { fallback_step: step }),
            ModeName::Stepped => SimulationOptions::stepped(step),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Number of replications whose full paths or traces are written.
    #[serde(default)]
    pub paths: usize,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| {
            let key = e
                .span()
                .and_then(|s| text.get(..s.start))
                .map(section_of)
                .unwrap_or_else(|| "config".into());
            CliError::config(key, e.message().to_string())
        })?;
        config.check()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<(Self, String), CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok((Self::parse(&text)?, text))
    }

    fn check(&self) -> Result<(), CliError> {
        let e = &self.experiment;
        if e.replications == 0 {
            return Err(CliError::config("experiment.replications", "must be positive"));
        }
        if e.grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) || e.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(CliError::config("experiment.grid", "must be positive and strictly increasing"));
        }
        let needs_grid = matches!(e.kind, Kind::RenewalSurvey | Kind::QuasiRenewalSurvey | Kind::Couple | Kind::TvCurve);
        if needs_grid && e.grid.is_empty() {
            return Err(CliError::config("experiment.grid", "is required for this experiment kind"));
        }
        let needs_horizon = matches!(e.kind, Kind::PlmpRun | Kind::Reliability | Kind::Queue | Kind::RegenCopy);
        if needs_horizon && !e.horizon.is_some_and(|h| h.is_finite() && h > 0.0) {
            return Err(CliError::config("experiment.horizon", "a positive horizon is required for this experiment kind"));
        }
        let section = |present: bool, name: &str| {
            if present {
                Ok(())
            } else {
                Err(CliError::config(name, format!("section is required for `{}`", e.kind.as_str())))
            }
        };
        match e.kind {
            Kind::RenewalSurvey => section(self.distribution.is_some(), "distribution")?,
            Kind::QuasiRenewalSurvey => section(self.quasi.is_some(), "quasi")?,
            Kind::Couple | Kind::TvCurve => {
                section(self.distribution.is_some(), "distribution")?;
                section(self.bounds.is_some(), "bounds")?;
            }
            Kind::PlmpRun => section(self.plmp.is_some(), "plmp")?,
            Kind::Reliability => section(self.reliability.is_some(), "reliability")?,
            Kind::Queue => section(self.queue.is_some(), "queue")?,
            Kind::RegenCopy => {
                section(self.reliability.is_some(), "reliability")?;
                section(self.bounds.is_some(), "bounds")?;
                if self.reliability.as_ref().is_some_and(|r| r.envelopes.is_none()) {
                    return Err(CliError::config("reliability.envelopes", "section is required for `regen-copy`"));
                }
            }
        }
        if let Some(b) = &self.bounds {
            if !(b.censor_threshold >= 0.0) {
                return Err(CliError::config("bounds.censor_threshold", "must be nonnegative"));
            }
            if b.tv_bins == 0 {
                return Err(CliError::config("bounds.tv_bins", "must be positive"));
            }
        }
        if let Some(step) = self.simulation.step {
            if !(step > 0.0) {
                return Err(CliError::config("simulation.step", "must be positive"));
            }
        }
        if let Some(p) = &self.plmp {
            for (i, t) in p.transitions.iter().enumerate() {
                if t.rate.is_some() == t.hazard.is_some() {
                    return Err(CliError::config(format!("plmp.transition[{i}]"), "needs exactly one of `rate` or `hazard`"));
                }
                if t.hazard.is_some() && t.clock.is_none() {
                    return Err(CliError::config(format!("plmp.transition[{i}].clock"), "is required with `hazard`"));
                }
            }
        }
        Ok(())
    }
}

/// Name of the last `[section]` header before the error position.
fn section_of(head: &str) -> String {
    head.lines()
        .rev()
        .find_map(|l| {
            let l = l.trim();
            l.strip_prefix('[').map(|r| r.trim_start_matches('[').trim_end_matches(']').to_string())
        })
        .unwrap_or_else(|| "config".into())
}
