//! Two repairable elements, one working as a warm reserve for the other.
//!
//! Each element alternates between working (mode 0) and repair (mode 1);
//! its elapsed time in the current mode is a unit-slope clock. Intensities
//! may depend on the full state of the pair.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intensity::HazardSpec;
use crate::plmp::{simulate, EventKind, Majorant, PiecewiseModel, SimulationOptions, Trace};
use crate::renewal::QuasiRenewalSpec;

pub const WORKING: u8 = 0;
pub const REPAIR: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReliabilityState {
    pub modes: [u8; 2],
    pub elapsed: [f64; 2],
}

impl ReliabilityState {
    /// Both elements working, both clocks at zero.
    pub fn fresh() -> Self {
        Self {
            modes: [WORKING; 2],
            elapsed: [0.0; 2],
        }
    }
}

/// Mode flip of element 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Flip(pub usize);

pub type StateRate = Arc<dyn Fn(&ReliabilityState) -> f64 + Send + Sync>;

/// Which intensity an [`Interaction`] scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Failure,
    Repair,
}

/// Multiplies one element's intensity by `factor` while the other element is
/// in `other_mode`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub element: usize,
    pub channel: Channel,
    pub other_mode: u8,
    pub factor: f64,
}

/// Per-element hazards of the time spent in the current mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channels {
    pub failure: [HazardSpec; 2],
    pub repair: [HazardSpec; 2],
}

impl Channels {
    pub fn hazard(&self, element: usize, mode: u8) -> &HazardSpec {
        if mode == WORKING {
            &self.failure[element]
        } else {
            &self.repair[element]
        }
    }
}

/// Common envelope `φ ≤ intensity ≤ Φ` for every channel, with delay `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelopes {
    pub lower: HazardSpec,
    pub upper: HazardSpec,
    #[serde(default)]
    pub delay: f64,
}

type StateMajorant = Arc<dyn Fn(&ReliabilityState) -> Majorant + Send + Sync>;

#[derive(Clone)]
pub struct ReliabilityDynamics {
    failure: [StateRate; 2],
    repair: [StateRate; 2],
    majorant: Option<StateMajorant>,
    channels: Option<Channels>,
    envelopes: Option<Envelopes>,
}

impl std::fmt::Debug for ReliabilityDynamics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReliabilityDynamics")
            .field("channels", &self.channels)
            .field("envelopes", &self.envelopes)
            .field("majorant", &self.majorant.is_some())
            .finish_non_exhaustive()
    }
}

/// Window over which the channel majorant is taken.
const MAJORANT_WINDOW: f64 = 1.0;

impl ReliabilityDynamics {
    /// Arbitrary state-dependent intensities.
    pub fn custom(failure: [StateRate; 2], repair: [StateRate; 2]) -> Self {
        Self {
            failure,
            repair,
            majorant: None,
            channels: None,
            envelopes: None,
        }
    }

    /// Intensities `hazard(elapsed)` per element and mode, optionally scaled
    /// by interactions with the other element's mode.
    pub fn from_channels(channels: Channels, interactions: &[Interaction]) -> Result<Self> {
        if let Some(bad) = interactions.iter().find(|i| i.element > 1 || i.other_mode > 1 || !(i.factor >= 0.0)) {
            return Err(Error::InvalidSpec(format!("invalid interaction {bad:?}")));
        }
        let rate = |element: usize, channel: Channel| -> StateRate {
            let hazard = match channel {
                Channel::Failure => channels.failure[element].clone(),
                Channel::Repair => channels.repair[element].clone(),
            };
            let scaling: Vec<Interaction> = interactions
                .iter()
                .copied()
                .filter(|i| i.element == element && i.channel == channel)
                .collect();
            Arc::new(move |s: &ReliabilityState| {
                let factor: f64 = scaling
                    .iter()
                    .filter(|i| s.modes[1 - element] == i.other_mode)
                    .map(|i| i.factor)
                    .product();
                factor * hazard.eval(s.elapsed[element])
            })
        };
        let failure = [rate(0, Channel::Failure), rate(1, Channel::Failure)];
        let repair = [rate(0, Channel::Repair), rate(1, Channel::Repair)];
        let max_factor = |element: usize, mode: u8| -> f64 {
            let channel = if mode == WORKING { Channel::Failure } else { Channel::Repair };
            let mut up = 1.0f64;
            for other in [WORKING, REPAIR] {
                let f: f64 = interactions
                    .iter()
                    .filter(|i| i.element == element && i.channel == channel && i.other_mode == other)
                    .map(|i| i.factor)
                    .product();
                up = up.max(f);
            }
            up
        };
        let factors = [[max_factor(0, 0), max_factor(0, 1)], [max_factor(1, 0), max_factor(1, 1)]];
        let ch = channels.clone();
        let majorant: StateMajorant = Arc::new(move |s: &ReliabilityState| {
            let rate = (0..2)
                .map(|e| {
                    let x = s.elapsed[e];
                    factors[e][s.modes[e] as usize] * ch.hazard(e, s.modes[e]).sup_on(x, x + MAJORANT_WINDOW)
                })
                .sum();
            Majorant {
                rate,
                horizon: MAJORANT_WINDOW,
            }
        });
        Ok(Self {
            failure,
            repair,
            majorant: Some(majorant),
            channels: interactions.is_empty().then_some(channels),
            envelopes: None,
        })
    }

    pub fn with_majorant(mut self, majorant: impl Fn(&ReliabilityState) -> Majorant + Send + Sync + 'static) -> Self {
        self.majorant = Some(Arc::new(majorant));
        self
    }

    /// Declares envelopes; simulation then rejects any intensity outside them.
    pub fn with_envelopes(mut self, envelopes: Envelopes) -> Self {
        self.envelopes = Some(envelopes);
        self
    }

    pub fn envelopes(&self) -> Option<&Envelopes> {
        self.envelopes.as_ref()
    }

    /// Per-element hazards when every intensity depends only on the element's
    /// own mode and elapsed time.
    pub fn separable_channels(&self) -> Option<&Channels> {
        self.channels.as_ref()
    }

    pub fn rate(&self, state: &ReliabilityState, element: usize) -> f64 {
        if state.modes[element] == WORKING {
            (self.failure[element])(state)
        } else {
            (self.repair[element])(state)
        }
    }

    /// Envelope admissibility and pointwise containment on a probe grid.
    pub fn diagnostics(&self) -> Vec<String> {
        let Some(env) = &self.envelopes else {
            return Vec::new();
        };
        let quasi = QuasiRenewalSpec::new(env.lower.clone(), env.upper.clone(), env.delay, |_, _| {
            crate::Hazard::Spec(HazardSpec::ConstantHazard { rate: 0.0 })
        })
        .with_moment_order(2);
        let mut out: Vec<String> = quasi
            .diagnostics()
            .into_iter()
            .map(|m| m.replacen("quasi-renewal", "envelope", 1))
            .collect();
        let probes: Vec<f64> = (0..200).map(|i| 0.05 * i as f64).collect();
        'outer: for modes in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            for &x in &probes {
                for &y in &[0.0, 0.5, 2.0] {
                    for e in 0..2 {
                        let mut elapsed = [y; 2];
                        elapsed[e] = x;
                        let s = ReliabilityState { modes, elapsed };
                        let v = self.rate(&s, e);
                        let (lo, hi) = (env.lower.eval(x), env.upper.eval(x));
                        if !(v >= lo * (1.0 - 1e-12) && v <= hi * (1.0 + 1e-12)) {
                            out.push(format!(
                                "envelope condition d: element {e} intensity {v} outside [{lo}, {hi}] at elapsed {x} in modes {modes:?}"
                            ));
                            break 'outer;
                        }
                    }
                }
            }
        }
        out
    }
}

impl PiecewiseModel for ReliabilityDynamics {
    type State = ReliabilityState;
    type Event = Flip;

    fn advance(&self, state: &mut ReliabilityState, dt: f64) {
        state.elapsed[0] += dt;
        state.elapsed[1] += dt;
    }

    fn intensities(&self, state: &ReliabilityState, out: &mut Vec<(Flip, f64)>) -> Result<()> {
        for e in 0..2 {
            let value = self.rate(state, e);
            if let Some(env) = &self.envelopes {
                let x = state.elapsed[e];
                let (lower, upper) = (env.lower.eval(x), env.upper.eval(x));
                if !(value >= lower * (1.0 - 1e-12) && value <= upper * (1.0 + 1e-12)) {
                    return Err(Error::StateEnvelopeViolation {
                        element: e,
                        elapsed: x,
                        value,
                        lower,
                        upper,
                    });
                }
            }
            out.push((Flip(e), value));
        }
        Ok(())
    }

    fn apply(&self, state: &mut ReliabilityState, event: &Flip, fresh: &mut dyn FnMut() -> f64) -> Result<()> {
        let e = event.0;
        if e > 1 {
            return Err(Error::InvalidTransition(format!("no element {e}")));
        }
        state.modes[e] = 1 - state.modes[e];
        state.elapsed[e] = fresh();
        Ok(())
    }

    fn majorant(&self, state: &ReliabilityState) -> Option<Majorant> {
        self.majorant.as_ref().map(|m| m(state))
    }

    fn kind(&self, _: &Flip) -> EventKind {
        EventKind::Zero
    }

    fn labels(&self, event: &Flip) -> Vec<u32> {
        vec![event.0 as u32 + 1]
    }

    fn rank(&self, _: &ReliabilityState) -> usize {
        2
    }
}

pub fn simulate_reliability<R: Rng + ?Sized>(
    dynamics: &ReliabilityDynamics,
    initial: ReliabilityState,
    horizon: f64,
    options: &SimulationOptions,
    rng: &mut R,
) -> Result<Trace<ReliabilityState, Flip>> {
    simulate(dynamics, initial, horizon, options, rng)
}

/// Fraction of `[0, horizon]` during which `element` is working.
pub fn availability(trace: &Trace<ReliabilityState, Flip>, element: usize) -> f64 {
    let mut working = 0.0;
    let mut mode = trace.initial.modes[element];
    let mut since = 0.0;
    for e in trace.events.iter().filter(|e| e.event.0 == element) {
        if mode == WORKING {
            working += e.time - since;
        }
        mode = 1 - mode;
        since = e.time;
    }
    if mode == WORKING {
        working += trace.horizon - since;
    }
    working / trace.horizon
}
