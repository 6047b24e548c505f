//! Piecewise-linear Markov processes: discrete labels plus clocks that grow
//! at unit slope, with state-dependent intensities for zeroing, adding and
//! deleting clocks.
//!
//! The engine is generic over [`PiecewiseModel`]; [`PlmpDynamics`] is the
//! general label/clock model, and `crate::models` ships specialised ones.

use std::fmt::Debug;
use std::io::{self, Write};
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::exp1;
use crate::stats::summarize;

/// Bound on the total intensity that stays valid for `horizon` time units
/// of event-free evolution from the current state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Majorant {
    pub rate: f64,
    pub horizon: f64,
}

impl Majorant {
    pub fn constant(rate: f64) -> Self {
        Self {
            rate,
            horizon: f64::INFINITY,
        }
    }
}

/// What an event does to the clock vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Zero,
    Add,
    Delete,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Zero => "zero",
            EventKind::Add => "add",
            EventKind::Delete => "delete",
        }
    }
}

/// A process the engine can simulate.
pub trait PiecewiseModel {
    type State: Clone + Debug;
    type Event: Clone + Debug;

    /// Lets every clock grow by `dt`.
    fn advance(&self, state: &mut Self::State, dt: f64);

    /// Pushes every possible event with its current intensity.
    fn intensities(&self, state: &Self::State, out: &mut Vec<(Self::Event, f64)>) -> Result<()>;

    /// Applies `event`; new or zeroed clocks start at `fresh()`.
    fn apply(&self, state: &mut Self::State, event: &Self::Event, fresh: &mut dyn FnMut() -> f64) -> Result<()>;

    /// Majorant for exact thinning; `None` falls back to fixed steps.
    fn majorant(&self, state: &Self::State) -> Option<Majorant>;

    fn kind(&self, event: &Self::Event) -> EventKind;

    fn labels(&self, event: &Self::Event) -> Vec<u32>;

    /// Number of clocks in `state`.
    fn rank(&self, state: &Self::State) -> usize;
}

/// How the engine advances time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SimulationMode {
    /// Exact thinning against the model's majorant, falling back to steps of
    /// `fallback_step` in states without one.
    Event { fallback_step: f64 },
    /// Fixed steps: one event with probability `R·h` per step.
    Stepped { step: f64 },
}

pub const DEFAULT_STEP: f64 = 1e-3;

impl Default for SimulationMode {
    fn default() -> Self {
        SimulationMode::Event {
            fallback_step: DEFAULT_STEP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulationOptions {
    pub mode: SimulationMode,
    /// Keep the post-event state of every event.
    pub keep_states: bool,
    /// Times at which to snapshot the state (sorted).
    pub snapshot_times: Vec<f64>,
}

impl SimulationOptions {
    pub fn event() -> Self {
        Self {
            keep_states: true,
            ..Self::default()
        }
    }

    pub fn stepped(step: f64) -> Self {
        Self {
            mode: SimulationMode::Stepped { step },
            keep_states: true,
            snapshot_times: Vec::new(),
        }
    }

    pub fn with_mode(mut self, mode: SimulationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn without_states(mut self) -> Self {
        self.keep_states = false;
        self
    }
}

/// One logged event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventRecord<S, E> {
    pub time: f64,
    pub event: E,
    pub kind: EventKind,
    pub labels: Vec<u32>,
    pub rank_before: usize,
    pub rank_after: usize,
    pub state_before: Option<S>,
    pub state_after: Option<S>,
}

/// Event log of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace<S, E> {
    pub initial: S,
    pub horizon: f64,
    pub events: Vec<EventRecord<S, E>>,
    pub final_state: S,
    /// `(time, state)` at each requested snapshot time.
    pub snapshots: Vec<(f64, S)>,
}

struct Engine<'a, M: PiecewiseModel> {
    model: &'a M,
    state: M::State,
    time: f64,
    snapshots: Vec<(f64, M::State)>,
    pending: std::iter::Peekable<std::vec::IntoIter<f64>>,
}

impl<M: PiecewiseModel> Engine<'_, M> {
    /// Advances to `target`, taking snapshots on the way.
    fn advance_to(&mut self, target: f64) {
        while let Some(&snap) = self.pending.peek() {
            if snap > target {
                break;
            }
            self.model.advance(&mut self.state, snap - self.time);
            self.time = snap;
            self.snapshots.push((snap, self.state.clone()));
            self.pending.next();
        }
        if target > self.time {
            self.model.advance(&mut self.state, target - self.time);
            self.time = target;
        }
    }
}

fn pick<E: Clone, R: Rng + ?Sized>(rates: &[(E, f64)], total: f64, rng: &mut R) -> E {
    let mut u = rng.random::<f64>() * total;
    for (e, r) in rates {
        if u < *r {
            return e.clone();
        }
        u -= r;
    }
    // Rounding left `u` past the last positive rate.
    rates.iter().rev().find(|(_, r)| *r > 0.0).map(|(e, _)| e.clone()).expect("positive total rate")
}

fn total_rate<E>(rates: &[(E, f64)], describe: impl Fn() -> String) -> Result<f64> {
    let mut total = 0.0;
    for (_, r) in rates {
        if !(*r >= 0.0) || !r.is_finite() {
            return Err(Error::UnboundedIntensity { state: describe() });
        }
        total += r;
    }
    Ok(total)
}

/// Simulates `model` from `initial` on `[0, horizon]`.
pub fn simulate<M: PiecewiseModel, R: Rng + ?Sized>(
    model: &M,
    initial: M::State,
    horizon: f64,
    options: &SimulationOptions,
    rng: &mut R,
) -> Result<Trace<M::State, M::Event>> {
    if !(horizon >= 0.0) {
        return Err(Error::InvalidSpec(format!("horizon must be nonnegative, got {horizon}")));
    }
    let mut snaps: Vec<f64> = options.snapshot_times.iter().copied().filter(|t| *t <= horizon).collect();
    snaps.sort_by(f64::total_cmp);
    let mut engine = Engine {
        model,
        state: initial.clone(),
        time: 0.0,
        snapshots: Vec::new(),
        pending: snaps.into_iter().peekable(),
    };
    let mut events = Vec::new();
    let mut rates = Vec::new();

    let mut fire = |engine: &mut Engine<'_, M>, event: M::Event, fresh: &mut dyn FnMut() -> f64| -> Result<()> {
        let rank_before = model.rank(&engine.state);
        let before = options.keep_states.then(|| engine.state.clone());
        model.apply(&mut engine.state, &event, fresh)?;
        events.push(EventRecord {
            time: engine.time,
            kind: model.kind(&event),
            labels: model.labels(&event),
            rank_before,
            rank_after: model.rank(&engine.state),
            state_before: before,
            state_after: options.keep_states.then(|| engine.state.clone()),
            event,
        });
        Ok(())
    };

    while engine.time < horizon {
        let majorant = match options.mode {
            SimulationMode::Event { .. } => model.majorant(&engine.state),
            SimulationMode::Stepped { .. } => None,
        };
        match majorant {
            Some(maj) => {
                if !(maj.rate >= 0.0) || !maj.rate.is_finite() {
                    return Err(Error::UnboundedIntensity {
                        state: format!("{:?}", engine.state),
                    });
                }
                let window = maj.horizon.max(0.0);
                let dt = if maj.rate > 0.0 { exp1(rng) / maj.rate } else { f64::INFINITY };
                if dt > window {
                    let target = (engine.time + window).min(horizon);
                    engine.advance_to(target);
                    continue;
                }
                if engine.time + dt > horizon {
                    engine.advance_to(horizon);
                    break;
                }
                engine.advance_to(engine.time + dt);
                rates.clear();
                model.intensities(&engine.state, &mut rates)?;
                let total = total_rate(&rates, || format!("{:?}", engine.state))?;
                if total > maj.rate * (1.0 + 1e-9) {
                    return Err(Error::MajorantViolated {
                        time: engine.time,
                        total,
                        majorant: maj.rate,
                        state: format!("{:?}", engine.state),
                    });
                }
                if rng.random::<f64>() * maj.rate < total {
                    let event = pick(&rates, total, rng);
                    fire(&mut engine, event, &mut || 0.0)?;
                }
            }
            None => {
                let h = match options.mode {
                    SimulationMode::Event { fallback_step } => fallback_step,
                    SimulationMode::Stepped { step } => step,
                };
                if !(h > 0.0) {
                    return Err(Error::InvalidSpec(format!("step must be positive, got {h}")));
                }
                let h = h.min(horizon - engine.time);
                rates.clear();
                model.intensities(&engine.state, &mut rates)?;
                let total = total_rate(&rates, || format!("{:?}", engine.state))?;
                let prob = total * h;
                if prob > 1.0 {
                    return Err(Error::StepTooLarge { prob });
                }
                let happens = rng.random::<f64>() < prob;
                let event = happens.then(|| pick(&rates, total, rng));
                engine.advance_to(engine.time + h);
                if let Some(event) = event {
                    let mut fresh = || rng.random::<f64>() * h;
                    fire(&mut engine, event, &mut fresh)?;
                }
            }
        }
    }
    engine.advance_to(horizon);
    Ok(Trace {
        initial,
        horizon,
        events,
        final_state: engine.state,
        snapshots: engine.snapshots,
    })
}

/// Labels in ascending order and one clock per label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlmpState {
    labels: Vec<u32>,
    clocks: Vec<f64>,
}

impl PlmpState {
    /// Builds a state from `(label, clock)` pairs, sorting by label.
    pub fn new(pairs: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut pairs: Vec<(u32, f64)> = pairs.into_iter().collect();
        pairs.sort_by_key(|p| p.0);
        if pairs.is_empty() {
            return Err(Error::InvalidTransition("a state needs at least one label".into()));
        }
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidTransition("labels must be distinct".into()));
        }
        if let Some(p) = pairs.iter().find(|p| !(p.1 >= 0.0)) {
            return Err(Error::InvalidTransition(format!("clock of label {} is negative", p.0)));
        }
        Ok(Self {
            labels: pairs.iter().map(|p| p.0).collect(),
            clocks: pairs.iter().map(|p| p.1).collect(),
        })
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn clocks(&self) -> &[f64] {
        &self.clocks
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn clock(&self, label: u32) -> Option<f64> {
        self.labels.binary_search(&label).ok().map(|i| self.clocks[i])
    }

    pub fn contains_all(&self, set: &[u32]) -> bool {
        set.iter().all(|l| self.labels.binary_search(l).is_ok())
    }

    pub fn contains_none(&self, set: &[u32]) -> bool {
        set.iter().all(|l| self.labels.binary_search(l).is_err())
    }
}

/// A transition applying to label set `M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum PlmpEvent {
    Zero(Vec<u32>),
    Add(Vec<u32>),
    Delete(Vec<u32>),
}

pub type RateFn = Arc<dyn Fn(&PlmpState) -> f64 + Send + Sync>;
pub type MajorantFn = Arc<dyn Fn(&PlmpState) -> Majorant + Send + Sync>;

/// Sparse registry of transitions: each entry names its label set `M` and
/// an intensity callback on the full state.
#[derive(Clone, Default)]
pub struct PlmpDynamics {
    zero: Vec<(Vec<u32>, RateFn)>,
    add: Vec<(Vec<u32>, RateFn)>,
    delete: Vec<(Vec<u32>, RateFn)>,
    majorant: Option<MajorantFn>,
}

impl Debug for PlmpDynamics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sets = |v: &Vec<(Vec<u32>, RateFn)>| v.iter().map(|e| e.0.clone()).collect::<Vec<_>>();
        f.debug_struct("PlmpDynamics")
            .field("zero", &sets(&self.zero))
            .field("add", &sets(&self.add))
            .field("delete", &sets(&self.delete))
            .field("majorant", &self.majorant.is_some())
            .finish()
    }
}

fn canonical(mut set: Vec<u32>) -> Vec<u32> {
    set.sort_unstable();
    set.dedup();
    set
}

impl PlmpDynamics {
    pub fn new() -> Self {
        Self::default()
    }

    /// Zeroes the clocks of `set` (all present) at rate `rate(state)`.
    pub fn zero(mut self, set: Vec<u32>, rate: impl Fn(&PlmpState) -> f64 + Send + Sync + 'static) -> Self {
        self.zero.push((canonical(set), Arc::new(rate)));
        self
    }

    /// Adds fresh clocks for `set` (all absent).
    pub fn add(mut self, set: Vec<u32>, rate: impl Fn(&PlmpState) -> f64 + Send + Sync + 'static) -> Self {
        self.add.push((canonical(set), Arc::new(rate)));
        self
    }

    /// Removes the clocks of `set` (all present, at least one label remains).
    pub fn delete(mut self, set: Vec<u32>, rate: impl Fn(&PlmpState) -> f64 + Send + Sync + 'static) -> Self {
        self.delete.push((canonical(set), Arc::new(rate)));
        self
    }

    pub fn with_majorant(mut self, majorant: impl Fn(&PlmpState) -> Majorant + Send + Sync + 'static) -> Self {
        self.majorant = Some(Arc::new(majorant));
        self
    }

    /// Shorthand for a majorant that holds everywhere.
    pub fn with_constant_majorant(self, rate: f64) -> Self {
        self.with_majorant(move |_| Majorant::constant(rate))
    }
}

impl PiecewiseModel for PlmpDynamics {
    type State = PlmpState;
    type Event = PlmpEvent;

    fn advance(&self, state: &mut PlmpState, dt: f64) {
        state.clocks.iter_mut().for_each(|c| *c += dt);
    }

    fn intensities(&self, state: &PlmpState, out: &mut Vec<(PlmpEvent, f64)>) -> Result<()> {
        for (set, rate) in &self.zero {
            if state.contains_all(set) {
                out.push((PlmpEvent::Zero(set.clone()), rate(state)));
            }
        }
        for (set, rate) in &self.add {
            if state.contains_none(set) {
                out.push((PlmpEvent::Add(set.clone()), rate(state)));
            }
        }
        for (set, rate) in &self.delete {
            if state.contains_all(set) && state.rank() > set.len() {
                out.push((PlmpEvent::Delete(set.clone()), rate(state)));
            }
        }
        Ok(())
    }

    fn apply(&self, state: &mut PlmpState, event: &PlmpEvent, fresh: &mut dyn FnMut() -> f64) -> Result<()> {
        match event {
            PlmpEvent::Zero(set) => {
                for l in set {
                    let i = state
                        .labels
                        .binary_search(l)
                        .map_err(|_| Error::InvalidTransition(format!("zeroing absent label {l}")))?;
                    state.clocks[i] = fresh();
                }
            }
            PlmpEvent::Add(set) => {
                for &l in set {
                    match state.labels.binary_search(&l) {
                        Ok(_) => return Err(Error::InvalidTransition(format!("adding present label {l}"))),
                        Err(i) => {
                            state.labels.insert(i, l);
                            state.clocks.insert(i, fresh());
                        }
                    }
                }
            }
            PlmpEvent::Delete(set) => {
                if state.rank() <= set.len() {
                    return Err(Error::InvalidTransition("deleting every label".into()));
                }
                for l in set {
                    let i = state
                        .labels
                        .binary_search(l)
                        .map_err(|_| Error::InvalidTransition(format!("deleting absent label {l}")))?;
                    state.labels.remove(i);
                    state.clocks.remove(i);
                }
            }
        }
        Ok(())
    }

    fn majorant(&self, state: &PlmpState) -> Option<Majorant> {
        self.majorant.as_ref().map(|m| m(state))
    }

    fn kind(&self, event: &PlmpEvent) -> EventKind {
        match event {
            PlmpEvent::Zero(_) => EventKind::Zero,
            PlmpEvent::Add(_) => EventKind::Add,
            PlmpEvent::Delete(_) => EventKind::Delete,
        }
    }

    fn labels(&self, event: &PlmpEvent) -> Vec<u32> {
        match event {
            PlmpEvent::Zero(s) | PlmpEvent::Add(s) | PlmpEvent::Delete(s) => s.clone(),
        }
    }

    fn rank(&self, state: &PlmpState) -> usize {
        state.rank()
    }
}

/// Simulates the label/clock process.
pub fn simulate_plmp<R: Rng + ?Sized>(
    initial: PlmpState,
    dynamics: &PlmpDynamics,
    horizon: f64,
    options: &SimulationOptions,
    rng: &mut R,
) -> Result<Trace<PlmpState, PlmpEvent>> {
    simulate(dynamics, initial, horizon, options, rng)
}

/// Times of events whose post-event state satisfies `anchor`.
///
/// Needs a trace recorded with post-event states.
pub fn detect_regenerations<S, E>(trace: &Trace<S, E>, anchor: impl Fn(&S) -> bool) -> Vec<f64> {
    trace
        .events
        .iter()
        .filter(|e| e.state_after.as_ref().is_some_and(&anchor))
        .map(|e| e.time)
        .collect()
}

/// Moments of regeneration-cycle lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleStats {
    pub cycles: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub second_moment: f64,
    pub second_moment_se: f64,
    /// `m₂ / m₁`, the Lorden functional of the cycle law.
    pub xi_hat: f64,
    /// Delta-method standard error of `xi_hat`.
    pub xi_se: f64,
}

pub fn cycle_statistics(regenerations: &[f64]) -> Result<CycleStats> {
    if regenerations.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: regenerations.len(),
        });
    }
    let lengths: Vec<f64> = regenerations.windows(2).map(|w| w[1] - w[0]).collect();
    cycle_statistics_from_lengths(&lengths)
}

/// Same as [`cycle_statistics`] but from cycle lengths directly.
pub fn cycle_statistics_from_lengths(lengths: &[f64]) -> Result<CycleStats> {
    if lengths.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let m1 = summarize(lengths.iter().copied());
    let m2 = summarize(lengths.iter().map(|x| x * x));
    let n = lengths.len() as f64;
    let cov = if lengths.len() > 1 {
        lengths.iter().map(|x| (x - m1.mean) * (x * x - m2.mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let (a, b) = (m1.mean, m2.mean);
    let var = (m2.variance / (a * a) + b * b * m1.variance / a.powi(4) - 2.0 * b * cov / a.powi(3)) / n;
    Ok(CycleStats {
        cycles: lengths.len(),
        mean: a,
        mean_se: m1.se,
        second_moment: b,
        second_moment_se: m2.se,
        xi_hat: b / a,
        xi_se: var.max(0.0).sqrt(),
    })
}

/// CSV columns `time,kind,labels,rank_before,rank_after`; labels are `;`-separated.
pub fn write_trace_csv<S, E, W: Write>(trace: &Trace<S, E>, out: &mut W) -> io::Result<()> {
    writeln!(out, "time,kind,labels,rank_before,rank_after")?;
    for e in &trace.events {
        let labels: Vec<String> = e.labels.iter().map(u32::to_string).collect();
        writeln!(
            out,
            "{},{},{},{},{}",
            e.time,
            e.kind.as_str(),
            labels.join(";"),
            e.rank_before,
            e.rank_after
        )?;
    }
    Ok(())
}
