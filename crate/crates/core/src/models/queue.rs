//! Infinite-server queue with state-dependent arrival and service
//! intensities.
//!
//! The state holds the time since the last arrival and the elapsed service
//! time of every customer, in arrival order.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::plmp::{simulate, EventKind, Majorant, PiecewiseModel, SimulationOptions, Trace};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueState {
    pub since_arrival: f64,
    /// Elapsed service times, oldest customer first.
    pub service: Vec<f64>,
}

impl QueueState {
    pub fn empty() -> Self {
        Self {
            since_arrival: 0.0,
            service: Vec::new(),
        }
    }

    pub fn customers(&self) -> usize {
        self.service.len()
    }

    /// The state just after an arrival into an empty system.
    pub fn is_regeneration(&self) -> bool {
        self.service.len() == 1 && self.since_arrival == 0.0 && self.service[0] == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QueueEvent {
    Arrival,
    /// Departure of the customer at this position in arrival order.
    Departure(usize),
}

pub type ArrivalRate = Arc<dyn Fn(&QueueState) -> f64 + Send + Sync>;
pub type ServiceRate = Arc<dyn Fn(&QueueState, usize) -> f64 + Send + Sync>;
type QueueMajorant = Arc<dyn Fn(&QueueState) -> Majorant + Send + Sync>;

#[derive(Clone)]
pub struct QueueDynamics {
    arrival: ArrivalRate,
    service: ServiceRate,
    majorant: Option<QueueMajorant>,
}

impl std::fmt::Debug for QueueDynamics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QueueDynamics")
            .field("majorant", &self.majorant.is_some())
            .finish_non_exhaustive()
    }
}

impl QueueDynamics {
    pub fn new(
        arrival: impl Fn(&QueueState) -> f64 + Send + Sync + 'static,
        service: impl Fn(&QueueState, usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            arrival: Arc::new(arrival),
            service: Arc::new(service),
            majorant: None,
        }
    }

    /// Poisson arrivals at rate `lambda`, exponential services at rate `mu`.
    pub fn mm_inf(lambda: f64, mu: f64) -> Self {
        Self::new(move |_| lambda, move |_, _| mu)
            .with_majorant(move |s| Majorant::constant(lambda + mu * s.customers() as f64))
    }

    /// Majorant valid until the next event.
    pub fn with_majorant(mut self, majorant: impl Fn(&QueueState) -> Majorant + Send + Sync + 'static) -> Self {
        self.majorant = Some(Arc::new(majorant));
        self
    }
}

impl PiecewiseModel for QueueDynamics {
    type State = QueueState;
    type Event = QueueEvent;

    fn advance(&self, state: &mut QueueState, dt: f64) {
        state.since_arrival += dt;
        state.service.iter_mut().for_each(|x| *x += dt);
    }

    fn intensities(&self, state: &QueueState, out: &mut Vec<(QueueEvent, f64)>) -> Result<()> {
        out.push((QueueEvent::Arrival, (self.arrival)(state)));
        for i in 0..state.service.len() {
            out.push((QueueEvent::Departure(i), (self.service)(state, i)));
        }
        Ok(())
    }

    fn apply(&self, state: &mut QueueState, event: &QueueEvent, fresh: &mut dyn FnMut() -> f64) -> Result<()> {
        match *event {
            QueueEvent::Arrival => {
                state.since_arrival = fresh();
                state.service.push(state.since_arrival);
            }
            QueueEvent::Departure(i) => {
                if i >= state.service.len() {
                    return Err(Error::InvalidTransition(format!("no customer at position {i}")));
                }
                state.service.remove(i);
            }
        }
        Ok(())
    }

    fn majorant(&self, state: &QueueState) -> Option<Majorant> {
        self.majorant.as_ref().map(|m| m(state))
    }

    fn kind(&self, event: &QueueEvent) -> EventKind {
        match event {
            QueueEvent::Arrival => EventKind::Add,
            QueueEvent::Departure(_) => EventKind::Delete,
        }
    }

    fn labels(&self, event: &QueueEvent) -> Vec<u32> {
        match event {
            QueueEvent::Arrival => vec![0],
            QueueEvent::Departure(i) => vec![*i as u32 + 1],
        }
    }

    fn rank(&self, state: &QueueState) -> usize {
        state.service.len() + 1
    }
}

pub fn simulate_queue<R: Rng + ?Sized>(
    dynamics: &QueueDynamics,
    initial: QueueState,
    horizon: f64,
    options: &SimulationOptions,
    rng: &mut R,
) -> Result<Trace<QueueState, QueueEvent>> {
    simulate(dynamics, initial, horizon, options, rng)
}

/// Time average of the number of customers over the trace horizon.
pub fn mean_customers(trace: &Trace<QueueState, QueueEvent>) -> f64 {
    let mut area = 0.0;
    let mut n = trace.initial.customers() as f64;
    let mut since = 0.0;
    for e in &trace.events {
        area += n * (e.time - since);
        since = e.time;
        n = e.rank_after as f64 - 1.0;
    }
    area += n * (trace.horizon - since);
    area / trace.horizon
}
