//! Concrete piecewise-linear Markov models.

pub mod queue;
pub mod regen;
pub mod reliability;

pub use queue::{mean_customers, simulate_queue, QueueDynamics, QueueEvent, QueueState};
pub use regen::{build_regenerative_copy, certified_regeneration_probability, time_to_regeneration, RegenerativeCopy, RegenerativeCopyPlan, Scenario};
pub use reliability::{
    availability, simulate_reliability, Channel, Channels, Envelopes, Flip, Interaction, ReliabilityDynamics, ReliabilityState,
};
