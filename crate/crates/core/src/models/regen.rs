//! Regenerative copy of the two-element reliability process.
//!
//! The copy has the same one-dimensional laws as the original process but
//! returns to `((0,0);(0,0))` (both working, both clocks zero) with a
//! certified probability in every cycle:
//!
//! * when element 0 fails while element 1 is under repair with elapsed time
//!   `a ≤ Θ`, element 0's repair and element 1's residual repair are drawn
//!   from a maximal coupling; if they meet, both repairs end together;
//! * when element 0's repair ends while element 1 is working with elapsed
//!   time `a ≤ Θ`, the two work periods are coupled; a meet makes both fail
//!   together, which leads to the first case with `a = 0`;
//! * otherwise the cycle runs unmodified and the procedure is retried at the
//!   next failure of element 0.
//!
//! As in the renewal construction, attempts are skipped while element 1 is
//! still inside a period whose remainder came out of a failed attempt.
//! Only separable dynamics (each intensity depends on its own element's mode
//! and elapsed time) are supported: with interactions the residual law of
//! one element given the other's path is no longer a fixed residual law.

use rand::Rng;
use serde::Serialize;

use super::reliability::{ReliabilityDynamics, ReliabilityState, REPAIR, WORKING};
use crate::coupling::maximal_couple;
use crate::error::{Error, Result};
use crate::intensity::{common_part_inf, DistributionView, IntensitySpec};

/// Constants certifying the per-cycle regeneration probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegenerativeCopyPlan {
    pub theta: f64,
    /// `E η + E η² / (2 E ζ)`, η with the lower and ζ with the upper envelope hazard.
    pub xi: f64,
    /// `1 − Ξ/Θ`.
    pub q1: f64,
    /// Lower-envelope CDF at Θ.
    pub q2: f64,
    /// `inf_{a ≤ Θ} κ(a)` of the lower-envelope law.
    pub kappa_theta: f64,
    pub kappa_grid_step: f64,
}

impl RegenerativeCopyPlan {
    pub fn new(dynamics: &ReliabilityDynamics, theta: f64) -> Result<Self> {
        let env = dynamics
            .envelopes()
            .ok_or_else(|| Error::InvalidSpec("regenerative copy needs envelopes".into()))?;
        if let Some(msg) = dynamics.diagnostics().into_iter().next() {
            return Err(Error::InvalidSpec(msg));
        }
        let eta = IntensitySpec::from_spec(env.lower.clone()).view()?;
        let zeta = IntensitySpec::from_spec(env.upper.clone()).view()?;
        let xi = eta.moment(1)? + eta.moment(2)? / (2.0 * zeta.moment(1)?);
        if !(theta > xi) {
            return Err(Error::ThetaNotAboveXi { theta, xi });
        }
        let inf = common_part_inf(&eta, theta)?;
        Ok(Self {
            theta,
            xi,
            q1: 1.0 - xi / theta,
            q2: eta.cdf(theta),
            kappa_theta: inf.value,
            kappa_grid_step: inf.grid_step,
        })
    }
}

/// `κ(Θ)·q₁·q₂`, a lower bound on the per-cycle regeneration probability.
pub fn certified_regeneration_probability(plan: &RegenerativeCopyPlan) -> f64 {
    plan.kappa_theta * plan.q1 * plan.q2
}

/// Which branch a cycle decision took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Element 0 failed while element 1 was under repair.
    RepairCoupling,
    /// Element 0's repair ended while element 1 was working.
    WorkCoupling,
    /// Conditions not met; the cycle runs unmodified.
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Attempt {
    pub time: f64,
    pub scenario: Scenario,
    /// Element 1's elapsed time in its mode at the decision.
    pub elapsed_other: f64,
    pub met: bool,
}

/// Output of [`build_regenerative_copy`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegenerativeCopy {
    pub plan: RegenerativeCopyPlan,
    pub horizon: f64,
    /// `(time, element)` of every mode flip.
    pub flips: Vec<(f64, usize)>,
    pub regenerations: Vec<f64>,
    /// Failures of element 0 that opened a new cycle.
    pub cycles: usize,
    /// Cycles that ended in a regeneration.
    pub successful_cycles: usize,
    pub attempts: Vec<Attempt>,
    pub snapshots: Vec<(f64, ReliabilityState)>,
    pub final_state: ReliabilityState,
}

impl RegenerativeCopy {
    pub fn cycle_success_rate(&self) -> f64 {
        self.successful_cycles as f64 / self.cycles.max(1) as f64
    }

    /// Cycle lengths between consecutive regenerations (time 0 included).
    pub fn cycle_lengths(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.regenerations
            .iter()
            .map(|&r| {
                let d = r - prev;
                prev = r;
                d
            })
            .collect()
    }
}

struct Laws {
    work: [DistributionView; 2],
    repair: [DistributionView; 2],
}

impl Laws {
    fn of(&self, element: usize, mode: u8) -> &DistributionView {
        if mode == WORKING {
            &self.work[element]
        } else {
            &self.repair[element]
        }
    }
}

/// Runs the regenerative copy from `((0,0);(0,0))` on `[0, horizon]`.
pub fn build_regenerative_copy<R: Rng + ?Sized>(
    dynamics: &ReliabilityDynamics,
    plan: &RegenerativeCopyPlan,
    horizon: f64,
    snapshot_times: &[f64],
    rng: &mut R,
) -> Result<RegenerativeCopy> {
    run_copy(dynamics, plan, horizon, snapshot_times, false, rng)
}

/// Time of the first regeneration of the copy, if it happens by `horizon`.
pub fn time_to_regeneration<R: Rng + ?Sized>(
    dynamics: &ReliabilityDynamics,
    plan: &RegenerativeCopyPlan,
    horizon: f64,
    rng: &mut R,
) -> Result<Option<f64>> {
    Ok(run_copy(dynamics, plan, horizon, &[], true, rng)?.regenerations.first().copied())
}

fn run_copy<R: Rng + ?Sized>(
    dynamics: &ReliabilityDynamics,
    plan: &RegenerativeCopyPlan,
    horizon: f64,
    snapshot_times: &[f64],
    stop_at_first: bool,
    rng: &mut R,
) -> Result<RegenerativeCopy> {
    let channels = dynamics.separable_channels().ok_or_else(|| {
        Error::Unsupported("the regenerative copy needs intensities that depend only on the element's own clock".into())
    })?;
    let view = |h: &crate::HazardSpec| IntensitySpec::from_spec(h.clone()).view();
    let laws = Laws {
        work: [view(&channels.failure[0])?, view(&channels.failure[1])?],
        repair: [view(&channels.repair[0])?, view(&channels.repair[1])?],
    };
    let theta = plan.theta;

    let mut modes = [WORKING; 2];
    let mut start = [0.0f64; 2];
    let mut end = [laws.work[0].sample(rng), laws.work[1].sample(rng)];
    let mut tainted = false;
    let mut chain = false;
    let mut cycles = 0;
    let mut successful = 0;
    let mut flips = Vec::new();
    let mut regenerations = Vec::new();
    let mut attempts = Vec::new();
    let mut snapshots = Vec::new();
    let mut snaps = snapshot_times.iter().copied().filter(|s| *s <= horizon).peekable();
    let state_at = |modes: [u8; 2], start: [f64; 2], t: f64| ReliabilityState {
        modes,
        elapsed: [t - start[0], t - start[1]],
    };

    loop {
        let t = end[0].min(end[1]);
        while let Some(&s) = snaps.peek() {
            if s >= t {
                break;
            }
            snapshots.push((s, state_at(modes, start, s)));
            snaps.next();
        }
        if t > horizon {
            break;
        }
        // On ties element 1 flips first, so element 0's decision sees it.
        for e in [1, 0] {
            if end[e] != t {
                continue;
            }
            modes[e] = 1 - modes[e];
            start[e] = t;
            end[e] = t + laws.of(e, modes[e]).sample(rng);
            flips.push((t, e));
            if e == 1 {
                tainted = false;
                continue;
            }
            let a = t - start[1];
            if modes[0] == REPAIR {
                if !chain {
                    cycles += 1;
                }
                chain = false;
                if modes[1] == REPAIR && !tainted && a <= theta {
                    let draw = maximal_couple(&[laws.repair[0].clone(), laws.repair[1].residual(a)?], rng)?;
                    end[0] = t + draw.values[0];
                    end[1] = t + draw.values[1];
                    tainted = !draw.met;
                    attempts.push(Attempt {
                        time: t,
                        scenario: Scenario::RepairCoupling,
                        elapsed_other: a,
                        met: draw.met,
                    });
                } else {
                    attempts.push(Attempt {
                        time: t,
                        scenario: Scenario::Skipped,
                        elapsed_other: a,
                        met: false,
                    });
                }
            } else {
                let regenerating = modes[1] == WORKING && start[1] == t;
                if !regenerating && modes[1] == WORKING && !tainted && a <= theta {
                    let draw = maximal_couple(&[laws.work[0].clone(), laws.work[1].residual(a)?], rng)?;
                    end[0] = t + draw.values[0];
                    end[1] = t + draw.values[1];
                    tainted = !draw.met;
                    chain = draw.met;
                    attempts.push(Attempt {
                        time: t,
                        scenario: Scenario::WorkCoupling,
                        elapsed_other: a,
                        met: draw.met,
                    });
                }
            }
        }
        if modes == [WORKING, WORKING] && start == [t, t] {
            regenerations.push(t);
            successful += 1;
            chain = false;
            if stop_at_first {
                break;
            }
        }
    }
    for s in snaps {
        snapshots.push((s, state_at(modes, start, s)));
    }
    Ok(RegenerativeCopy {
        plan: *plan,
        horizon,
        flips,
        regenerations,
        cycles,
        successful_cycles: successful,
        attempts,
        snapshots,
        final_state: state_at(modes, start, horizon),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intensity::HazardSpec;
    use crate::models::reliability::{Channels, Envelopes};
    use crate::rng::stream;

    fn unit_dynamics() -> ReliabilityDynamics {
        let c = HazardSpec::ConstantHazard { rate: 1.0 };
        let ch = Channels {
            failure: [c.clone(), c.clone()],
            repair: [c.clone(), c.clone()],
        };
        ReliabilityDynamics::from_channels(ch, &[]).unwrap().with_envelopes(Envelopes {
            lower: c.clone(),
            upper: c,
            delay: 0.0,
        })
    }

    #[test]
    fn exponential_plan_constants() {
        let plan = RegenerativeCopyPlan::new(&unit_dynamics(), 4.0).unwrap();
        assert!((plan.xi - 2.0).abs() < 1e-9);
        assert!((plan.q1 - 0.5).abs() < 1e-9);
        assert!((plan.q2 - (1.0 - (-4.0f64).exp())).abs() < 1e-12);
        assert!((plan.kappa_theta - 1.0).abs() < 1e-6);
        assert!((certified_regeneration_probability(&plan) - 0.4908).abs() < 1e-4);
        assert!(matches!(
            RegenerativeCopyPlan::new(&unit_dynamics(), 2.0),
            Err(Error::ThetaNotAboveXi { .. })
        ));
    }

    #[test]
    fn copy_regenerates_into_fresh_state() {
        let d = unit_dynamics();
        let plan = RegenerativeCopyPlan::new(&d, 4.0).unwrap();
        let copy = build_regenerative_copy(&d, &plan, 200.0, &[5.0, 20.0], &mut stream(3, 0)).unwrap();
        assert!(copy.regenerations.len() > 5);
        assert!(copy.cycle_success_rate() > 0.3);
        assert_eq!(copy.snapshots.len(), 2);
        for &r in &copy.regenerations {
            let n = copy.flips.iter().filter(|f| f.0 == r).count();
            assert_eq!(n, 2);
        }
    }

    #[test]
    fn interacting_dynamics_are_unsupported() {
        let c = HazardSpec::ConstantHazard { rate: 1.0 };
        let ch = Channels {
            failure: [c.clone(), c.clone()],
            repair: [c.clone(), c.clone()],
        };
        let inter = crate::models::reliability::Interaction {
            element: 0,
            channel: crate::models::reliability::Channel::Repair,
            other_mode: 1,
            factor: 1.5,
        };
        let d = ReliabilityDynamics::from_channels(ch, &[inter]).unwrap().with_envelopes(Envelopes {
            lower: HazardSpec::ConstantHazard { rate: 0.5 },
            upper: HazardSpec::ConstantHazard { rate: 2.0 },
            delay: 0.0,
        });
        let plan = RegenerativeCopyPlan::new(&d, 20.0).unwrap();
        let res = build_regenerative_copy(&d, &plan, 10.0, &[], &mut stream(1, 0));
        assert!(matches!(res, Err(Error::Unsupported(_))));
    }
}
