//! Renewal and quasi-renewal streams, their backward/forward renewal times,
//! and Lorden-type moment bounds on the backward renewal time.

use std::io::{self, Write};
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intensity::{DistributionView, Hazard, HazardSpec, IntensitySpec};
use crate::quadrature::integrate;
use crate::rng::{exp1, replicate};
use crate::stats::{summarize, Summary};

/// One realized renewal stream on `[0, horizon]`.
///
/// `epochs[0]` is the first renewal, drawn from the residual law after the
/// initial elapsed time; the last epoch lies beyond the horizon so that the
/// forward time is defined everywhere on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenewalPath {
    pub initial_elapsed: f64,
    pub horizon: f64,
    pub epochs: Vec<f64>,
}

/// `(N_t, B_t, W_t)` at a single time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClockReading {
    pub count: usize,
    pub backward: f64,
    pub forward: f64,
}

impl RenewalPath {
    fn check(&self, t: f64) -> Result<()> {
        if t > self.horizon || t < 0.0 {
            return Err(Error::HorizonTooShort {
                horizon: self.horizon,
                requested: t,
            });
        }
        Ok(())
    }

    /// Number of renewals in `[0, t]`.
    pub fn count(&self, t: f64) -> Result<usize> {
        self.check(t)?;
        Ok(self.epochs.partition_point(|e| *e <= t))
    }

    pub fn clock(&self, t: f64) -> Result<ClockReading> {
        let n = self.count(t)?;
        let last = if n == 0 { -self.initial_elapsed } else { self.epochs[n - 1] };
        Ok(ClockReading {
            count: n,
            backward: t - last,
            forward: self.epochs[n] - t,
        })
    }

    /// Backward renewal time `B_t`.
    pub fn backward(&self, t: f64) -> Result<f64> {
        self.clock(t).map(|c| c.backward)
    }

    /// Forward renewal time `W_t`.
    pub fn forward(&self, t: f64) -> Result<f64> {
        self.clock(t).map(|c| c.forward)
    }

    /// Period lengths; the first entry is the residual `t_0`.
    pub fn periods(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.epochs
            .iter()
            .map(|&e| {
                let p = e - prev;
                prev = e;
                p
            })
            .collect()
    }
}

/// Renewal stream with i.i.d. periods from `law`, started `elapsed` time into
/// a period.
pub fn simulate_renewal<R: Rng + ?Sized>(
    law: &DistributionView,
    elapsed: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<RenewalPath> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidSpec(format!("horizon must be positive, got {horizon}")));
    }
    let first = law.residual(elapsed)?;
    let mut t = first.sample(rng);
    let mut epochs = vec![t];
    while t <= horizon {
        t += law.sample(rng);
        epochs.push(t);
    }
    Ok(RenewalPath {
        initial_elapsed: elapsed,
        horizon,
        epochs,
    })
}

/// `(B_t, W_t)` at each time of a sorted grid, consuming randomness exactly
/// like [`simulate_renewal`] but without storing the path.
pub fn renewal_times_at<R: Rng + ?Sized>(
    law: &DistributionView,
    elapsed: f64,
    grid: &[f64],
    rng: &mut R,
) -> Result<Vec<(f64, f64)>> {
    let first = law.residual(elapsed)?;
    let mut last = -elapsed;
    let mut next = first.sample(rng);
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        while next <= t {
            last = next;
            next += law.sample(rng);
        }
        out.push((t - last, next - t));
    }
    Ok(out)
}

/// Produces the hazard of period `j` given all earlier period lengths.
pub type PeriodGenerator = Arc<dyn Fn(usize, &[f64]) -> Hazard + Send + Sync>;

/// A quasi-renewal stream: period hazards are chosen on the fly but must stay
/// within the envelope `lower ≤ λ_j ≤ upper`.
#[derive(Clone)]
pub struct QuasiRenewalSpec {
    /// Lower envelope φ.
    pub lower: HazardSpec,
    /// Upper envelope Q.
    pub upper: HazardSpec,
    /// Delay horizon: φ may vanish on `[0, delay]`.
    pub delay: f64,
    /// Largest `k` with a finite `k`-th envelope moment; bounds need `ℓ ≤ k − 1`.
    pub moment_order: u32,
    generator: PeriodGenerator,
}

impl std::fmt::Debug for QuasiRenewalSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuasiRenewalSpec")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("delay", &self.delay)
            .field("moment_order", &self.moment_order)
            .finish_non_exhaustive()
    }
}

/// Width of the windows used for piecewise-constant thinning majorants.
const THINNING_WINDOW: f64 = 1.0;
const MAX_CANDIDATES: usize = 10_000_000;

impl QuasiRenewalSpec {
    pub fn new(
        lower: HazardSpec,
        upper: HazardSpec,
        delay: f64,
        generator: impl Fn(usize, &[f64]) -> Hazard + Send + Sync + 'static,
    ) -> Self {
        Self {
            lower,
            upper,
            delay,
            moment_order: 3,
            generator: Arc::new(generator),
        }
    }

    /// Classical renewal as a degenerate quasi-renewal: φ = Q = λ.
    pub fn renewal(hazard: HazardSpec) -> Self {
        let h = Hazard::Spec(hazard.clone());
        Self::new(hazard.clone(), hazard, 0.0, move |_, _| h.clone())
    }

    pub fn with_moment_order(mut self, k: u32) -> Self {
        self.moment_order = k;
        self
    }

    pub fn hazard_for(&self, period: usize, history: &[f64]) -> Hazard {
        (self.generator)(period, history)
    }

    fn probe_grid(&self) -> Vec<f64> {
        let mut grid: Vec<f64> = (0..=400).map(|i| 1e-6 * 1.05f64.powi(i)).collect();
        grid.extend((0..=200).map(|i| self.delay * i as f64 / 200.0));
        grid.sort_by(f64::total_cmp);
        grid
    }

    /// Every violated envelope condition, as human-readable diagnostics.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        let grid = self.probe_grid();
        if let Some(s) = grid.iter().find(|&&s| self.lower.eval(s) > self.upper.eval(s)) {
            out.push(format!("quasi-renewal condition 1: lower envelope exceeds upper envelope at s = {s}"));
        }
        match IntensitySpec::from_spec(self.lower.clone()).view() {
            Err(e) => out.push(format!("quasi-renewal condition 2: lower envelope: {e}")),
            Ok(eta) => {
                if eta.moment(self.moment_order).is_err() {
                    out.push(format!(
                        "quasi-renewal condition 2: envelope moment of order {} is infinite",
                        self.moment_order
                    ));
                }
            }
        }
        let near_zero = self.upper.sup_on(0.0, 1e-3);
        if !near_zero.is_finite() {
            out.push("quasi-renewal condition 3: upper envelope Q is unbounded near 0".to_string());
        }
        if let Some(s) = (1..=400)
            .map(|i| self.delay + 1e-6 * 1.05f64.powi(i))
            .find(|&s| !(self.lower.eval(s) > 0.0))
        {
            out.push(format!(
                "quasi-renewal condition 4: lower envelope vanishes at s = {s} beyond the delay {}",
                self.delay
            ));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.diagnostics().into_iter().next() {
            Some(msg) => Err(Error::InvalidSpec(msg)),
            None => Ok(()),
        }
    }

    /// Draws period `j` by thinning against the upper envelope, checking the
    /// envelope at every candidate point.
    pub fn sample_period<R: Rng + ?Sized>(&self, period: usize, history: &[f64], rng: &mut R) -> Result<f64> {
        let hazard = self.hazard_for(period, history);
        let mut s = 0.0;
        for _ in 0..MAX_CANDIDATES {
            let window_end = s + THINNING_WINDOW;
            let bound = self.upper.sup_on(s, window_end);
            if !bound.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "quasi-renewal condition 3: upper envelope unbounded on [{s}, {window_end}]"
                )));
            }
            if bound <= 0.0 {
                s = window_end;
                continue;
            }
            let candidate = s + exp1(rng) / bound;
            if candidate > window_end {
                s = window_end;
                continue;
            }
            s = candidate;
            let value = hazard.eval(s);
            let (lower, upper) = (self.lower.eval(s), self.upper.eval(s));
            if !(value <= upper * (1.0 + 1e-12) && value >= lower * (1.0 - 1e-12)) {
                return Err(Error::EnvelopeViolation {
                    period,
                    at: s,
                    value,
                    lower,
                    upper,
                });
            }
            if rng.random::<f64>() * bound < value {
                return Ok(s);
            }
        }
        Err(Error::SamplerExhausted(MAX_CANDIDATES))
    }
}

/// Quasi-renewal stream on `[0, horizon]`, started at a renewal.
pub fn simulate_quasi_renewal<R: Rng + ?Sized>(
    spec: &QuasiRenewalSpec,
    horizon: f64,
    rng: &mut R,
) -> Result<RenewalPath> {
    let mut periods = Vec::new();
    let mut epochs = Vec::new();
    let mut t = 0.0;
    while t <= horizon {
        let p = spec.sample_period(periods.len(), &periods, rng)?;
        periods.push(p);
        t += p;
        epochs.push(t);
    }
    Ok(RenewalPath {
        initial_elapsed: 0.0,
        horizon,
        epochs,
    })
}

/// Quasi-renewal analogue of [`renewal_times_at`].
pub fn quasi_renewal_times_at<R: Rng + ?Sized>(
    spec: &QuasiRenewalSpec,
    grid: &[f64],
    rng: &mut R,
) -> Result<Vec<(f64, f64)>> {
    let mut periods = Vec::new();
    let mut last = 0.0;
    let mut next = spec.sample_period(0, &periods, rng)?;
    periods.push(next);
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        while next <= t {
            last = next;
            let p = spec.sample_period(periods.len(), &periods, rng)?;
            periods.push(p);
            next += p;
        }
        out.push((t - last, next - t));
    }
    Ok(out)
}

/// `Ξ = E ξ² / E ξ`, a uniform bound on `E B_t`.
pub fn lorden_bound(law: &DistributionView) -> Result<f64> {
    let m2 = law.moment(2)?;
    let m1 = law.moment(1)?;
    Ok(m2 / m1)
}

/// Envelope-based bound on `E B_tˡ` for a quasi-renewal stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LordenBounds {
    pub order: u32,
    /// Bound on `E B_t`.
    pub xi: f64,
    /// Bound on `E B_tˡ`.
    pub xi_ell: f64,
    /// `E ηᵏ` for `k = 1..=ℓ+1`, η having hazard φ.
    pub eta_moments: Vec<f64>,
    /// `E ζ`, ζ having hazard Q.
    pub zeta_mean: f64,
}

/// `Ξ_ℓ = E ηˡ + E η^{ℓ+1} / ((ℓ+1) E ζ)`.
pub fn generalized_lorden_bound(spec: &QuasiRenewalSpec, order: u32) -> Result<LordenBounds> {
    if order == 0 || order + 1 > spec.moment_order {
        return Err(Error::InvalidSpec(format!(
            "moment order ℓ = {order} must satisfy 1 ≤ ℓ ≤ k − 1 with k = {}",
            spec.moment_order
        )));
    }
    let eta = IntensitySpec::from_spec(spec.lower.clone()).view()?;
    let zeta = IntensitySpec::from_spec(spec.upper.clone()).view()?;
    let eta_moments = (1..=order + 1).map(|k| eta.moment(k)).collect::<Result<Vec<f64>>>()?;
    let zeta_mean = zeta.moment(1)?;
    if !(zeta_mean > 0.0) {
        return Err(Error::InvalidSpec("upper-envelope law has zero mean".into()));
    }
    let bound = |l: usize| eta_moments[l - 1] + eta_moments[l] / ((l + 1) as f64 * zeta_mean);
    Ok(LordenBounds {
        order,
        xi: bound(1),
        xi_ell: bound(order as usize),
        eta_moments,
        zeta_mean,
    })
}

/// Law of the stationary backward renewal time, density `(1 − F(x)) / E ξ`.
#[derive(Debug, Clone)]
pub struct StationaryLaw {
    base: DistributionView,
    mean: f64,
    knots: Vec<f64>,
    cum: Vec<f64>,
}

/// Builds the stationary backward-time law of a renewal stream with periods `law`.
pub fn stationary_law(law: &DistributionView) -> Result<StationaryLaw> {
    let mean = law.mean()?;
    let knots = law.knots();
    let mut cum = vec![0.0];
    for w in knots.windows(2) {
        let part = integrate(&|s| law.survival(s), w[0], w[1], 1e-16, 1e-12).value;
        cum.push(cum.last().unwrap() + part / mean);
    }
    Ok(StationaryLaw {
        base: law.clone(),
        mean,
        knots,
        cum,
    })
}

impl StationaryLaw {
    pub fn period_mean(&self) -> f64 {
        self.mean
    }

    pub fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.base.survival(x) / self.mean
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let i = self.knots.partition_point(|k| *k <= x);
        if i >= self.knots.len() {
            return 1.0;
        }
        let lo = self.knots[i - 1];
        let part = integrate(&|s| self.base.survival(s), lo, x, 1e-16, 1e-12).value;
        (self.cum[i - 1] + part / self.mean).min(1.0)
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::InvalidProbability(u));
        }
        let i = self.cum.partition_point(|c| *c < u).clamp(1, self.knots.len() - 1);
        let (mut lo, mut hi) = (self.knots[i - 1], self.knots[i]);
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let g = self.cdf(x) - u;
            if g.abs() <= 1e-14 {
                return Ok(x);
            }
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            if hi - lo <= 1e-13 * hi.max(1e-300) {
                break;
            }
            let d = self.density(x);
            let newton = x - g / d;
            x = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        Ok(hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = crate::rng::open_unit(rng);
        self.quantile(u).unwrap_or(0.0)
    }

    /// `E Bᵏ = E ξ^{k+1} / ((k+1) E ξ)`.
    pub fn moment(&self, k: u32) -> Result<f64> {
        Ok(self.base.moment(k + 1)? / ((k + 1) as f64 * self.mean))
    }
}

/// Backward/forward renewal times collected over replications at a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackwardSurvey {
    pub grid: Vec<f64>,
    /// `backward[i][r]` is `B_{grid[i]}` in replication `r`.
    pub backward: Vec<Vec<f64>>,
    pub forward: Vec<Vec<f64>>,
}

/// One survey row with moment estimates and the bounds they are checked against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurveyRow {
    pub t: f64,
    pub b: Summary,
    pub b2: Summary,
    pub w: Summary,
    pub w2: Summary,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] < 0.0 {
        return Err(Error::InvalidSpec("time grid must be nonempty, nonnegative and strictly increasing".into()));
    }
    Ok(())
}

impl BackwardSurvey {
    fn from_rows(grid: &[f64], per_rep: Vec<Vec<(f64, f64)>>) -> Self {
        let mut backward = vec![Vec::with_capacity(per_rep.len()); grid.len()];
        let mut forward = vec![Vec::with_capacity(per_rep.len()); grid.len()];
        for rep in per_rep {
            for (i, (b, w)) in rep.into_iter().enumerate() {
                backward[i].push(b);
                forward[i].push(w);
            }
        }
        Self {
            grid: grid.to_vec(),
            backward,
            forward,
        }
    }

    pub fn rows(&self) -> Vec<SurveyRow> {
        self.grid
            .iter()
            .enumerate()
            .map(|(i, &t)| SurveyRow {
                t,
                b: summarize(self.backward[i].iter().copied()),
                b2: summarize(self.backward[i].iter().map(|b| b * b)),
                w: summarize(self.forward[i].iter().copied()),
                w2: summarize(self.forward[i].iter().map(|w| w * w)),
            })
            .collect()
    }

    /// Counts of `B_t` in `bins` equal-width cells over `[0, max]`.
    pub fn histogram(&self, index: usize, bins: usize) -> Vec<u64> {
        let xs = &self.backward[index];
        let max = xs.iter().copied().fold(0.0, f64::max);
        let mut counts = vec![0u64; bins.max(1)];
        if max == 0.0 {
            counts[0] = xs.len() as u64;
            return counts;
        }
        for &x in xs {
            let c = ((x / max * bins as f64) as usize).min(bins - 1);
            counts[c] += 1;
        }
        counts
    }
}

/// Survey over existing paths.
pub fn backward_time_survey(paths: &[RenewalPath], grid: &[f64]) -> Result<BackwardSurvey> {
    check_grid(grid)?;
    let per_rep = paths
        .iter()
        .map(|p| {
            grid.iter()
                .map(|&t| p.clock(t).map(|c| (c.backward, c.forward)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BackwardSurvey::from_rows(grid, per_rep))
}

/// Parallel renewal survey; replication `r` uses stream `r` of `seed`.
pub fn survey_renewal(
    law: &DistributionView,
    elapsed: f64,
    grid: &[f64],
    replications: usize,
    seed: u64,
) -> Result<BackwardSurvey> {
    check_grid(grid)?;
    law.residual(elapsed)?;
    let per_rep = replicate(seed, replications, |_, rng| renewal_times_at(law, elapsed, grid, rng))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(BackwardSurvey::from_rows(grid, per_rep))
}

/// Parallel quasi-renewal survey.
pub fn survey_quasi_renewal(
    spec: &QuasiRenewalSpec,
    grid: &[f64],
    replications: usize,
    seed: u64,
) -> Result<BackwardSurvey> {
    check_grid(grid)?;
    let per_rep = replicate(seed, replications, |_, rng| quasi_renewal_times_at(spec, grid, rng))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(BackwardSurvey::from_rows(grid, per_rep))
}

/// CSV columns `replication_id,epoch_index,epoch_time,period`.
pub fn write_paths_csv<W: Write>(paths: &[RenewalPath], out: &mut W) -> io::Result<()> {
    writeln!(out, "replication_id,epoch_index,epoch_time,period")?;
    for (r, path) in paths.iter().enumerate() {
        for (j, (e, p)) in path.epochs.iter().zip(path.periods()).enumerate() {
            writeln!(out, "{r},{j},{e},{p}")?;
        }
    }
    Ok(())
}

/// CSV columns `t,mean_B,se_B,mean_B2,se_B2,bound_Xi,bound_Xi2`.
pub fn write_survey_csv<W: Write>(rows: &[SurveyRow], xi: f64, xi2: f64, out: &mut W) -> io::Result<()> {
    writeln!(out, "t,mean_B,se_B,mean_B2,se_B2,bound_Xi,bound_Xi2")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.t, r.b.mean, r.b.se, r.b2.mean, r.b2.se, xi, xi2
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn deterministic_epochs() {
        let law = IntensitySpec::deterministic(2.0).view().unwrap();
        let path = simulate_renewal(&law, 1.0, 10.0, &mut stream(1, 0)).unwrap();
        assert_eq!(&path.epochs[..5], &[1.0, 3.0, 5.0, 7.0, 9.0]);
        let c = path.clock(4.0).unwrap();
        assert_eq!((c.count, c.backward, c.forward), (2, 1.0, 1.0));
        assert_eq!(path.backward(0.5).unwrap(), 1.5);
        assert!(path.clock(10.5).is_err());
    }

    #[test]
    fn lazy_and_stored_paths_agree() {
        let law = IntensitySpec::gamma(2.0, 1.0).view().unwrap();
        let grid = [0.5, 3.0, 7.5];
        let path = simulate_renewal(&law, 0.4, 8.0, &mut stream(11, 3)).unwrap();
        let lazy = renewal_times_at(&law, 0.4, &grid, &mut stream(11, 3)).unwrap();
        for (t, (b, w)) in grid.iter().zip(lazy) {
            let c = path.clock(*t).unwrap();
            assert_eq!((c.backward, c.forward), (b, w));
        }
    }

    #[test]
    fn classical_lorden_values() {
        let e = IntensitySpec::exponential(1.0).view().unwrap();
        assert!((lorden_bound(&e).unwrap() - 2.0).abs() < 1e-9);
        let u = IntensitySpec::uniform(0.0, 1.0).view().unwrap();
        assert!((lorden_bound(&u).unwrap() - 2.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn generalized_lorden_constants() {
        let spec = QuasiRenewalSpec::new(
            HazardSpec::ConstantHazard { rate: 0.5 },
            HazardSpec::ConstantHazard { rate: 2.0 },
            0.0,
            |_, _| Hazard::Spec(HazardSpec::ConstantHazard { rate: 1.0 }),
        );
        let b1 = generalized_lorden_bound(&spec, 1).unwrap();
        assert!((b1.xi_ell - 10.0).abs() < 1e-7);
        let b2 = generalized_lorden_bound(&spec, 2).unwrap();
        assert!((b2.xi_ell - 40.0).abs() < 1e-6);
        assert!(generalized_lorden_bound(&spec, 3).is_err());
    }

    #[test]
    fn envelope_violation_is_reported() {
        let spec = QuasiRenewalSpec::new(
            HazardSpec::ConstantHazard { rate: 0.5 },
            HazardSpec::ConstantHazard { rate: 2.0 },
            0.0,
            |_, _| Hazard::Spec(HazardSpec::ConstantHazard { rate: 3.0 }),
        );
        let err = simulate_quasi_renewal(&spec, 10.0, &mut stream(2, 0)).unwrap_err();
        assert!(matches!(err, Error::EnvelopeViolation { period: 0, .. }));
    }

    #[test]
    fn condition_three_detected() {
        let spec = QuasiRenewalSpec::renewal(HazardSpec::ClosedForm(crate::ClosedForm::Weibull {
            shape: 0.5,
            scale: 1.0,
        }));
        let d = spec.diagnostics();
        assert!(d.iter().any(|m| m.contains("condition 3")), "{d:?}");
    }

    #[test]
    fn stationary_law_of_uniform() {
        let u = IntensitySpec::uniform(0.0, 1.0).view().unwrap();
        let st = stationary_law(&u).unwrap();
        for x in [0.1, 0.5, 0.9] {
            assert!((st.cdf(x) - (2.0 * x - x * x)).abs() < 1e-9);
        }
        assert!((st.moment(1).unwrap() - 1.0 / 3.0).abs() < 1e-8);
        let q = st.quantile(0.75).unwrap();
        assert!((st.cdf(q) - 0.75).abs() < 1e-10);
    }

    #[test]
    fn survey_csv_has_header_and_rows() {
        let law = IntensitySpec::exponential(1.0).view().unwrap();
        let s = survey_renewal(&law, 0.0, &[1.0, 2.0], 50, 4).unwrap();
        let mut buf = Vec::new();
        write_survey_csv(&s.rows(), 2.0, 4.0, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("t,mean_B,se_B"));
    }
}
