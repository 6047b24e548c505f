//! Maximal coupling of lifetimes, the successful coupling of two
//! backward-renewal processes, and the total-variation bounds it certifies.

use std::io::{self, Write};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intensity::{common_part_inf, common_part_n, DistributionView, LAMBDA_MAX};
use crate::quadrature::integrate_pieces;
use crate::renewal::{lorden_bound, stationary_law, RenewalPath};
use crate::rng::replicate;
use crate::stats::{empirical_tv, summarize, Summary};

const MAX_REJECTIONS: usize = 10_000_000;

/// Weight of `view` at `x`: its atom mass when `atom` is set, otherwise its
/// density.
fn weight(view: &DistributionView, x: f64, atom: bool) -> f64 {
    if atom {
        view.atom_mass_at(x)
    } else {
        view.density(x)
    }
}

fn min_weight(views: &[DistributionView], x: f64, atom: bool) -> f64 {
    views.iter().map(|v| weight(v, x, atom)).fold(f64::INFINITY, f64::min)
}

/// One joint draw from a maximal coupling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledDraw {
    pub values: Vec<f64>,
    /// All coordinates are equal by construction.
    pub met: bool,
}

/// Draws `(θ₁, …, θₙ)` with marginals `views` that coincide with probability
/// equal to the common part of the laws.
///
/// A value `X` from the first law is kept as the common value with
/// probability `m(X)/w₁(X)`, `m` being the pointwise minimum of the weights.
/// On rejection the first coordinate keeps `X` (law ∝ `w₁ − m`) and every
/// other coordinate is drawn from `∝ wᵢ − m` by rejection.
pub fn maximal_couple<R: Rng + ?Sized>(views: &[DistributionView], rng: &mut R) -> Result<CoupledDraw> {
    let Some(first) = views.first() else {
        return Err(Error::InvalidSpec("maximal coupling needs at least one law".into()));
    };
    let x = first.sample(rng);
    let atom = first.atom_mass_at(x) > 0.0;
    let w0 = weight(first, x, atom);
    let m = min_weight(views, x, atom);
    if rng.random::<f64>() * w0 <= m {
        return Ok(CoupledDraw {
            values: vec![x; views.len()],
            met: true,
        });
    }
    let mut values = Vec::with_capacity(views.len());
    values.push(x);
    for view in &views[1..] {
        let mut drawn = None;
        for _ in 0..MAX_REJECTIONS {
            let y = view.sample(rng);
            let atom = view.atom_mass_at(y) > 0.0;
            let w = weight(view, y, atom);
            if rng.random::<f64>() * w > min_weight(views, y, atom) {
                drawn = Some(y);
                break;
            }
        }
        values.push(drawn.ok_or(Error::SamplerExhausted(MAX_REJECTIONS))?);
    }
    Ok(CoupledDraw { values, met: false })
}

/// A maximal coupling together with its certified meet probability.
#[derive(Debug, Clone)]
pub struct MaximalCouple {
    views: Vec<DistributionView>,
    kappa: f64,
}

impl MaximalCouple {
    pub fn new(views: Vec<DistributionView>) -> Result<Self> {
        let kappa = common_part_n(&views)?;
        if kappa >= 1.0 - 1e-9 {
            // A unit common part means the laws coincide; check it.
            let reference = &views[0];
            for (i, v) in views.iter().enumerate().skip(1) {
                for k in 1..64 {
                    let s = reference.inverse_cum(k as f64 / 8.0);
                    if (reference.cdf(s) - v.cdf(s)).abs() > 1e-6 {
                        return Err(Error::InconsistentViews(format!(
                            "common part is 1 but law {i} differs from law 0 at s = {s}"
                        )));
                    }
                }
            }
        }
        Ok(Self { views, kappa })
    }

    /// Meet probability `∫ minᵢ fᵢ`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn views(&self) -> &[DistributionView] {
        &self.views
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CoupledDraw> {
        maximal_couple(&self.views, rng)
    }
}

/// Parameters of the successful-coupling construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingConfig {
    /// Attempt threshold Θ on stream 2's backward time; must exceed Ξ.
    pub theta: f64,
    /// Moment order ℓ of the coupling epoch.
    pub ell: u32,
    /// Hölder exponent r > 1 used in the moment bound.
    pub holder_r: f64,
    /// Coupling attempts before a replication is declared censored.
    pub attempt_cap: usize,
}

impl CouplingConfig {
    pub fn new(theta: f64) -> Self {
        Self {
            theta,
            ell: 1,
            holder_r: 2.0,
            attempt_cap: 10_000,
        }
    }

    pub fn with_ell(mut self, ell: u32) -> Self {
        self.ell = ell;
        self
    }

    pub fn with_holder_r(mut self, r: f64) -> Self {
        self.holder_r = r;
        self
    }

    pub fn with_attempt_cap(mut self, cap: usize) -> Self {
        self.attempt_cap = cap;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::InvalidSpec(format!("theta must be positive, got {}", self.theta)));
        }
        if self.ell == 0 {
            return Err(Error::InvalidSpec("ell must be at least 1".into()));
        }
        if !(self.holder_r > 1.0) {
            return Err(Error::InvalidSpec(format!("holder_r must exceed 1, got {}", self.holder_r)));
        }
        if self.attempt_cap == 0 {
            return Err(Error::InvalidSpec("attempt_cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// Analytic constants shared by every bound for one law and config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingConstants {
    pub xi: f64,
    pub theta: f64,
    /// `p_Θ = 1 − Ξ/Θ`.
    pub p_theta: f64,
    /// `κ_Θ = inf_{a ≤ Θ} κ(a)`.
    pub kappa_theta: f64,
    /// Grid spacing used for the infimum search.
    pub kappa_grid_step: f64,
    /// Per-attempt failure bound `π = 1 − p_Θ κ_Θ`.
    pub pi: f64,
    pub ell: u32,
    pub holder_r: f64,
    /// `(E ξ^{ℓr})^{1/(ℓr)}`.
    pub period_norm: f64,
}

impl CouplingConstants {
    pub fn compute(law: &DistributionView, config: &CouplingConfig) -> Result<Self> {
        config.validate()?;
        let xi = lorden_bound(law)?;
        if config.theta <= xi {
            return Err(Error::ThetaNotAboveXi { theta: config.theta, xi });
        }
        let p_theta = 1.0 - xi / config.theta;
        let inf = common_part_inf(law, config.theta)?;
        let pi = 1.0 - p_theta * inf.value;
        if !(pi < 1.0) {
            return Err(Error::NoCertifiedCoupling { pi });
        }
        let order = config.ell as f64 * config.holder_r;
        let period_norm = law.moment_real(order)?.powf(1.0 / order);
        Ok(Self {
            xi,
            theta: config.theta,
            p_theta,
            kappa_theta: inf.value,
            kappa_grid_step: inf.grid_step,
            pi,
            ell: config.ell,
            holder_r: config.holder_r,
            period_norm,
        })
    }

    /// `Σ_{i≥1} ‖ξ‖_{ℓr} π^{(i−1)/(ℓr′)}` in closed form.
    pub fn attempt_series(&self) -> f64 {
        let r_conj = self.holder_r / (self.holder_r - 1.0);
        self.period_norm / (1.0 - self.pi.powf(1.0 / (self.ell as f64 * r_conj)))
    }

    /// `C(ℓ, b₁, b₂)` from the `ℓ`-norms of the two initial residual lives.
    pub fn epoch_bound(&self, first_norm: f64, second_norm: f64) -> f64 {
        (first_norm + second_norm + self.attempt_series()).powi(self.ell as i32)
    }
}

/// `(E W^ℓ)^{1/ℓ}` for the residual life after `elapsed`.
fn residual_norm(law: &DistributionView, elapsed: f64, ell: u32) -> Result<f64> {
    Ok(law.residual(elapsed)?.moment(ell)?.powf(1.0 / ell as f64))
}

/// Upper bound on `E τˡ` for streams started at elapsed times `b1`, `b2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochBound {
    pub constants: CouplingConstants,
    pub c: f64,
}

pub fn coupling_epoch_moment_bound(law: &DistributionView, b1: f64, b2: f64, config: &CouplingConfig) -> Result<EpochBound> {
    let constants = CouplingConstants::compute(law, config)?;
    let c = constants.epoch_bound(residual_norm(law, b1, config.ell)?, residual_norm(law, b2, config.ell)?);
    Ok(EpochBound { constants, c })
}

/// `min(1, C / tˡ)` on a time grid.
pub fn tv_bound_curve(c: f64, ell: u32, grid: &[f64]) -> Vec<f64> {
    grid.iter().map(|&t| (c / t.powi(ell as i32)).min(1.0)).collect()
}

/// `C̄(ℓ, b₁) = ∫ C(ℓ, b₁, x) P(dx)` over the stationary backward-time law.
pub fn stationary_integrated_bound(law: &DistributionView, b1: f64, config: &CouplingConfig) -> Result<f64> {
    let constants = CouplingConstants::compute(law, config)?;
    stationary_integrated_with(law, b1, &constants)
}

fn stationary_integrated_with(law: &DistributionView, b1: f64, constants: &CouplingConstants) -> Result<f64> {
    let stationary = stationary_law(law)?;
    let first = residual_norm(law, b1, constants.ell)?;
    let failure = std::cell::Cell::new(None);
    let integrand = |x: f64| {
        let density = stationary.density(x);
        if density == 0.0 {
            return 0.0;
        }
        match residual_norm(law, x, constants.ell) {
            Ok(norm) => constants.epoch_bound(first, norm) * density,
            Err(Error::ConditioningOnNull { .. }) => 0.0,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        }
    };
    // Residual laws are only resolved while the conditioning survival stays
    // well above the tabulation floor; past Λ = 30 the stationary weight is
    // below e^{-30} and is dropped.
    let cut = law.inverse_cum(0.5 * LAMBDA_MAX).min(law.support_end());
    let mut pts: Vec<f64> = law.knots().into_iter().filter(|&p| p < cut).collect();
    pts.push(cut);
    let value = integrate_pieces(&integrand, &pts, 1e-10, 1e-7).value;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    if !value.is_finite() {
        return Err(Error::InfiniteMoment { order: constants.ell });
    }
    Ok(value)
}

/// One replication of the paired construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledPaths {
    pub first: RenewalPath,
    pub second: RenewalPath,
    /// Merge epoch; `None` when the attempt cap was hit.
    pub tau: Option<f64>,
    pub attempts: usize,
    pub meets: usize,
    /// Outcome of the first attempt, if one happened.
    pub first_attempt_met: Option<bool>,
}

impl CoupledPaths {
    /// `(Z¹_t, Z²_t)`, the backward times of both streams.
    pub fn backward(&self, t: f64) -> Result<(f64, f64)> {
        Ok((self.first.backward(t)?, self.second.backward(t)?))
    }
}

/// Builds the paired backward-renewal processes started at elapsed times
/// `b1`, `b2`, runs them until they merge, and extends both to `horizon`.
///
/// At each stream-1 renewal after stream 2 has renewed at least once, if stream
/// 2's backward time `a` is at most Θ, stream 1's next period and stream 2's
/// residual are drawn from a maximal coupling of `F` and `F_a`. An attempt is
/// skipped while stream 2 is still in a period whose residual came out of a
/// failed attempt: that residual is not `F_a`-distributed, and re-drawing it
/// would distort stream 2's law.
pub fn successful_coupling<R: Rng + ?Sized>(
    law: &DistributionView,
    b1: f64,
    b2: f64,
    config: &CouplingConfig,
    horizon: f64,
    rng: &mut R,
) -> Result<CoupledPaths> {
    config.validate()?;
    let mut e1 = vec![law.residual(b1)?.sample(rng)];
    let mut e2 = vec![law.residual(b2)?.sample(rng)];
    let mut last2 = -b2;
    let mut renewed2 = false;
    let mut tainted = false;
    let mut attempts = 0;
    let mut meets = 0;
    let mut first_attempt_met = None;
    let mut tau = None;
    // Stream-1 renewals allowed without any attempt before giving up.
    let renewal_cap = config.attempt_cap.saturating_mul(1000);
    let mut renewals = 0;

    while attempts < config.attempt_cap && renewals < renewal_cap {
        let t = *e1.last().unwrap();
        while *e2.last().unwrap() < t {
            last2 = *e2.last().unwrap();
            e2.push(last2 + law.sample(rng));
            renewed2 = true;
            tainted = false;
        }
        if *e2.last().unwrap() == t {
            tau = Some(t);
            break;
        }
        renewals += 1;
        let a = t - last2;
        if renewed2 && a <= config.theta && !tainted {
            attempts += 1;
            let draw = maximal_couple(&[law.clone(), law.residual(a)?], rng)?;
            first_attempt_met.get_or_insert(draw.met);
            e1.push(t + draw.values[0]);
            *e2.last_mut().unwrap() = t + draw.values[1];
            if draw.met {
                meets += 1;
                // Both floats equal t + x exactly.
                tau = Some(*e1.last().unwrap());
                break;
            }
            tainted = true;
        } else {
            e1.push(t + law.sample(rng));
        }
    }

    match tau {
        Some(merge) => {
            while *e1.last().unwrap() <= horizon {
                let next = *e1.last().unwrap() + law.sample(rng);
                e1.push(next);
            }
            // Stream 2 shares every epoch from the merge on.
            let keep = e2.partition_point(|e| *e < merge);
            e2.truncate(keep);
            let from = e1.partition_point(|e| *e < merge);
            e2.extend_from_slice(&e1[from..]);
        }
        None => {
            for epochs in [&mut e1, &mut e2] {
                while *epochs.last().unwrap() <= horizon {
                    let next = *epochs.last().unwrap() + law.sample(rng);
                    epochs.push(next);
                }
            }
        }
    }
    Ok(CoupledPaths {
        first: RenewalPath {
            initial_elapsed: b1,
            horizon,
            epochs: e1,
        },
        second: RenewalPath {
            initial_elapsed: b2,
            horizon,
            epochs: e2,
        },
        tau,
        attempts,
        meets,
        first_attempt_met,
    })
}

/// One row of the TV-bound curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TvRow {
    pub t: f64,
    pub tv_bound: f64,
    pub tv_empirical: f64,
    pub n_reps: usize,
}

/// Everything measured and certified in a coupling experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    pub b1: f64,
    pub b2: f64,
    pub constants: CouplingConstants,
    /// `C(ℓ, b₁, b₂)`.
    pub c: f64,
    pub replications: usize,
    pub censored: usize,
    /// Merge epochs of the uncensored replications, in replication order.
    pub taus: Vec<f64>,
    /// Summary of `τˡ` over uncensored replications.
    pub tau_moment: Summary,
    pub attempts: usize,
    pub meets: usize,
    pub first_attempts: usize,
    pub first_attempt_meets: usize,
    /// Replications whose streams disagreed at some checkpoint after τ.
    pub merge_violations: usize,
    pub curve: Vec<TvRow>,
    /// `C̄(ℓ, b₁)` when requested.
    pub stationary_coefficient: Option<f64>,
    /// `(Z¹_t, Z²_t)` samples at every grid time, `[grid index][replication]`.
    #[serde(skip)]
    pub samples: Vec<Vec<(f64, f64)>>,
}

impl CouplingReport {
    pub fn censor_rate(&self) -> f64 {
        self.censored as f64 / self.replications.max(1) as f64
    }

    /// Empirical per-attempt meet frequency and its standard error.
    pub fn meet_frequency(&self) -> (f64, f64) {
        let n = self.attempts.max(1) as f64;
        let p = self.meets as f64 / n;
        (p, (p * (1.0 - p) / n).sqrt())
    }
}

/// Options for [`run_coupling_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOptions {
    pub grid: Vec<f64>,
    pub replications: usize,
    pub seed: u64,
    pub tv_bins: usize,
    pub stationary_bound: bool,
}

/// Runs the paired construction in parallel and compares the empirical TV
/// between the two streams with the certified bound at each grid time.
pub fn run_coupling_experiment(
    law: &DistributionView,
    b1: f64,
    b2: f64,
    config: &CouplingConfig,
    options: &ExperimentOptions,
) -> Result<CouplingReport> {
    let bound = coupling_epoch_moment_bound(law, b1, b2, config)?;
    let grid = &options.grid;
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] <= 0.0 {
        return Err(Error::InvalidSpec("time grid must be positive and strictly increasing".into()));
    }
    let horizon = *grid.last().unwrap();
    let runs = replicate(options.seed, options.replications, |_, rng| {
        let paths = successful_coupling(law, b1, b2, config, horizon, rng)?;
        let at = grid.iter().map(|&t| paths.backward(t)).collect::<Result<Vec<_>>>()?;
        Ok::<_, Error>((paths.tau, paths.attempts, paths.meets, paths.first_attempt_met, at))
    });

    let mut taus = Vec::new();
    let (mut censored, mut attempts, mut meets, mut first_attempts, mut first_meets, mut violations) = (0, 0, 0, 0, 0, 0);
    let mut samples = vec![Vec::with_capacity(options.replications); grid.len()];
    for run in runs {
        let (tau, a, m, first, at) = run?;
        attempts += a;
        meets += m;
        if let Some(met) = first {
            first_attempts += 1;
            first_meets += usize::from(met);
        }
        match tau {
            Some(t) => {
                taus.push(t);
                if grid.iter().zip(&at).any(|(&g, (z1, z2))| g >= t && z1 != z2) {
                    violations += 1;
                }
            }
            None => censored += 1,
        }
        for (i, pair) in at.into_iter().enumerate() {
            samples[i].push(pair);
        }
    }
    let tau_moment = summarize(taus.iter().map(|t| t.powi(config.ell as i32)));
    let bounds = tv_bound_curve(bound.c, config.ell, grid);
    let curve = grid
        .iter()
        .zip(&bounds)
        .zip(&samples)
        .map(|((&t, &tv_bound), pairs)| {
            let z1: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let z2: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            Ok(TvRow {
                t,
                tv_bound,
                tv_empirical: empirical_tv(&z1, &z2, options.tv_bins)?,
                n_reps: pairs.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let stationary_coefficient = if options.stationary_bound {
        Some(stationary_integrated_with(law, b1, &bound.constants)?)
    } else {
        None
    };
    Ok(CouplingReport {
        b1,
        b2,
        constants: bound.constants,
        c: bound.c,
        replications: options.replications,
        censored,
        taus,
        tau_moment,
        attempts,
        meets,
        first_attempts,
        first_attempt_meets: first_meets,
        merge_violations: violations,
        curve,
        stationary_coefficient,
        samples,
    })
}

/// CSV columns `t,tv_bound,tv_empirical,n_reps` followed by the constants
/// needed to recompute the bound.
pub fn write_report_csv<W: Write>(report: &CouplingReport, out: &mut W) -> io::Result<()> {
    let k = &report.constants;
    writeln!(out, "t,tv_bound,tv_empirical,n_reps,xi,theta,p_theta,kappa_theta,pi,c")?;
    for row in &report.curve {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            row.t, row.tv_bound, row.tv_empirical, row.n_reps, k.xi, k.theta, k.p_theta, k.kappa_theta, k.pi, report.c
        )?;
    }
    Ok(())
}

/// Key/value summary block of a coupling report.
pub fn write_summary_csv<W: Write>(report: &CouplingReport, out: &mut W) -> io::Result<()> {
    let k = &report.constants;
    writeln!(out, "key,value")?;
    let (meet, meet_se) = report.meet_frequency();
    let rows: [(&str, f64); 17] = [
        ("xi", k.xi),
        ("theta", k.theta),
        ("p_theta", k.p_theta),
        ("kappa_theta", k.kappa_theta),
        ("kappa_grid_step", k.kappa_grid_step),
        ("pi", k.pi),
        ("ell", k.ell as f64),
        ("holder_r", k.holder_r),
        ("c", report.c),
        ("censor_rate", report.censor_rate()),
        ("replications", report.replications as f64),
        ("mean_tau_ell", report.tau_moment.mean),
        ("se_tau_ell", report.tau_moment.se),
        ("meet_frequency", meet),
        ("meet_frequency_se", meet_se),
        ("merge_violations", report.merge_violations as f64),
        ("stationary_coefficient", report.stationary_coefficient.unwrap_or(f64::NAN)),
    ];
    for (key, value) in rows {
        writeln!(out, "{key},{value}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::IntensitySpec;

    #[test]
    fn identical_exponentials_always_meet() {
        let e = IntensitySpec::exponential(1.0).view().unwrap();
        let couple = MaximalCouple::new(vec![e.clone(), e.residual(1.3).unwrap()]).unwrap();
        assert!((couple.kappa() - 1.0).abs() < 1e-6);
        let mut rng = stream(1, 0);
        for _ in 0..1000 {
            assert!(couple.sample(&mut rng).unwrap().met);
        }
    }

    #[test]
    fn unit_common_part_with_different_laws_is_inconsistent() {
        // Agree on the bulk, differ far in the tail: κ ≈ 1 but the laws differ.
        let a = IntensitySpec::exponential(1.0).view().unwrap();
        let b = IntensitySpec::table(vec![[0.0, 1.0], [6.0, 1.0], [6.0, 10.0]]).view().unwrap();
        let k = common_part_n(&[a.clone(), b.clone()]).unwrap();
        if k >= 1.0 - 1e-9 {
            assert!(matches!(MaximalCouple::new(vec![a, b]), Err(Error::InconsistentViews(_))));
        }
    }

    #[test]
    fn atoms_couple_on_shared_location() {
        let a = IntensitySpec::deterministic(2.0).view().unwrap();
        let mut rng = stream(2, 0);
        let draw = maximal_couple(&[a.clone(), a], &mut rng).unwrap();
        assert!(draw.met);
        assert_eq!(draw.values, vec![2.0, 2.0]);
    }

    #[test]
    fn tv_curve_clips() {
        assert_eq!(tv_bound_curve(2.0, 1, &[1.0, 10.0]), vec![1.0, 0.2]);
    }

    #[test]
    fn exponential_constants() {
        let e = IntensitySpec::exponential(1.0).view().unwrap();
        let bound = coupling_epoch_moment_bound(&e, 0.0, 0.3, &CouplingConfig::new(4.0)).unwrap();
        let k = bound.constants;
        assert!((k.xi - 2.0).abs() < 1e-9);
        assert!((k.p_theta - 0.5).abs() < 1e-9);
        assert!((k.kappa_theta - 1.0).abs() < 1e-6);
        assert!((k.pi - 0.5).abs() < 1e-6);
        let expected = 2.0 + 2f64.sqrt() / (1.0 - 0.5f64.sqrt());
        assert!((bound.c - expected).abs() < 1e-5, "{}", bound.c);
    }

    #[test]
    fn theta_below_xi_is_rejected() {
        let e = IntensitySpec::exponential(1.0).view().unwrap();
        let err = coupling_epoch_moment_bound(&e, 0.0, 0.0, &CouplingConfig::new(1.5)).unwrap_err();
        assert!(matches!(err, Error::ThetaNotAboveXi { .. }));
        assert!(err.to_string().contains("1.5"));
    }

    #[test]
    fn merged_streams_share_epochs() {
        let u = IntensitySpec::uniform(0.0, 1.0).view().unwrap();
        let config = CouplingConfig::new(0.9);
        let mut rng = stream(4, 0);
        for _ in 0..200 {
            let p = successful_coupling(&u, 0.0, 0.3, &config, 10.0, &mut rng).unwrap();
            let tau = p.tau.expect("uniform streams couple");
            for t in [tau, tau + 0.5, 9.9] {
                if t <= 10.0 {
                    let (z1, z2) = p.backward(t).unwrap();
                    assert_eq!(z1, z2);
                }
            }
        }
    }
}
