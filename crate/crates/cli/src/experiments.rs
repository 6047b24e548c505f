//! One function per experiment kind. Each returns its CSV outputs in memory
//! so that checksums are taken over exactly the bytes written.

use std::fmt::Write as _;

use renewal_coupling::coupling::{
    run_coupling_experiment, write_report_csv, write_summary_csv, CouplingConfig, CouplingConstants, ExperimentOptions,
};
use renewal_coupling::models::{
    availability, build_regenerative_copy, certified_regeneration_probability, mean_customers, simulate_queue,
    simulate_reliability, QueueDynamics, QueueState, RegenerativeCopyPlan, ReliabilityDynamics, ReliabilityState,
};
use renewal_coupling::plmp::{
    cycle_statistics_from_lengths, detect_regenerations, simulate_plmp, write_trace_csv, EventKind, Majorant, PlmpDynamics,
    PlmpState, SimulationOptions,
};
use renewal_coupling::renewal::{
    generalized_lorden_bound, lorden_bound, simulate_renewal, stationary_law, survey_quasi_renewal, survey_renewal,
    write_paths_csv, write_survey_csv,
};
use renewal_coupling::rng::{stream, try_replicate};
use renewal_coupling::stats::{binned_tv_to_law, summarize};
use renewal_coupling::{DistributionView, Error as ModelError};

use crate::config::{ExperimentConfig, Kind, TransitionKind};
use crate::error::{CliError, Keyed};

/// A named CSV produced by a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Everything an experiment produced.
#[derive(Debug)]
pub struct Outcome {
    pub outputs: Vec<Output>,
    /// Human-readable summary lines.
    pub summary: Vec<String>,
    /// Set when the outputs are complete but a run-level threshold was breached.
    pub breach: Option<CliError>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            outputs: Vec::new(),
            summary: Vec::new(),
            breach: None,
        }
    }

    fn push(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.outputs.push(Output { name: name.into(), bytes });
    }
}

/// Runs the experiment named in `config`.
pub fn execute(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    match config.experiment.kind {
        Kind::RenewalSurvey => renewal_survey(config),
        Kind::QuasiRenewalSurvey => quasi_survey(config),
        Kind::Couple | Kind::TvCurve => coupling(config),
        Kind::PlmpRun => plmp_run(config),
        Kind::Reliability => reliability(config),
        Kind::Queue => queue(config),
        Kind::RegenCopy => regen_copy(config),
    }
}

/// Dry-run checks; an empty list means the config is runnable.
pub fn validate(config: &ExperimentConfig) -> Vec<String> {
    let mut out = Vec::new();
    let law = config.distribution.as_ref().map(|d| d.to_intensity().and_then(|s| s.view()));
    match &law {
        Some(Err(e)) => out.push(format!("distribution: {e}")),
        Some(Ok(view)) => {
            if matches!(config.experiment.kind, Kind::Couple | Kind::TvCurve) && config.bounds.is_some() {
                if let Err(e) = coupling_config(config).and_then(|c| CouplingConstants::compute(view, &c).key("bounds.theta")) {
                    out.push(e.to_string());
                }
            }
        }
        None => {}
    }
    if let Some(q) = &config.quasi {
        out.extend(q.spec().diagnostics().into_iter().map(|d| format!("quasi: {d}")));
    }
    if let Some(r) = &config.reliability {
        match reliability_dynamics(config) {
            Err(e) => out.push(e.to_string()),
            Ok(d) => {
                let diags = d.diagnostics();
                let clean = diags.is_empty();
                out.extend(diags.into_iter().map(|m| format!("reliability.envelopes: {m}")));
                if clean && config.experiment.kind == Kind::RegenCopy && r.envelopes.is_some() {
                    if let Some(b) = &config.bounds {
                        if let Err(e) = RegenerativeCopyPlan::new(&d, b.theta) {
                            out.push(format!("bounds.theta: {e}"));
                        }
                    }
                }
            }
        }
    }
    if let Some(p) = &config.plmp {
        if let Err(e) = PlmpState::new(p.initial.iter().copied()) {
            out.push(format!("plmp.initial: {e}"));
        }
    }
    out
}

fn law(config: &ExperimentConfig) -> Result<DistributionView, CliError> {
    let spec = config.distribution.as_ref().ok_or_else(|| CliError::config("distribution", "section is missing"))?;
    spec.to_intensity().and_then(|s| s.view()).key("distribution")
}

fn csv(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    write(&mut buf).expect("writing to memory cannot fail");
    buf
}

fn renewal_survey(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let e = &config.experiment;
    let law = law(config)?;
    let xi = lorden_bound(&law).key("distribution")?;
    // Second-order analogue `E ξ² + E ξ³ / (3 E ξ)`; infinite without a third moment.
    let xi2 = match law.moment(3) {
        Ok(m3) => law.moment(2).key("distribution")? + m3 / (3.0 * law.mean().key("distribution")?),
        Err(ModelError::InfiniteMoment { .. }) => f64::INFINITY,
        Err(err) => return Err(CliError::model("distribution", err)),
    };
    let survey = survey_renewal(&law, e.initial_elapsed, &e.grid, e.replications, e.seed).key("experiment")?;
    let rows = survey.rows();
    let mut out = Outcome::new();
    out.push("survey.csv", csv(|w| write_survey_csv(&rows, xi, xi2, w)));
    if config.output.paths > 0 {
        let horizon = *e.grid.last().unwrap();
        let paths = (0..config.output.paths.min(e.replications))
            .map(|r| simulate_renewal(&law, e.initial_elapsed, horizon, &mut stream(e.seed, r as u64)))
            .collect::<Result<Vec<_>, _>>()
            .key("experiment")?;
        out.push("paths.csv", csv(|w| write_paths_csv(&paths, w)));
    }
    let worst = rows.iter().map(|r| r.b.mean).fold(0.0, f64::max);
    out.summary.push(format!("Lorden bound Xi = {xi}; largest mean backward time {worst}"));
    Ok(out)
}

fn quasi_survey(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let e = &config.experiment;
    let q = config.quasi.as_ref().unwrap();
    let spec = q.spec();
    if let Some(d) = spec.diagnostics().into_iter().next() {
        return Err(CliError::Envelope {
            key: "quasi".into(),
            message: d,
        });
    }
    let xi = generalized_lorden_bound(&spec, 1).key("quasi.moment_order")?.xi_ell;
    let xi2 = if spec.moment_order >= 3 {
        generalized_lorden_bound(&spec, 2).key("quasi.moment_order")?.xi_ell
    } else {
        f64::INFINITY
    };
    let survey = survey_quasi_renewal(&spec, &e.grid, e.replications, e.seed).key("quasi")?;
    let rows = survey.rows();
    let mut out = Outcome::new();
    out.push("survey.csv", csv(|w| write_survey_csv(&rows, xi, xi2, w)));
    out.summary.push(format!("generalized bounds Xi_1 = {xi}, Xi_2 = {xi2}"));
    Ok(out)
}

fn coupling_config(config: &ExperimentConfig) -> Result<CouplingConfig, CliError> {
    let b = config.bounds.as_ref().ok_or_else(|| CliError::config("bounds", "section is missing"))?;
    if b.ell == 0 {
        return Err(CliError::config("bounds.ell", "must be at least 1"));
    }
    let mut c = CouplingConfig::new(b.theta).with_ell(b.ell).with_holder_r(b.holder_r);
    if let Some(cap) = b.attempt_cap {
        c = c.with_attempt_cap(cap);
    }
    Ok(c)
}

fn coupling(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let e = &config.experiment;
    let b = config.bounds.as_ref().unwrap();
    let law = law(config)?;
    let cc = coupling_config(config)?;
    CouplingConstants::compute(&law, &cc).key("bounds.theta")?;
    let options = ExperimentOptions {
        grid: e.grid.clone(),
        replications: e.replications,
        seed: e.seed,
        tv_bins: b.tv_bins,
        stationary_bound: b.stationary || e.kind == Kind::TvCurve,
    };
    let report = run_coupling_experiment(&law, b.b1, b.b2, &cc, &options).key("bounds")?;
    let mut out = Outcome::new();
    out.push("summary.csv", csv(|w| write_summary_csv(&report, w)));
    if e.kind == Kind::Couple {
        let mut taus = String::from("index,tau\n");
        for (i, t) in report.taus.iter().enumerate() {
            writeln!(taus, "{i},{t}").unwrap();
        }
        out.push("taus.csv", taus.into_bytes());
    } else {
        out.push("tv.csv", csv(|w| write_report_csv(&report, w)));
        let stationary = stationary_law(&law).key("distribution")?;
        let cbar = report.stationary_coefficient.unwrap_or(f64::NAN);
        let mut rows = String::from("t,tv_bound,tv_empirical,n_reps,c_bar\n");
        for (i, &t) in e.grid.iter().enumerate() {
            let z1: Vec<f64> = report.samples[i].iter().map(|p| p.0).collect();
            let tv = binned_tv_to_law(&z1, |x| stationary.cdf(x), b.tv_bins);
            writeln!(rows, "{t},{},{tv},{},{cbar}", (cbar / t).min(1.0), z1.len()).unwrap();
        }
        out.push("tv_stationary.csv", rows.into_bytes());
    }
    let (meet, _) = report.meet_frequency();
    out.summary.push(format!(
        "Xi = {}, Theta = {}, pi = {}, C = {}, mean tau^ell = {}, censored {}/{}, meet frequency {meet}",
        report.constants.xi, report.constants.theta, report.constants.pi, report.c, report.tau_moment.mean, report.censored,
        report.replications
    ));
    if report.censor_rate() > b.censor_threshold {
        out.breach = Some(CliError::Censoring {
            rate: report.censor_rate(),
            threshold: b.censor_threshold,
        });
    }
    Ok(out)
}

fn plmp_dynamics(config: &ExperimentConfig) -> Result<PlmpDynamics, CliError> {
    let p = config.plmp.as_ref().unwrap();
    let mut d = PlmpDynamics::new();
    for t in &p.transitions {
        let labels = t.labels.clone();
        let rate: Box<dyn Fn(&PlmpState) -> f64 + Send + Sync> = match (&t.rate, &t.hazard, t.clock) {
            (Some(r), _, _) => {
                let r = *r;
                Box::new(move |_| r)
            }
            (None, Some(h), Some(label)) => {
                let h = h.clone();
                Box::new(move |s: &PlmpState| s.clock(label).map_or(0.0, |c| h.eval(c)))
            }
            _ => unreachable!("checked when the config was parsed"),
        };
        d = match t.kind {
            TransitionKind::Zero => d.zero(labels, rate),
            TransitionKind::Add => d.add(labels, rate),
            TransitionKind::Delete => d.delete(labels, rate),
        };
    }
    if let Some(m) = p.majorant {
        d = d.with_majorant(move |_| Majorant::constant(m));
    }
    Ok(d)
}

fn plmp_run(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let e = &config.experiment;
    let p = config.plmp.as_ref().unwrap();
    let horizon = e.horizon.unwrap();
    let dynamics = plmp_dynamics(config)?;
    let initial = PlmpState::new(p.initial.iter().copied()).key("plmp.initial")?;
    let mut options = config.simulation.options();
    if p.anchor.is_none() {
        options = options.without_states();
    }
    let anchor = p.anchor.clone().map(|mut a| {
        a.sort_unstable();
        a
    });
    let runs = try_replicate(e.seed, e.replications, |r, rng| {
        let trace = simulate_plmp(initial.clone(), &dynamics, horizon, &options, rng)?;
        let regen = match &anchor {
            Some(a) => detect_regenerations(&trace, |s: &PlmpState| s.labels() == a.as_slice() && s.clocks().iter().all(|&c| c == 0.0)),
            None => Vec::new(),
        };
        let trace_csv = (r < config.output.paths).then(|| csv(|w| write_trace_csv(&trace, w)));
        let count = |k: EventKind| trace.events.iter().filter(|ev| ev.kind == k).count();
        let counts = [count(EventKind::Zero), count(EventKind::Add), count(EventKind::Delete)];
        Ok::<_, ModelError>((counts, trace.final_state.rank(), regen, trace_csv))
    })
    .key("plmp")?;
    let mut out = Outcome::new();
    let mut table = String::from("replication,events,zero,add,delete,final_rank,regenerations\n");
    let mut lengths = Vec::new();
    let mut traces = Vec::new();
    for (r, (c, rank, regen, trace)) in runs.into_iter().enumerate() {
        writeln!(table, "{r},{},{},{},{},{rank},{}", c[0] + c[1] + c[2], c[0], c[1], c[2], regen.len()).unwrap();
        lengths.extend(regen.windows(2).map(|w| w[1] - w[0]));
        if let Some(t) = trace {
            traces.push((r, t));
        }
    }
    out.push("runs.csv", table.into_bytes());
    if anchor.is_some() && lengths.len() >= 2 {
        let s = cycle_statistics_from_lengths(&lengths).key("plmp.anchor")?;
        let mut c = String::from("key,value\n");
        for (k, v) in [
            ("cycles", s.cycles as f64),
            ("mean", s.mean),
            ("mean_se", s.mean_se),
            ("second_moment", s.second_moment),
            ("second_moment_se", s.second_moment_se),
            ("xi_hat", s.xi_hat),
            ("xi_se", s.xi_se),
        ] {
            writeln!(c, "{k},{v}").unwrap();
        }
        out.push("cycles.csv", c.into_bytes());
        out.summary.push(format!("{} complete cycles, mean length {}", s.cycles, s.mean));
    }
    for (r, t) in traces {
        out.push(format!("trace_{r}.csv"), t);
    }
    Ok(out)
}

fn reliability_dynamics(config: &ExperimentConfig) -> Result<ReliabilityDynamics, CliError> {
    let r = config.reliability.as_ref().unwrap();
    let mut d = ReliabilityDynamics::from_channels(r.channels(), &r.interactions).key("reliability")?;
    if let Some(env) = &r.envelopes {
        d = d.with_envelopes(env.clone());
    }
    Ok(d)
}

fn snapshot_rows(table: &mut String, r: usize, snaps: &[(f64, ReliabilityState)]) {
    for (t, s) in snaps {
        writeln!(table, "{r},{t},{},{},{},{}", s.modes[0], s.modes[1], s.elapsed[0], s.elapsed[1]).unwrap();
    }
}

fn reliability(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let e = &config.experiment;
    let r = config.reliability.as_ref().unwrap();
    let horizon = e.horizon.unwrap();
    let dynamics = reliability_dynamics(config)?;
    let options: SimulationOptions = config.simulation.options().without_states().with_snapshots(r.snapshots.clone());
    let runs = try_replicate(e.seed, e.replications, |i, rng| {
        let trace = simulate_reliability(&dynamics, ReliabilityState::fresh(), horizon, &options, rng)?;
        let trace_csv = (i < config.output.paths).then(|| csv(|w| write_trace_csv(&trace, w)));
        Ok::<_, ModelError>(([availability(&trace, 0), availability(&trace, 1)], trace.events.len(), trace.snapshots, trace_csv))
    })
    .key("reliability")?;
    let mut out = Outcome::new();
    let mut table = String::from("replication,availability_0,availability_1,flips\n");
    let mut snaps = String::from("replication,t,mode_0,mode_1,elapsed_0,elapsed_1\n");
    let mut traces = Vec::new();
    let mut first = Vec::with_capacity(runs.len());
    for (i, (a, flips, s, trace)) in runs.into_iter().enumerate() {
        writeln!(table, "{i},{},{},{flips}", a[0], a[1]).unwrap();
        snapshot_rows(&mut snaps, i, &s);
        first.push(a[0]);
        if let Some(t) = trace {
            traces.push((i, t));
        }
    }
    out.push("availability.csv", table.into_bytes());
    if !r.snapshots.is_empty() {
        out.push("snapshots.csv", snaps.into_bytes());
    }
    for (i, t) in traces {
        out.push(format!("trace_{i}.csv"), t);
    }
    let s = summarize(first);
    out.summary.push(format!("availability of element 0: {} (se {})", s.mean, s.se));
    Ok(out)
}

fn queue(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let e = &config.experiment;
    let q = config.queue.as_ref().unwrap();
    let horizon = e.horizon.unwrap();
    let (lambda, mu) = (q.arrival_rate, q.service_rate);
    if !(lambda >= 0.0 && mu >= 0.0 && lambda.is_finite() && mu.is_finite()) {
        return Err(CliError::config("queue", "arrival and service rates must be finite and nonnegative"));
    }
    let dynamics = if q.discouraged {
        QueueDynamics::new(move |s| lambda / (1.0 + s.customers() as f64), move |_, _| mu)
            .with_majorant(move |s| Majorant::constant(lambda + mu * s.customers() as f64))
    } else {
        QueueDynamics::mm_inf(lambda, mu)
    };
    let options = config.simulation.options();
    let runs = try_replicate(e.seed, e.replications, |i, rng| {
        let trace = simulate_queue(&dynamics, QueueState::empty(), horizon, &options, rng)?;
        let regen = detect_regenerations(&trace, QueueState::is_regeneration);
        let trace_csv = (i < config.output.paths).then(|| csv(|w| write_trace_csv(&trace, w)));
        Ok::<_, ModelError>((mean_customers(&trace), trace.events.len(), regen.len(), trace_csv))
    })
    .key("queue")?;
    let mut out = Outcome::new();
    let mut table = String::from("replication,mean_customers,events,regenerations\n");
    let mut means = Vec::with_capacity(runs.len());
    let mut traces = Vec::new();
    for (i, (m, n, regen, trace)) in runs.into_iter().enumerate() {
        writeln!(table, "{i},{m},{n},{regen}").unwrap();
        means.push(m);
        if let Some(t) = trace {
            traces.push((i, t));
        }
    }
    out.push("runs.csv", table.into_bytes());
    let s = summarize(means);
    let mut summary = format!("key,value\nmean_customers,{}\nse,{}\n", s.mean, s.se);
    if !q.discouraged && mu > 0.0 {
        writeln!(summary, "stationary_mean,{}", lambda / mu).unwrap();
    }
    out.push("summary.csv", summary.into_bytes());
    for (i, t) in traces {
        out.push(format!("trace_{i}.csv"), t);
    }
    out.summary.push(format!("time-average number of customers {} (se {})", s.mean, s.se));
    Ok(out)
}

fn regen_copy(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let e = &config.experiment;
    let r = config.reliability.as_ref().unwrap();
    let b = config.bounds.as_ref().unwrap();
    let horizon = e.horizon.unwrap();
    let dynamics = reliability_dynamics(config)?;
    if let Some(d) = dynamics.diagnostics().into_iter().next() {
        return Err(CliError::Envelope {
            key: "reliability.envelopes".into(),
            message: d,
        });
    }
    let plan = RegenerativeCopyPlan::new(&dynamics, b.theta).key("bounds.theta")?;
    let runs = try_replicate(e.seed, e.replications, |_, rng| {
        build_regenerative_copy(&dynamics, &plan, horizon, &r.snapshots, rng)
    })
    .key("reliability")?;
    let mut table = String::from("replication,cycles,successful_cycles,regenerations,first_regeneration\n");
    let mut snaps = String::from("replication,t,mode_0,mode_1,elapsed_0,elapsed_1\n");
    let (mut cycles, mut ok, mut never) = (0, 0, 0);
    for (i, c) in runs.iter().enumerate() {
        let first = c.regenerations.first().copied().unwrap_or(f64::NAN);
        writeln!(table, "{i},{},{},{},{first}", c.cycles, c.successful_cycles, c.regenerations.len()).unwrap();
        snapshot_rows(&mut snaps, i, &c.snapshots);
        cycles += c.cycles;
        ok += c.successful_cycles;
        never += usize::from(c.regenerations.is_empty());
    }
    let p = ok as f64 / cycles.max(1) as f64;
    let se = (p * (1.0 - p) / cycles.max(1) as f64).sqrt();
    let bound = certified_regeneration_probability(&plan);
    let mut summary = String::from("key,value\n");
    for (k, v) in [
        ("theta", plan.theta),
        ("xi", plan.xi),
        ("q1", plan.q1),
        ("q2", plan.q2),
        ("kappa_theta", plan.kappa_theta),
        ("certified_probability", bound),
        ("cycle_frequency", p),
        ("cycle_frequency_se", se),
        ("cycles", cycles as f64),
        ("replications_without_regeneration", never as f64),
    ] {
        writeln!(summary, "{k},{v}").unwrap();
    }
    let mut out = Outcome::new();
    out.push("runs.csv", table.into_bytes());
    out.push("summary.csv", summary.into_bytes());
    if !r.snapshots.is_empty() {
        out.push("snapshots.csv", snaps.into_bytes());
    }
    out.summary.push(format!("certified per-cycle probability {bound}; observed {p} (se {se})"));
    Ok(out)
}
