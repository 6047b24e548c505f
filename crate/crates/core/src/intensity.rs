//! Lifetime distributions described by (generalized) intensity functions.
//!
//! An [`IntensitySpec`] is a continuous hazard `λ(s)` plus an ordered list of
//! atoms. Building a [`DistributionView`] tabulates the cumulative hazard
//! `Λ(s) = ∫₀ˢ λ(u) du + Σ_{aᵢ ≤ s} −ln(1 − cᵢ)` on adaptive Gauss–Kronrod
//! panels, so that `F(s) = 1 − exp(−Λ(s))` everywhere. Here `cᵢ` is the
//! *conditional* jump probability `P{ξ = aᵢ | ξ ≥ aᵢ}`; an atom given by its
//! unconditional mass `qᵢ` is converted with `cᵢ = qᵢ / (1 − F(aᵢ−))`.
//!
//! Every derived quantity (CDF, density, quantile, sampling, moments,
//! residual laws, common parts) is computed from that single table.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::quadrature::{gk15, integrate_pieces};
use crate::rng::open_unit;

/// Cumulative hazard level at which the table stops (`S < 1e-26`).
pub(crate) const LAMBDA_MAX: f64 = 60.0;
/// `−ln(1e-9)`: the table must reach at least this level to be admissible.
const ADMISSIBLE_LEVEL: f64 = 20.723_265_836_946_41;
/// Largest time the tabulation will probe.
const HORIZON_CAP: f64 = 1e30;
const INITIAL_STEP: f64 = 0.0625;

pub type HazardFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed-form lifetime families, expressed through their hazard rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ClosedForm {
    Exponential { rate: f64 },
    Uniform { low: f64, high: f64 },
    Gamma { shape: f64, rate: f64 },
    Weibull { shape: f64, scale: f64 },
}

/// Serializable hazard description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HazardSpec {
    ConstantHazard {
        rate: f64,
    },
    /// Piecewise-linear `(s, λ(s))` knots starting at `s = 0`, held constant
    /// after the last knot. Repeated `s` values encode a jump (right-continuous).
    TableHazard {
        knots: Vec<[f64; 2]>,
    },
    ClosedForm(ClosedForm),
}

impl HazardSpec {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        match self {
            HazardSpec::ConstantHazard { rate } if !(rate.is_finite() && *rate >= 0.0) => {
                bad(format!("constant hazard rate must be finite and >= 0, got {rate}"))
            }
            HazardSpec::TableHazard { knots } => {
                if knots.is_empty() || knots[0][0] != 0.0 {
                    return bad("table hazard needs a first knot at s = 0".into());
                }
                for w in knots.windows(2) {
                    if !(w[1][0] >= w[0][0]) {
                        return bad("table hazard knots must be sorted by s".into());
                    }
                }
                if let Some(k) = knots.iter().find(|k| !(k[1].is_finite() && k[1] >= 0.0 && k[0].is_finite())) {
                    return Err(Error::NegativeHazard { at: k[0], value: k[1] });
                }
                Ok(())
            }
            HazardSpec::ClosedForm(ClosedForm::Exponential { rate }) if !(rate.is_finite() && *rate > 0.0) => {
                bad(format!("exponential rate must be positive, got {rate}"))
            }
            HazardSpec::ClosedForm(ClosedForm::Uniform { low, high }) if !(*low >= 0.0 && high > low && high.is_finite()) => {
                bad(format!("uniform needs 0 <= low < high, got ({low}, {high})"))
            }
            HazardSpec::ClosedForm(ClosedForm::Gamma { shape, rate }) if !(*shape > 0.0 && *rate > 0.0) => {
                bad(format!("gamma needs positive shape and rate, got ({shape}, {rate})"))
            }
            HazardSpec::ClosedForm(ClosedForm::Weibull { shape, scale }) if !(*shape > 0.0 && *scale > 0.0) => {
                bad(format!("weibull needs positive shape and scale, got ({shape}, {scale})"))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            HazardSpec::ConstantHazard { rate } => *rate,
            HazardSpec::TableHazard { knots } => table_eval(knots, s),
            HazardSpec::ClosedForm(cf) => match *cf {
                ClosedForm::Exponential { rate } => rate,
                ClosedForm::Uniform { low, high } => {
                    if s < low {
                        0.0
                    } else if s < high {
                        1.0 / (high - s)
                    } else {
                        f64::INFINITY
                    }
                }
                ClosedForm::Gamma { shape, rate } => gamma_hazard(shape, rate, s),
                ClosedForm::Weibull { shape, scale } => {
                    if s <= 0.0 {
                        return match shape.partial_cmp(&1.0) {
                            Some(std::cmp::Ordering::Less) => f64::INFINITY,
                            Some(std::cmp::Ordering::Equal) => 1.0 / scale,
                            _ => 0.0,
                        };
                    }
                    shape / scale * (s / scale).powf(shape - 1.0)
                }
            },
        }
    }

    fn support_end(&self) -> Option<f64> {
        match self {
            HazardSpec::ClosedForm(ClosedForm::Uniform { high, .. }) => Some(*high),
            _ => None,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            HazardSpec::TableHazard { knots } => knots.iter().map(|k| k[0]).collect(),
            HazardSpec::ClosedForm(ClosedForm::Uniform { low, high }) => vec![*low, *high],
            _ => Vec::new(),
        }
    }

    /// Supremum of the hazard on `[lo, hi]`.
    pub fn sup_on(&self, lo: f64, hi: f64) -> f64 {
        match self {
            HazardSpec::ConstantHazard { rate } => *rate,
            HazardSpec::TableHazard { knots } => {
                let inner = knots
                    .iter()
                    .filter(|k| k[0] >= lo && k[0] <= hi)
                    .map(|k| k[1])
                    .fold(0.0, f64::max);
                inner.max(table_eval(knots, lo)).max(table_eval(knots, hi))
            }
            HazardSpec::ClosedForm(cf) => match *cf {
                ClosedForm::Exponential { rate } => rate,
                ClosedForm::Uniform { .. } => self.eval(hi),
                ClosedForm::Gamma { shape, .. } | ClosedForm::Weibull { shape, .. } => {
                    if shape >= 1.0 {
                        self.eval(hi)
                    } else {
                        self.eval(lo)
                    }
                }
            },
        }
    }
}

fn table_eval(knots: &[[f64; 2]], s: f64) -> f64 {
    let idx = knots.partition_point(|k| k[0] <= s);
    if idx == 0 {
        return knots[0][1];
    }
    let left = knots[idx - 1];
    match knots.get(idx) {
        None => left[1],
        Some(right) => {
            let w = (s - left[0]) / (right[0] - left[0]);
            left[1] + w * (right[1] - left[1])
        }
    }
}

fn gamma_hazard(shape: f64, rate: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return if shape < 1.0 {
            f64::INFINITY
        } else if shape == 1.0 {
            rate
        } else {
            0.0
        };
    }
    let x = rate * s;
    if shape.fract() == 0.0 && shape <= 64.0 {
        let k = shape as usize;
        if x < shape {
            // Σ_{j<k} x^j/j! and its last term.
            let mut term = 1.0;
            let mut sum = 1.0;
            for j in 1..k {
                term *= x / j as f64;
                sum += term;
            }
            return rate * term / sum;
        }
        // Same ratio, normalized by the last term to avoid overflow.
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 1..k {
            term *= (k - m) as f64 / x;
            sum += term;
        }
        return rate / sum;
    }
    let upper = gamma_ur(shape, x);
    if upper < 1e-280 {
        return rate / (1.0 - (shape - 1.0) / x).max(1e-12);
    }
    let ln_density = (shape - 1.0) * x.ln() - x - ln_gamma(shape);
    rate * ln_density.exp() / upper
}

/// Hazard: either a serializable spec or an arbitrary callback.
#[derive(Clone)]
pub enum Hazard {
    Spec(HazardSpec),
    Custom(CustomHazard),
}

/// A user-supplied hazard function with optional structural hints.
#[derive(Clone)]
pub struct CustomHazard {
    f: HazardFn,
    breakpoints: Vec<f64>,
    support_end: Option<f64>,
}

impl CustomHazard {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            breakpoints: Vec::new(),
            support_end: None,
        }
    }

    /// Points where the hazard has a kink or jump.
    pub fn with_breakpoints(mut self, points: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(points);
        self
    }

    /// Time at which the hazard explodes (end of support).
    pub fn with_support_end(mut self, end: f64) -> Self {
        self.support_end = Some(end);
        self
    }
}

impl fmt::Debug for Hazard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hazard::Spec(spec) => spec.fmt(f),
            Hazard::Custom(c) => f
                .debug_struct("Custom")
                .field("breakpoints", &c.breakpoints)
                .field("support_end", &c.support_end)
                .finish(),
        }
    }
}

impl Hazard {
    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Hazard::Spec(spec) => spec.eval(s),
            Hazard::Custom(c) => (c.f)(s),
        }
    }

    fn support_end(&self) -> Option<f64> {
        match self {
            Hazard::Spec(spec) => spec.support_end(),
            Hazard::Custom(c) => c.support_end,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Hazard::Spec(spec) => spec.breakpoints(),
            Hazard::Custom(c) => c.breakpoints.clone(),
        }
    }

    /// Supremum on `[lo, hi]` when it can be computed without search.
    pub fn sup_on(&self, lo: f64, hi: f64) -> Option<f64> {
        match self {
            Hazard::Spec(spec) => Some(spec.sup_on(lo, hi)),
            Hazard::Custom(_) => None,
        }
    }

    pub fn spec(&self) -> Option<&HazardSpec> {
        match self {
            Hazard::Spec(spec) => Some(spec),
            Hazard::Custom(_) => None,
        }
    }
}

/// Atom weight: conditional jump probability or unconditional mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AtomWeight {
    /// `P{ξ = a | ξ ≥ a}`.
    Jump(f64),
    /// `P{ξ = a}`.
    Mass(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub at: f64,
    pub weight: AtomWeight,
}

/// A lifetime law given by its continuous hazard and its atoms.
#[derive(Debug, Clone)]
pub struct IntensitySpec {
    hazard: Hazard,
    atoms: Vec<Atom>,
    support_hint: Option<f64>,
}

impl IntensitySpec {
    pub fn new(hazard: Hazard) -> Self {
        Self {
            hazard,
            atoms: Vec::new(),
            support_hint: None,
        }
    }

    pub fn from_spec(spec: HazardSpec) -> Self {
        Self::new(Hazard::Spec(spec))
    }

    pub fn constant(rate: f64) -> Self {
        Self::from_spec(HazardSpec::ConstantHazard { rate })
    }

    pub fn table(knots: Vec<[f64; 2]>) -> Self {
        Self::from_spec(HazardSpec::TableHazard { knots })
    }

    pub fn exponential(rate: f64) -> Self {
        Self::from_spec(HazardSpec::ClosedForm(ClosedForm::Exponential { rate }))
    }

    pub fn uniform(low: f64, high: f64) -> Self {
        Self::from_spec(HazardSpec::ClosedForm(ClosedForm::Uniform { low, high }))
    }

    pub fn gamma(shape: f64, rate: f64) -> Self {
        Self::from_spec(HazardSpec::ClosedForm(ClosedForm::Gamma { shape, rate }))
    }

    pub fn weibull(shape: f64, scale: f64) -> Self {
        Self::from_spec(HazardSpec::ClosedForm(ClosedForm::Weibull { shape, scale }))
    }

    /// Lifetime equal to `at` with probability one.
    pub fn deterministic(at: f64) -> Self {
        Self::constant(0.0).with_atom(at, 1.0)
    }

    pub fn custom(hazard: CustomHazard) -> Self {
        Self::new(Hazard::Custom(hazard))
    }

    /// Adds an atom with conditional jump probability `jump ∈ (0, 1]`.
    pub fn with_atom(mut self, at: f64, jump: f64) -> Self {
        self.atoms.push(Atom {
            at,
            weight: AtomWeight::Jump(jump),
        });
        self
    }

    /// Adds an atom carrying unconditional probability `mass`.
    pub fn with_atom_mass(mut self, at: f64, mass: f64) -> Self {
        self.atoms.push(Atom {
            at,
            weight: AtomWeight::Mass(mass),
        });
        self
    }

    pub fn with_support_hint(mut self, hint: f64) -> Self {
        self.support_hint = Some(hint);
        self
    }

    pub fn hazard(&self) -> &Hazard {
        &self.hazard
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Tabulates the cumulative hazard and validates admissibility.
    pub fn view(&self) -> Result<DistributionView> {
        let table = Table::build(self)?;
        Ok(DistributionView {
            table: Arc::new(table),
            offset: 0.0,
            offset_cum: 0.0,
        })
    }
}

/// Serializable distribution description: hazard kind plus atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    #[serde(flatten)]
    pub hazard: HazardSpec,
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub support_hint: Option<f64>,
}

/// One atom in a [`DistributionSpec`]; exactly one of `jump`/`mass` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub at: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jump: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
}

impl DistributionSpec {
    pub fn to_intensity(&self) -> Result<IntensitySpec> {
        let mut spec = IntensitySpec::from_spec(self.hazard.clone());
        for atom in &self.atoms {
            spec = match (atom.jump, atom.mass) {
                (Some(j), None) => spec.with_atom(atom.at, j),
                (None, Some(m)) => spec.with_atom_mass(atom.at, m),
                _ => {
                    return Err(Error::InvalidSpec(format!(
                        "atom at {} needs exactly one of `jump` or `mass`",
                        atom.at
                    )))
                }
            };
        }
        if let Some(h) = self.support_hint {
            spec = spec.with_support_hint(h);
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    /// Λ(a−): before any atom located at `a`.
    cum_left_a: f64,
    /// Λ(a): after the atom at `a`, if any.
    cum_a: f64,
    /// Λ(b−).
    cum_b: f64,
}

#[derive(Debug, Clone, Copy)]
struct ResolvedAtom {
    at: f64,
    jump: f64,
    cum_left: f64,
}

/// How the tabulated support ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportEnd {
    /// Hazard explodes at a finite time.
    Explodes,
    /// An atom with jump probability one.
    TerminalAtom,
    /// Survival fell below `exp(-60)`.
    Truncated,
    /// Probe horizon or support hint reached.
    Horizon,
}

#[derive(Debug)]
struct Table {
    hazard: Hazard,
    panels: Vec<Panel>,
    atoms: Vec<ResolvedAtom>,
    end: f64,
    end_kind: SupportEnd,
}

impl Table {
    fn build(spec: &IntensitySpec) -> Result<Table> {
        if let Hazard::Spec(s) = &spec.hazard {
            s.validate()?;
        }
        let mut atoms = spec.atoms.clone();
        for atom in &atoms {
            let w = match atom.weight {
                AtomWeight::Jump(w) | AtomWeight::Mass(w) => w,
            };
            if !(atom.at > 0.0 && atom.at.is_finite()) {
                return Err(Error::InvalidSpec(format!("atom location must be positive, got {}", atom.at)));
            }
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::InvalidSpec(format!(
                    "atom weight at {} must lie in (0, 1], got {w}",
                    atom.at
                )));
            }
        }
        atoms.sort_by(|x, y| x.at.total_cmp(&y.at));
        if atoms.windows(2).any(|w| w[0].at == w[1].at) {
            return Err(Error::InvalidSpec("atom locations must be distinct".into()));
        }

        let hazard = spec.hazard.clone();
        let support_end = hazard.support_end();
        let mut breaks: Vec<f64> = hazard.breakpoints();
        breaks.extend(atoms.iter().map(|a| a.at));
        breaks.extend(spec.support_hint);
        breaks.retain(|b| *b > 0.0 && b.is_finite());
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        let probe = std::cell::Cell::new((f64::INFINITY, 0.0));
        let h = |s: f64| {
            let v = hazard.eval(s);
            if !(v >= 0.0) && probe.get().1 >= 0.0 {
                probe.set((s, v));
            }
            v
        };

        let mut panels = Vec::new();
        let mut resolved = Vec::new();
        let mut x = 0.0f64;
        let mut cum = 0.0f64;
        let mut step = INITIAL_STEP;
        let mut next_atom = 0usize;
        let (end, end_kind) = loop {
            let cum_left = cum;
            if next_atom < atoms.len() && atoms[next_atom].at == x {
                let atom = atoms[next_atom];
                let survival = (-cum).exp();
                let jump = match atom.weight {
                    AtomWeight::Jump(c) => c,
                    AtomWeight::Mass(q) => {
                        let c = q / survival;
                        if c > 1.0 + 1e-9 {
                            return Err(Error::InvalidSpec(format!(
                                "atom mass {q} at {} exceeds remaining survival {survival}",
                                atom.at
                            )));
                        }
                        c.min(1.0)
                    }
                };
                resolved.push(ResolvedAtom {
                    at: x,
                    jump,
                    cum_left: cum,
                });
                next_atom += 1;
                if jump >= 1.0 - 1e-12 {
                    break (x, SupportEnd::TerminalAtom);
                }
                cum += -(-jump).ln_1p();
            }
            if cum >= LAMBDA_MAX {
                break (x, SupportEnd::Truncated);
            }
            if let Some(hint) = spec.support_hint {
                if x >= hint {
                    break (x, SupportEnd::Horizon);
                }
            }
            if x >= HORIZON_CAP {
                break (x, SupportEnd::Horizon);
            }
            let next_break = breaks.iter().copied().find(|b| *b > x).unwrap_or(f64::INFINITY);
            let mut width = step.min(next_break - x);
            let mut lands_on_break = width == next_break - x;
            if let Some(e) = support_end {
                if e - x <= 1e-15 * e.max(1.0) {
                    break (x, SupportEnd::Explodes);
                }
                if next_break >= e && width > 0.5 * (e - x) {
                    width = 0.5 * (e - x);
                    lands_on_break = false;
                }
            }
            let (k, err) = gk15(&h, x, x + width);
            let (bad_at, bad_value) = probe.get();
            if bad_at.is_finite() {
                return Err(Error::NegativeHazard {
                    at: bad_at,
                    value: bad_value,
                });
            }
            if !k.is_finite() {
                if width <= 1e-14 * x.max(1e-3) {
                    return Err(Error::NonIntegrableHazard { at: x });
                }
                step = 0.5 * width;
                continue;
            }
            let tiny = width <= 1e-13 * x.max(1e-3);
            // Where the survival is already small, Λ only needs absolute
            // accuracy relative to e^Λ; this also stops roundoff in the hazard
            // near an exploding support end from forcing ever smaller panels.
            let tol = (1e-11 * k).max(1e-15).max(1e-14 * cum.exp());
            if err <= tol || tiny {
                let b = if lands_on_break { next_break } else { x + width };
                panels.push(Panel {
                    a: x,
                    b,
                    cum_left_a: cum_left,
                    cum_a: cum,
                    cum_b: cum + k,
                });
                cum += k;
                x = b;
                step = 2.0 * width;
            } else {
                step = 0.5 * width;
            }
        };

        let table = Table {
            hazard,
            panels,
            atoms: resolved,
            end,
            end_kind,
        };
        if matches!(end_kind, SupportEnd::Horizon) && table.cum_left(end) < ADMISSIBLE_LEVEL {
            let cdf = -(-table.cum_left(end)).exp_m1();
            return Err(Error::Inadmissible { horizon: end, cdf });
        }
        Ok(table)
    }

    fn panel_index(&self, x: f64) -> usize {
        self.panels.partition_point(|p| p.a <= x).saturating_sub(1)
    }

    /// Λ(x), right-continuous; infinite from `end` on.
    fn cum(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.end {
            return f64::INFINITY;
        }
        let p = self.panels[self.panel_index(x)];
        if x == p.a {
            p.cum_a
        } else {
            p.cum_a + gk15(&|s| self.hazard.eval(s), p.a, x).0
        }
    }

    /// Λ(x−).
    fn cum_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x > self.end {
            return f64::INFINITY;
        }
        if x == self.end {
            return self.panels.last().map_or(0.0, |p| p.cum_b);
        }
        let p = self.panels[self.panel_index(x)];
        if x == p.a {
            p.cum_left_a
        } else {
            p.cum_a + gk15(&|s| self.hazard.eval(s), p.a, x).0
        }
    }

    /// Smallest `x` with `Λ(x) ≥ level`.
    fn inverse(&self, level: f64) -> f64 {
        if level <= 0.0 {
            return 0.0;
        }
        let idx = self.panels.partition_point(|p| p.cum_b < level);
        let Some(p) = self.panels.get(idx).copied() else {
            return self.end;
        };
        if level <= p.cum_a {
            return p.a;
        }
        let hz = |s: f64| self.hazard.eval(s);
        let (mut lo, mut hi) = (p.a, p.b);
        let span = p.cum_b - p.cum_a;
        let mut x = if span > 0.0 {
            p.a + (level - p.cum_a) / span * (p.b - p.a)
        } else {
            0.5 * (p.a + p.b)
        };
        x = x.clamp(lo, hi);
        for _ in 0..200 {
            if x <= lo || x >= hi {
                x = 0.5 * (lo + hi);
            }
            let g = p.cum_a + gk15(&hz, p.a, x).0 - level;
            if g >= 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            if g.abs() <= 1e-15 * level.max(1.0) {
                return x;
            }
            if hi - lo <= 1e-14 * hi.max(1e-300) {
                break;
            }
            let rate = hz(x);
            let newton = x - g / rate;
            x = if rate > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        if (p.cum_a + gk15(&hz, p.a, x).0) >= level {
            x
        } else {
            hi
        }
    }
}

/// The law of a lifetime, possibly conditioned on having survived `offset`.
///
/// Cloning is cheap; residual views share the parent's table.
#[derive(Debug, Clone)]
pub struct DistributionView {
    table: Arc<Table>,
    offset: f64,
    offset_cum: f64,
}

impl DistributionView {
    /// Elapsed time this view is conditioned on (0 for the original law).
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Cumulative hazard `Λ(s)`, including atom jumps at or before `s`.
    pub fn cum_hazard(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        self.table.cum(self.offset + s) - self.offset_cum
    }

    /// Continuous part of the hazard at `s`.
    pub fn hazard(&self, s: f64) -> f64 {
        if s < 0.0 || s >= self.support_end() {
            return 0.0;
        }
        self.table.hazard.eval(self.offset + s)
    }

    pub fn survival(&self, s: f64) -> f64 {
        (-self.cum_hazard(s)).exp()
    }

    pub fn cdf(&self, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        -(-self.cum_hazard(s)).exp_m1()
    }

    /// `F(s−)`.
    pub fn cdf_left(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        -(-(self.table.cum_left(self.offset + s) - self.offset_cum)).exp_m1()
    }

    /// Density of the absolutely continuous part.
    pub fn density(&self, s: f64) -> f64 {
        if s < 0.0 || s >= self.support_end() {
            return 0.0;
        }
        let rate = self.table.hazard.eval(self.offset + s);
        if rate == 0.0 {
            return 0.0;
        }
        let surv = self.survival(s);
        if surv == 0.0 {
            0.0
        } else {
            rate * surv
        }
    }

    /// Atoms after the offset, as `(location, unconditional mass)`.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        self.table
            .atoms
            .iter()
            .filter(|a| a.at > self.offset)
            .map(|a| (a.at - self.offset, (-(a.cum_left - self.offset_cum)).exp() * a.jump))
            .collect()
    }

    /// Probability mass sitting exactly at `s`.
    pub fn atom_mass_at(&self, s: f64) -> f64 {
        let x = self.offset + s;
        self.table
            .atoms
            .iter()
            .find(|a| (a.at - x).abs() <= 1e-12 * a.at.max(1.0) && a.at > self.offset)
            .map_or(0.0, |a| (-(a.cum_left - self.offset_cum)).exp() * a.jump)
    }

    pub fn has_atoms(&self) -> bool {
        self.table.atoms.iter().any(|a| a.at > self.offset)
    }

    /// Time after which the law has no mass left.
    pub fn support_end(&self) -> f64 {
        self.table.end - self.offset
    }

    pub fn support_end_kind(&self) -> SupportEnd {
        self.table.end_kind
    }

    /// Generalized inverse `inf{s : F(s) ≥ u}` for `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::InvalidProbability(u));
        }
        Ok(self.quantile_unchecked(u))
    }

    fn quantile_unchecked(&self, u: f64) -> f64 {
        let level = -(-u).ln_1p();
        self.inverse_cum(level)
    }

    /// Smallest `s` with `Λ(s) ≥ level`.
    pub fn inverse_cum(&self, level: f64) -> f64 {
        if level <= 0.0 {
            return 0.0;
        }
        (self.table.inverse(self.offset_cum + level) - self.offset).max(0.0)
    }

    /// One draw by inverse transform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile_unchecked(open_unit(rng))
    }

    /// Law of the remaining lifetime given survival past `elapsed`.
    pub fn residual(&self, elapsed: f64) -> Result<DistributionView> {
        if !(elapsed >= 0.0) {
            return Err(Error::InvalidSpec(format!("elapsed time must be >= 0, got {elapsed}")));
        }
        let offset = self.offset + elapsed;
        let offset_cum = self.table.cum(offset);
        if !offset_cum.is_finite() || offset_cum >= LAMBDA_MAX {
            return Err(Error::ConditioningOnNull { elapsed });
        }
        Ok(DistributionView {
            table: Arc::clone(&self.table),
            offset,
            offset_cum,
        })
    }

    /// Breakpoints of the tabulation on the view's time axis, ending at the
    /// support end. Integrands built from this law are smooth between them.
    pub fn knots(&self) -> Vec<f64> {
        let mut pts = vec![0.0];
        pts.extend(
            self.table
                .panels
                .iter()
                .filter(|p| p.a > self.offset)
                .map(|p| p.a - self.offset),
        );
        let end = self.support_end();
        if end > 0.0 {
            pts.push(end);
        }
        pts
    }

    /// `∫₀^x (1 − F(s)) ds`.
    pub fn integrated_survival(&self, x: f64) -> f64 {
        let x = x.min(self.support_end());
        if x <= 0.0 {
            return 0.0;
        }
        let mut pts: Vec<f64> = self.knots().into_iter().filter(|p| *p < x).collect();
        pts.push(x);
        integrate_pieces(&|s| self.survival(s), &pts, 1e-14, 1e-11).value
    }

    /// `E ξᵏ = k ∫₀^∞ x^{k−1} (1 − F(x)) dx`.
    pub fn moment(&self, k: u32) -> Result<f64> {
        self.moment_real(k as f64)
    }

    /// Moment of real order `p > 0`.
    pub fn moment_real(&self, p: f64) -> Result<f64> {
        if p == 0.0 {
            return Ok(1.0);
        }
        let order = p.ceil() as u32;
        if !(p > 0.0) {
            return Err(Error::InvalidSpec(format!("moment order must be positive, got {p}")));
        }
        let integrand = |s: f64| if s > 0.0 { p * s.powf(p - 1.0) * self.survival(s) } else { 0.0 };
        let pts = self.knots();
        let total = integrate_pieces(&integrand, &pts, 1e-14, 1e-10).value;
        if !total.is_finite() {
            return Err(Error::InfiniteMoment { order });
        }
        if matches!(self.table.end_kind, SupportEnd::Truncated | SupportEnd::Horizon) {
            // Tail test over the last doubling block of the tabulated horizon.
            let end = self.support_end();
            let mut tail_pts: Vec<f64> = pts.iter().copied().filter(|x| *x > 0.5 * end).collect();
            tail_pts.insert(0, 0.5 * end);
            let tail = integrate_pieces(&integrand, &tail_pts, 1e-14, 1e-8).value;
            if tail > 1e-6 * total {
                return Err(Error::InfiniteMoment { order });
            }
        }
        Ok(total)
    }

    pub fn mean(&self) -> Result<f64> {
        self.moment(1)
    }
}

/// Common part `∫ min_i fᵢ(s) ds` of several laws, atoms included.
pub fn common_part_n(views: &[DistributionView]) -> Result<f64> {
    if views.len() < 2 {
        return Err(Error::InvalidSpec("common part needs at least two laws".into()));
    }
    let upper = views.iter().map(|v| v.support_end()).fold(f64::INFINITY, f64::min);
    let mut pts: Vec<f64> = views
        .iter()
        .flat_map(|v| v.knots())
        .filter(|p| *p < upper)
        .collect();
    pts.push(upper);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let min_density = |s: f64| views.iter().map(|v| v.density(s)).fold(f64::INFINITY, f64::min);
    let continuous = integrate_pieces(&min_density, &pts, 1e-11, 1e-10).value;
    let discrete: f64 = views[0]
        .atoms()
        .iter()
        .map(|&(loc, mass)| {
            views[1..]
                .iter()
                .map(|v| {
                    v.atoms()
                        .iter()
                        .find(|(l, _)| (l - loc).abs() <= 1e-12 * loc.max(1.0))
                        .map_or(0.0, |&(_, m)| m)
                })
                .fold(mass, f64::min)
        })
        .sum();
    Ok((continuous + discrete).clamp(0.0, 1.0))
}

/// `κ(a) = ∫ min(f(s), f_a(s)) ds` where `f_a` is the residual density after `a`.
pub fn common_part(view: &DistributionView, elapsed: f64) -> Result<f64> {
    let residual = view.residual(elapsed)?;
    common_part_n(&[view.clone(), residual])
}

/// Outcome of the search for `inf_{a ∈ [0, Θ]} κ(a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommonPartInf {
    pub value: f64,
    pub argmin: f64,
    /// Spacing of the probe grid.
    pub grid_step: f64,
    pub evaluations: usize,
    /// `true` when the infimum is zero, so no coupling can be certified.
    pub degenerate: bool,
}

const INF_GRID: usize = 256;

/// Grid search (256 probes) refined by golden-section search around the three
/// smallest probes.
pub fn common_part_inf(view: &DistributionView, theta: f64) -> Result<CommonPartInf> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidSpec(format!("Θ must be positive, got {theta}")));
    }
    let kappa = |a: f64| match common_part(view, a) {
        Ok(k) => Ok(k),
        Err(Error::ConditioningOnNull { .. }) => Ok(0.0),
        Err(e) => Err(e),
    };
    let step = theta / (INF_GRID - 1) as f64;
    let grid: Vec<f64> = (0..INF_GRID).map(|i| (i as f64 * step).min(theta)).collect();
    let values = grid.iter().map(|&a| kappa(a)).collect::<Result<Vec<f64>>>()?;
    let mut evaluations = values.len();

    let mut order: Vec<usize> = (0..INF_GRID).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let (mut best, mut argmin) = (values[order[0]], grid[order[0]]);

    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    for &i in order.iter().take(3) {
        let mut lo = grid[i.saturating_sub(1)];
        let mut hi = grid[(i + 1).min(INF_GRID - 1)];
        let mut c = hi - INV_PHI * (hi - lo);
        let mut d = lo + INV_PHI * (hi - lo);
        let (mut fc, mut fd) = (kappa(c)?, kappa(d)?);
        evaluations += 2;
        while hi - lo > 1e-7 * theta.max(1.0) {
            if fc < fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - INV_PHI * (hi - lo);
                fc = kappa(c)?;
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + INV_PHI * (hi - lo);
                fd = kappa(d)?;
            }
            evaluations += 1;
        }
        for (a, v) in [(c, fc), (d, fd)] {
            if v < best {
                best = v;
                argmin = a;
            }
        }
    }
    Ok(CommonPartInf {
        value: best,
        argmin,
        grid_step: step,
        evaluations,
        degenerate: best <= 1e-12,
    })
}
