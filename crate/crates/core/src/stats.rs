//! Summary statistics and the goodness-of-fit instruments used to validate
//! simulations against bounds and oracles.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Asymptotic Kolmogorov–Smirnov critical coefficient at the 1% level.
pub const KS_C_1PCT: f64 = 1.627_615_8;

/// Mean, variance and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub se: f64,
}

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Running {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Running {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn summary(&self) -> Summary {
        let variance = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        Summary {
            n: self.n,
            mean: self.mean,
            variance,
            se: if self.n > 0 { (variance / self.n as f64).sqrt() } else { f64::NAN },
        }
    }
}

pub fn summarize<I: IntoIterator<Item = f64>>(xs: I) -> Summary {
    let mut acc = Running::default();
    xs.into_iter().for_each(|x| acc.push(x));
    acc.summary()
}

/// Outcome of a Kolmogorov–Smirnov test at the 1% level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsTest {
    pub statistic: f64,
    pub critical: f64,
}

impl KsTest {
    pub fn passes(&self) -> bool {
        self.statistic <= self.critical
    }
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// One-sample KS against a continuous CDF.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsTest> {
    ks_one_sample_with_left(samples, &cdf, &cdf)
}

/// One-sample KS against a CDF with jumps; `cdf_left(x)` is `F(x−)`.
pub fn ks_one_sample_with_left(
    samples: &[f64],
    cdf: &dyn Fn(f64) -> f64,
    cdf_left: &dyn Fn(f64) -> f64,
) -> Result<KsTest> {
    if samples.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let xs = sorted(samples);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let mut j = i;
        while j < xs.len() && xs[j] == xs[i] {
            j += 1;
        }
        let x = xs[i];
        d = d.max((j as f64 / n - cdf(x)).abs());
        d = d.max((cdf_left(x) - i as f64 / n).abs());
        i = j;
    }
    Ok(KsTest {
        statistic: d,
        critical: KS_C_1PCT / n.sqrt(),
    })
}

/// Two-sample KS; ties are stepped over jointly.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTest> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData {
            needed: 1,
            got: a.len().min(b.len()),
        });
    }
    let (xs, ys) = (sorted(a), sorted(b));
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        while j < ys.len() && ys[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(KsTest {
        statistic: d,
        critical: KS_C_1PCT * ((n + m) / (n * m)).sqrt(),
    })
}

/// Pearson chi-square result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquare {
    pub fn passes_1pct(&self) -> bool {
        self.p_value >= 0.01
    }
}

fn chi_square_p(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let law = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    1.0 - law.cdf(statistic)
}

/// Merges adjacent categories until every pooled expected count is ≥ 5.
fn pool_by_expected(expected: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    let mut acc = 0.0;
    for (i, e) in expected.iter().enumerate() {
        acc += e;
        if acc >= 5.0 {
            groups.push(start..i + 1);
            start = i + 1;
            acc = 0.0;
        }
    }
    if start < expected.len() {
        match groups.last_mut() {
            Some(last) => last.end = expected.len(),
            None => groups.push(0..expected.len()),
        }
    }
    groups
}

/// Homogeneity test of two count vectors over the same categories.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquare> {
    if a.len() != b.len() {
        return Err(Error::InvalidSpec("count vectors must have equal length".into()));
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let total = na + nb;
    let smaller: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x + y) as f64 * na.min(nb) / total)
        .collect();
    let groups = pool_by_expected(&smaller);
    let mut stat = 0.0;
    for g in &groups {
        let oa: f64 = a[g.clone()].iter().sum::<u64>() as f64;
        let ob: f64 = b[g.clone()].iter().sum::<u64>() as f64;
        let pooled = oa + ob;
        if pooled == 0.0 {
            continue;
        }
        let (ea, eb) = (pooled * na / total, pooled * nb / total);
        stat += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    }
    let dof = groups.len().saturating_sub(1);
    Ok(ChiSquare {
        statistic: stat,
        dof,
        p_value: chi_square_p(stat, dof),
    })
}

/// Goodness of fit of observed counts to category probabilities.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquare> {
    if observed.len() != probs.len() {
        return Err(Error::InvalidSpec("observed and probability vectors differ in length".into()));
    }
    let n = observed.iter().sum::<u64>() as f64;
    let expected: Vec<f64> = probs.iter().map(|p| p * n).collect();
    let groups = pool_by_expected(&expected);
    let mut stat = 0.0;
    for g in &groups {
        let o: f64 = observed[g.clone()].iter().sum::<u64>() as f64;
        let e: f64 = expected[g.clone()].iter().sum();
        if e > 0.0 {
            stat += (o - e).powi(2) / e;
        }
    }
    let dof = groups.len().saturating_sub(1);
    Ok(ChiSquare {
        statistic: stat,
        dof,
        p_value: chi_square_p(stat, dof),
    })
}

fn lag1_correlation(xs: &[f64]) -> f64 {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    if var == 0.0 {
        return 0.0;
    }
    let cov: f64 = xs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    cov / var
}

/// Lag-1 autocorrelation with a two-sided permutation p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PermutationTest {
    pub correlation: f64,
    pub p_value: f64,
}

pub fn lag1_permutation_test<R: Rng + ?Sized>(xs: &[f64], permutations: usize, rng: &mut R) -> Result<PermutationTest> {
    if xs.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: xs.len() });
    }
    let observed = lag1_correlation(xs);
    let mut shuffled = xs.to_vec();
    let mut extreme = 0usize;
    for _ in 0..permutations {
        shuffled.shuffle(rng);
        if lag1_correlation(&shuffled).abs() >= observed.abs() {
            extreme += 1;
        }
    }
    Ok(PermutationTest {
        correlation: observed,
        p_value: (extreme + 1) as f64 / (permutations + 1) as f64,
    })
}

/// Binned TV between a sample and a continuous reference law, using
/// `bins` equal-probability cells `⌊F(x)·bins⌋`.
pub fn binned_tv_to_law(samples: &[f64], cdf: impl Fn(f64) -> f64, bins: usize) -> f64 {
    let mut counts = vec![0u64; bins];
    for &x in samples {
        let cell = ((cdf(x) * bins as f64) as usize).min(bins - 1);
        counts[cell] += 1;
    }
    let n = samples.len() as f64;
    let p = 1.0 / bins as f64;
    0.5 * counts.iter().map(|&c| (c as f64 / n - p).abs()).sum::<f64>()
}

/// Binned TV between two samples over equal-probability cells of the pooled
/// sample. Lower-bounds the true TV up to sampling noise.
pub fn empirical_tv(p: &[f64], q: &[f64], bins: usize) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::InsufficientData {
            needed: 1,
            got: p.len().min(q.len()),
        });
    }
    let mut pooled: Vec<f64> = p.iter().chain(q).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let bins = bins.max(1);
    let mut edges: Vec<f64> = (1..bins).map(|k| pooled[k * pooled.len() / bins]).collect();
    edges.dedup();
    let cell = |x: f64| edges.partition_point(|e| *e <= x);
    let mut cp = vec![0u64; edges.len() + 1];
    let mut cq = vec![0u64; edges.len() + 1];
    p.iter().for_each(|&x| cp[cell(x)] += 1);
    q.iter().for_each(|&x| cq[cell(x)] += 1);
    let (np, nq) = (p.len() as f64, q.len() as f64);
    Ok(0.5
        * cp
            .iter()
            .zip(&cq)
            .map(|(&a, &b)| (a as f64 / np - b as f64 / nq).abs())
            .sum::<f64>())
}
