//! Counting statistics: exact Poisson and binomial tails with exact binomial
//! confidence intervals, plus histograms and goodness-of-fit tests.
//!
//! Point probabilities use the saddle-point form `exp(-stirlerr - bd0)` so
//! they keep full relative precision far into the tails and for counts up to
//! at least 10^6. Tails are summed outward from the boundary term with
//! compensated summation; the complementary side is only used when the
//! requested tail is the larger one.

use std::f64::consts::PI;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::detector::{process_timeline, DetectorParams};
use crate::error::{Error, Result};
use crate::optics::{gen_signal_photons, OpticalTimeline};
use crate::rng::{RandomStream, StreamTag};
use crate::time::Time;

/// Which tail of a discrete distribution to sum. Both are inclusive of `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    /// `P(X <= k)`
    Lower,
    /// `P(X >= k)`
    Upper,
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// stirlerr(n) = ln n! - (n + 1/2) ln n + n - ln sqrt(2 pi), n = 0..=15.
#[allow(clippy::excessive_precision)]
const STIRLERR: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258_219_670_26,
    0.041_340_695_955_409_294_093_822_08,
    0.027_677_925_684_998_339_148_789_29,
    0.020_790_672_103_765_093_111_522_77,
    0.016_644_691_189_821_192_163_194_87,
    0.013_876_128_823_070_747_998_745_73,
    0.011_896_709_945_891_770_095_055_72,
    0.010_411_265_261_972_096_497_478_57,
    0.009_255_462_182_712_732_917_728_637,
    0.008_330_563_433_362_871_256_469_319,
    0.007_573_675_487_951_840_794_972_024,
    0.006_942_840_107_209_529_865_664_153,
    0.006_408_994_188_004_207_068_439_631,
    0.005_951_370_112_758_847_735_624_416,
    0.005_554_733_551_962_801_371_038_690,
];

fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        return STIRLERR[n as usize];
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x ln(x/np) + np - x`, evaluated without cancellation.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / f64::from(2 * j + 1);
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

pub fn poisson_pmf(mean: f64, k: u64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if k == 0 {
        return (-mean).exp();
    }
    let x = k as f64;
    (-stirlerr(x) - bd0(x, mean)).exp() / (2.0 * PI * x).sqrt()
}

/// Largest n whose binomial coefficients are all exact in an f64.
const EXACT_CHOOSE_MAX: u64 = 50;

pub fn binomial_pmf(n: u64, p: f64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let q = 1.0 - p;
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    if n <= EXACT_CHOOSE_MAX {
        // The coefficient is an exact integer here, so dyadic p gives exact terms.
        let m = k.min(n - k);
        let choose = (0..m).fold(1u64, |c, i| c * (n - i) / (i + 1)) as f64;
        return choose * p.powi(k as i32) * q.powi((n - k) as i32);
    }
    let nf = n as f64;
    if k == 0 {
        if n == 0 {
            return 1.0;
        }
        let lc = if p < 0.1 { -bd0(nf, nf * q) - nf * p } else { nf * q.ln() };
        return lc.exp();
    }
    if k == n {
        let lc = if q < 0.1 { -bd0(nf, nf * p) - nf * q } else { nf * p.ln() };
        return lc.exp();
    }
    let x = k as f64;
    let lc = stirlerr(nf) - stirlerr(x) - stirlerr(nf - x) - bd0(x, nf * p) - bd0(nf - x, nf * q);
    let lf = 2.0 * LN_SQRT_2PI + x.ln() + (-x / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Sums `first, first*r(i0), ...` while terms stay significant.
fn sum_terms(first: f64, mut next: impl FnMut(f64) -> Option<f64>) -> f64 {
    let mut acc = CompensatedSum::default();
    let mut term = first;
    acc.add(term);
    while let Some(t) = next(term) {
        term = t;
        acc.add(term);
        if term <= acc.value() * 1e-18 {
            break;
        }
    }
    acc.value()
}

fn clamp_probability(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// Exact Poisson tail probability.
pub fn poisson_tail(mean: f64, k: u64, side: Tail) -> f64 {
    assert!(mean >= 0.0 && mean.is_finite(), "mean must be finite and >= 0");
    match side {
        Tail::Lower => {
            if k as f64 <= mean {
                let mut i = k;
                clamp_probability(sum_terms(poisson_pmf(mean, k), |t| {
                    if i == 0 {
                        return None;
                    }
                    let next = t * i as f64 / mean;
                    i -= 1;
                    Some(next)
                }))
            } else {
                clamp_probability(1.0 - poisson_tail(mean, k + 1, Tail::Upper))
            }
        }
        Tail::Upper => {
            if k == 0 {
                return 1.0;
            }
            if k as f64 >= mean {
                if mean == 0.0 {
                    return 0.0;
                }
                let mut i = k;
                clamp_probability(sum_terms(poisson_pmf(mean, k), |t| {
                    i += 1;
                    Some(t * mean / i as f64)
                }))
            } else {
                clamp_probability(1.0 - poisson_tail(mean, k - 1, Tail::Lower))
            }
        }
    }
}

/// Exact binomial tail probability for `n` trials with success probability `p`.
pub fn binomial_tail(n: u64, p: f64, k: u64, side: Tail) -> f64 {
    assert!((0.0..=1.0).contains(&p), "p must lie in [0, 1]");
    let mean = n as f64 * p;
    let q = 1.0 - p;
    match side {
        Tail::Lower => {
            if k >= n {
                return 1.0;
            }
            if p == 0.0 {
                return 1.0;
            }
            if k as f64 <= mean {
                let mut i = k;
                clamp_probability(sum_terms(binomial_pmf(n, p, k), |t| {
                    if i == 0 {
                        return None;
                    }
                    let next = t * (i as f64 / (n - i + 1) as f64) * (q / p);
                    i -= 1;
                    Some(next)
                }))
            } else {
                clamp_probability(1.0 - binomial_tail(n, p, k + 1, Tail::Upper))
            }
        }
        Tail::Upper => {
            if k == 0 {
                return 1.0;
            }
            if k > n || p == 0.0 {
                return 0.0;
            }
            if q == 0.0 {
                return 1.0;
            }
            if k as f64 >= mean {
                let mut i = k;
                clamp_probability(sum_terms(binomial_pmf(n, p, k), |t| {
                    if i >= n {
                        return None;
                    }
                    let next = t * ((n - i) as f64 / (i + 1) as f64) * (p / q);
                    i += 1;
                    Some(next)
                }))
            } else {
                clamp_probability(1.0 - binomial_tail(n, p, k - 1, Tail::Lower))
            }
        }
    }
}

/// Two-sided exact binomial test p-value (doubling the smaller tail).
pub fn binomial_two_sided(n: u64, p: f64, k: u64) -> f64 {
    let lower = binomial_tail(n, p, k, Tail::Lower);
    let upper = binomial_tail(n, p, k, Tail::Upper);
    (2.0 * lower.min(upper)).min(1.0)
}

/// Exact (Clopper-Pearson) binomial confidence interval.
pub fn clopper_pearson_interval(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(successes <= trials, "successes must not exceed trials");
    assert!(confidence > 0.0 && confidence < 1.0, "confidence must lie in (0, 1)");
    if trials == 0 {
        return (0.0, 1.0);
    }
    let half_alpha = 0.5 * (1.0 - confidence);
    let low = if successes == 0 {
        0.0
    } else {
        // P(X >= x; p) increases with p.
        bisect(|p| binomial_tail(trials, p, successes, Tail::Upper) < half_alpha)
    };
    let high = if successes == trials {
        1.0
    } else {
        // P(X <= x; p) decreases with p.
        bisect(|p| binomial_tail(trials, p, successes, Tail::Lower) > half_alpha)
    };
    (low, high)
}

/// Boundary in [0, 1] where `below` switches from true to false.
fn bisect(below: impl Fn(f64) -> bool) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Histogram over contiguous bins `[edges[i], edges[i + 1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn empty() -> Self {
        Histogram { edges: Vec::new(), counts: Vec::new(), total: 0 }
    }

    /// Unit-width integer bins spanning the observed range.
    pub fn from_counts(values: impl IntoIterator<Item = u64>) -> Self {
        let values: Vec<u64> = values.into_iter().collect();
        let (Some(&min), Some(&max)) = (values.iter().min(), values.iter().max()) else {
            return Histogram::empty();
        };
        let mut counts = vec![0u64; (max - min + 1) as usize];
        for v in &values {
            counts[(v - min) as usize] += 1;
        }
        let edges = (min..=max + 1).map(|e| e as f64).collect();
        Histogram { edges, counts, total: values.len() as u64 }
    }

    /// Fixed-width bins over `[low, low + bins * width)`; values outside are dropped.
    pub fn from_values(values: impl IntoIterator<Item = f64>, low: f64, width: f64, bins: usize) -> Self {
        assert!(width > 0.0 && bins > 0, "bins must have positive width");
        let mut counts = vec![0u64; bins];
        for v in values {
            let idx = ((v - low) / width).floor();
            if idx >= 0.0 && (idx as usize) < bins {
                counts[idx as usize] += 1;
            }
        }
        let edges = (0..=bins).map(|i| low + i as f64 * width).collect();
        let total = counts.iter().sum();
        Histogram { edges, counts, total }
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// `(bin_low, bin_high, count)` triples.
    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, u64)> + '_ {
        self.counts.iter().enumerate().map(move |(i, &c)| (self.edges[i], self.edges[i + 1], c))
    }

    pub fn validate(&self) -> Result<()> {
        if self.counts.is_empty() {
            return if self.edges.is_empty() && self.total == 0 {
                Ok(())
            } else {
                Err(Error::invalid("histogram", "empty histogram with edges or total"))
            };
        }
        if self.edges.len() != self.counts.len() + 1 {
            return Err(Error::invalid("histogram.edges", "need one more edge than bins"));
        }
        if self.edges.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::invalid("histogram.edges", "must be strictly increasing"));
        }
        if self.counts.iter().sum::<u64>() != self.total {
            return Err(Error::invalid("histogram.total", "counts do not sum to total"));
        }
        Ok(())
    }

    /// Mean of the bin lower edges, weighted by count. For unit integer bins
    /// this is the sample mean.
    pub fn mean(&self) -> f64 {
        if self.total == 0 {
            return f64::NAN;
        }
        self.bins().map(|(lo, _, c)| lo * c as f64).sum::<f64>() / self.total as f64
    }

    /// Unbiased sample variance over bin lower edges.
    pub fn variance(&self) -> f64 {
        if self.total < 2 {
            return f64::NAN;
        }
        let mean = self.mean();
        let ss: f64 = self.bins().map(|(lo, _, c)| (lo - mean).powi(2) * c as f64).sum();
        ss / (self.total - 1) as f64
    }

    /// Smallest bin lower edge whose cumulative fraction reaches `q`.
    pub fn quantile(&self, q: f64) -> f64 {
        let target = q * self.total as f64;
        let mut cumulative = 0u64;
        for (lo, _, c) in self.bins() {
            cumulative += c;
            if cumulative as f64 >= target && cumulative > 0 {
                return lo;
            }
        }
        self.edges.last().copied().unwrap_or(f64::NAN)
    }

    pub fn min_value(&self) -> Option<f64> {
        self.bins().find(|b| b.2 > 0).map(|b| b.0)
    }

    pub fn max_value(&self) -> Option<f64> {
        self.bins().filter(|b| b.2 > 0).last().map(|b| b.0)
    }

    /// Fraction of entries in bins starting at or below `x`; `P(X <= x)`
    /// for unit integer bins.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.total == 0 {
            return f64::NAN;
        }
        let below: u64 = self.bins().filter(|b| b.0 <= x).map(|b| b.2).sum();
        below as f64 / self.total as f64
    }

    /// `(bin_low, bin_high, count)` CSV with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_low,bin_high,count\n");
        for (lo, hi, c) in self.bins() {
            out.push_str(&format!("{lo:e},{hi:e},{c}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some("bin_low,bin_high,count") => {}
            _ => return Err(Error::invalid("histogram csv", "missing header")),
        }
        let mut edges = Vec::new();
        let mut counts = Vec::new();
        for (i, line) in lines.enumerate() {
            let bad = || Error::invalid("histogram csv", format!("malformed row {}", i + 1));
            let mut cols = line.split(',');
            let lo: f64 = cols.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            let hi: f64 = cols.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            let c: u64 = cols.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            if let Some(&last) = edges.last() {
                if last != lo {
                    return Err(Error::invalid("histogram csv", "bins are not contiguous"));
                }
                edges.push(hi);
            } else {
                edges.push(lo);
                edges.push(hi);
            }
            counts.push(c);
        }
        let hist = Histogram { total: counts.iter().sum(), edges, counts };
        hist.validate()?;
        Ok(hist)
    }
}

/// Count distribution used as a decision calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CountDistribution {
    Poisson { mean: f64 },
    Empirical { histogram: Histogram },
}

impl CountDistribution {
    pub fn is_calibrated(&self) -> bool {
        match self {
            CountDistribution::Poisson { mean } => mean.is_finite() && *mean >= 0.0,
            CountDistribution::Empirical { histogram } => histogram.total > 0,
        }
    }

    /// `P(X <= k)`
    pub fn cdf(&self, k: u64) -> f64 {
        match self {
            CountDistribution::Poisson { mean } => poisson_tail(*mean, k, Tail::Lower),
            CountDistribution::Empirical { histogram } => histogram.cdf(k as f64),
        }
    }

    /// `P(X >= k)`
    pub fn sf(&self, k: u64) -> f64 {
        match self {
            CountDistribution::Poisson { mean } => poisson_tail(*mean, k, Tail::Upper),
            CountDistribution::Empirical { histogram } => {
                if k == 0 {
                    1.0
                } else {
                    1.0 - histogram.cdf((k - 1) as f64)
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            CountDistribution::Poisson { mean } => *mean,
            CountDistribution::Empirical { histogram } => histogram.mean(),
        }
    }

    /// Largest count with non-negligible probability; bounds threshold searches.
    pub fn support_bound(&self) -> u64 {
        match self {
            CountDistribution::Poisson { mean } => (mean + 40.0 * mean.sqrt() + 50.0).ceil() as u64,
            CountDistribution::Empirical { histogram } => histogram.max_value().unwrap_or(0.0) as u64 + 1,
        }
    }
}

/// Lead-in simulated before the counting window so the detector is in steady state.
pub const ORACLE_WARMUP: Time = Time::from_us(50);

/// Brute-force distribution of click counts in a window of length `window`
/// for a detector illuminated by Poisson photons at `photon_rate`.
///
/// Each trial simulates `ORACLE_WARMUP + window` and counts clicks after the
/// warm-up. Trial `i` draws from its own substream.
pub fn count_distribution_oracle(
    params: &DetectorParams,
    photon_rate: f64,
    window: Time,
    n_trials: u64,
    rng: &mut RandomStream,
) -> Result<Histogram> {
    if n_trials == 0 {
        return Err(Error::invalid("n_trials", "must be >= 1"));
    }
    let base = rng.next_u64();
    let duration = ORACLE_WARMUP + window;
    let mut counts = Vec::with_capacity(n_trials as usize);
    for trial in 0..n_trials {
        let mut stream = RandomStream::for_trial(base, trial, StreamTag::Calibration);
        let mut timeline = OpticalTimeline::empty(duration);
        timeline.photons = gen_signal_photons(photon_rate, duration, &mut stream)?;
        let clicks = process_timeline(params, &timeline, &mut stream)?;
        counts.push(clicks.iter().filter(|c| c.time >= ORACLE_WARMUP).count() as u64);
    }
    Ok(Histogram::from_counts(counts))
}

/// Kolmogorov-Smirnov test of samples against an exponential law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_exponential(samples: &[f64], rate: f64) -> KsResult {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = 1.0 - (-rate * x).exp();
        d = d.max((i as f64 + 1.0) / n - cdf).max(cdf - i as f64 / n);
    }
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    KsResult { statistic: d, p_value: kolmogorov_q(lambda) }
}

fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..200 {
        let j = f64::from(j);
        let term = sign * (-2.0 * j * j * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson chi-square goodness of fit; adjacent bins are pooled until each
/// expected count reaches 5. Returns `(statistic, degrees of freedom, p-value)`.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> (f64, u64, f64) {
    assert_eq!(observed.len(), expected.len());
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        acc.0 += o as f64;
        acc.1 += e;
        if acc.1 >= 5.0 {
            pooled.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 || acc.0 > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => pooled.push(acc),
        }
    }
    let stat: f64 = pooled.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = pooled.len().saturating_sub(1) as u64;
    let p = if dof == 0 { 1.0 } else { 1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(stat) };
    (stat, dof, p)
}

/// Chi-square test of an integer-count histogram against Poisson(`mean`).
pub fn chi_square_poisson(hist: &Histogram, mean: f64) -> (f64, u64, f64) {
    let Some(max) = hist.max_value() else {
        return (0.0, 0, 1.0);
    };
    let max = max as u64;
    let n = hist.total as f64;
    let mut observed = vec![0u64; max as usize + 2];
    for (lo, _, c) in hist.bins() {
        observed[lo as usize] += c;
    }
    let mut expected: Vec<f64> = (0..=max).map(|k| n * poisson_pmf(mean, k)).collect();
    expected.push(n * poisson_tail(mean, max + 1, Tail::Upper));
    chi_square_gof(&observed, &expected)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_tails() {
        assert_eq!(poisson_tail(0.0, 1, Tail::Upper), 0.0);
        assert_eq!(poisson_tail(0.0, 0, Tail::Upper), 1.0);
        assert_eq!(poisson_tail(0.0, 3, Tail::Lower), 1.0);
        assert_eq!(binomial_tail(10, 0.0, 1, Tail::Upper), 0.0);
        assert_eq!(binomial_tail(10, 1.0, 10, Tail::Upper), 1.0);
        assert_eq!(binomial_tail(10, 1.0, 9, Tail::Lower), 0.0);
    }

    #[test]
    fn fair_coin_upper_tail_is_exact() {
        assert_eq!(binomial_tail(10, 0.5, 5, Tail::Upper), 0.623046875);
    }

    #[test]
    fn tails_are_complementary() {
        for k in [0u64, 3, 10, 25, 80] {
            let lower = poisson_tail(12.5, k, Tail::Lower);
            let upper = poisson_tail(12.5, k + 1, Tail::Upper);
            assert!((lower + upper - 1.0).abs() < 1e-14);
            let lower = binomial_tail(90, 0.3, k, Tail::Lower);
            let upper = binomial_tail(90, 0.3, k + 1, Tail::Upper);
            assert!((lower + upper - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn large_counts_do_not_overflow() {
        let p = poisson_tail(1e6, 1_000_000, Tail::Lower);
        assert!(p > 0.5 && p < 0.501, "{p}");
        let far = poisson_tail(1e6, 990_000, Tail::Lower);
        assert!(far > 0.0 && far < 1e-20, "{far}");
    }

    #[test]
    fn clopper_pearson_edges() {
        assert_eq!(clopper_pearson_interval(0, 50, 0.95).0, 0.0);
        assert_eq!(clopper_pearson_interval(50, 50, 0.95).1, 1.0);
        // Known value: 0 of 10 at 95% has upper bound 1 - 0.025^(1/10).
        let (_, hi) = clopper_pearson_interval(0, 10, 0.95);
        assert!((hi - (1.0 - 0.025f64.powf(0.1))).abs() < 1e-12);
    }

    #[test]
    fn histogram_from_counts() {
        let h = Histogram::from_counts([3, 5, 3, 4]);
        assert_eq!(h.edges, vec![3.0, 4.0, 5.0, 6.0]);
        assert_eq!(h.counts, vec![2, 1, 1]);
        assert_eq!(h.total, 4);
        h.validate().unwrap();
        assert_eq!(h.mean(), 3.75);
        assert_eq!(h.quantile(0.5), 3.0);
        assert_eq!(h.cdf(4.0), 0.75);
        let single = Histogram::from_counts([7]);
        assert_eq!((single.counts.len(), single.total), (1, 1));
        assert!(Histogram::from_counts(Vec::<u64>::new()).is_empty());
    }

    #[test]
    fn histogram_csv_round_trip() {
        let h = Histogram::from_values([1e-9, 15e-9, 16e-9, 55e-9], 0.0, 10e-9, 6);
        let back = Histogram::from_csv(&h.to_csv()).unwrap();
        assert_eq!(back.counts, h.counts);
        assert_eq!(back.total, 4);
        assert!(Histogram::from_csv("nope\n").is_err());
    }

    #[test]
    fn empirical_distribution_tails() {
        let dist = CountDistribution::Empirical { histogram: Histogram::from_counts([1, 2, 2, 3]) };
        assert_eq!(dist.cdf(2), 0.75);
        assert_eq!(dist.sf(2), 0.75);
        assert_eq!(dist.sf(0), 1.0);
        assert_eq!(dist.sf(4), 0.0);
    }

    #[test]
    fn ks_rejects_wrong_rate() {
        let samples: Vec<f64> = (1..2000).map(|i| -((i as f64) / 2000.0).ln()).collect();
        assert!(ks_exponential(&samples, 1.0).p_value > 0.5);
        assert!(ks_exponential(&samples, 2.0).p_value < 1e-6);
    }

    #[test]
    fn oracle_rejects_zero_trials() {
        let err = count_distribution_oracle(
            &DetectorParams::default(),
            1e5,
            Time::from_us(200),
            0,
            &mut RandomStream::from_seed(1),
        );
        assert!(err.is_err());
    }
}
