//! Interval estimates and goodness-of-fit tests used by the experiment
//! layer and the test suites.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Point estimate with a two-sided confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Estimate {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Two-sided standard normal quantile for confidence `level`.
pub fn z_for_level(level: f64) -> f64 {
    let normal = Normal::standard();
    normal.inverse_cdf(0.5 + 0.5 * level)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, level: f64) -> (f64, f64) {
    assert!(trials >= 1 && successes <= trials, "need 0 <= successes <= trials, trials >= 1");
    assert!(level > 0.0 && level < 1.0, "level must lie in (0, 1)");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = z_for_level(level);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo.min(p), hi.max(p))
}

pub fn proportion(successes: u64, trials: u64, level: f64) -> Estimate {
    let (lo, hi) = wilson_interval(successes, trials, level);
    Estimate { value: successes as f64 / trials as f64, lo, hi }
}

/// Normal-approximation interval for a mean from its sum and sum of squares.
pub fn mean_interval(count: u64, sum: f64, sum_sq: f64, level: f64) -> Estimate {
    let n = count as f64;
    let mean = sum / n;
    if count < 2 {
        return Estimate { value: mean, lo: mean, hi: mean };
    }
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    let half = z_for_level(level) * (var / n).sqrt();
    Estimate { value: mean, lo: mean - half, hi: mean + half }
}

/// Result of a two-sample χ² homogeneity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Two-sample χ² test on integer-valued samples. Adjacent values are merged
/// into buckets until each bucket holds at least `min_bucket` pooled
/// observations.
pub fn chi_square_two_sample(a: &[u64], b: &[u64], min_bucket: u64) -> ChiSquareTest {
    let max = a.iter().chain(b).copied().max().unwrap_or(0) as usize;
    let mut ha = vec![0u64; max + 1];
    let mut hb = vec![0u64; max + 1];
    a.iter().for_each(|&x| ha[x as usize] += 1);
    b.iter().for_each(|&x| hb[x as usize] += 1);

    let mut buckets: Vec<(u64, u64)> = Vec::new();
    let mut cur = (0u64, 0u64);
    for (x, y) in ha.into_iter().zip(hb) {
        cur.0 += x;
        cur.1 += y;
        if cur.0 + cur.1 >= min_bucket {
            buckets.push(cur);
            cur = (0, 0);
        }
    }
    if cur.0 + cur.1 > 0 {
        match buckets.last_mut() {
            Some(last) => {
                last.0 += cur.0;
                last.1 += cur.1;
            }
            None => buckets.push(cur),
        }
    }
    if buckets.len() < 2 {
        return ChiSquareTest { statistic: 0.0, dof: 0, p_value: 1.0 };
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let statistic: f64 = buckets
        .iter()
        .map(|&(x, y)| {
            let d = ka * x as f64 - kb * y as f64;
            d * d / (x + y) as f64
        })
        .sum();
    let dof = buckets.len() - 1;
    let dist = ChiSquared::new(dof as f64).expect("dof >= 1");
    ChiSquareTest { statistic, dof, p_value: 1.0 - dist.cdf(statistic) }
}

/// Goodness-of-fit χ² of observed counts against expected probabilities.
pub fn chi_square_goodness(observed: &[u64], probs: &[f64]) -> ChiSquareTest {
    let total: u64 = observed.iter().sum();
    let statistic: f64 = observed
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dof = probs.iter().filter(|&&p| p > 0.0).count().saturating_sub(1).max(1);
    let dist = ChiSquared::new(dof as f64).expect("dof >= 1");
    ChiSquareTest { statistic, dof, p_value: 1.0 - dist.cdf(statistic) }
}

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n - F|`, evaluated on
/// both sides of every jump so it is valid for discrete laws too.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut k = 0;
    while k < xs.len() {
        let x = xs[k];
        let below = k as f64 / n;
        while k < xs.len() && xs[k] == x {
            k += 1;
        }
        let at = k as f64 / n;
        d = d.max((at - cdf(x)).abs()).max((below - cdf(x.next_down())).abs());
    }
    d
}

/// Asymptotic Kolmogorov critical value `c(α) / √n`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt() / (n as f64).sqrt()
}
