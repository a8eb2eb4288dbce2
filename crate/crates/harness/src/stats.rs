//! Summary statistics for replica metrics.

use serde::Serialize;
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `n`.
pub fn wilson(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (successes as f64, n as f64);
    let phat = k / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Numeric {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

/// Mean, median, sample standard deviation and range; `None` if empty.
pub fn describe(values: &[f64]) -> Option<Numeric> {
    if values.is_empty() {
        return None;
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 { sorted[n / 2] } else { (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0 };
    let stddev = if n > 1 {
        (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Some(Numeric { count: n, mean, median, stddev, min: sorted[0], max: sorted[n - 1] })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Proportion {
    pub count: u64,
    pub successes: u64,
    pub rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

pub fn proportion(flags: &[bool]) -> Option<Proportion> {
    if flags.is_empty() {
        return None;
    }
    let successes = flags.iter().filter(|&&b| b).count() as u64;
    let count = flags.len() as u64;
    let (wilson_low, wilson_high) = wilson(successes, count, Z95);
    Some(Proportion { count, successes, rate: successes as f64 / count as f64, wilson_low, wilson_high })
}

/// Pearson goodness-of-fit of integer samples against `Binomial(trials, p)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSquareFit {
    pub trials: u64,
    pub p: f64,
    pub samples: usize,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// `(first value, last value, observed, expected)` per pooled bin.
    pub bins: Vec<(u64, u64, u64, f64)>,
}

/// Adjacent outcomes are pooled left to right until each bin expects at
/// least five samples; the last bin absorbs the upper tail.
pub fn chi_square_binomial(samples: &[u64], trials: u64, p: f64) -> Option<ChiSquareFit> {
    let dist = Binomial::new(p, trials).ok()?;
    let total = samples.len() as f64;
    let mut observed = vec![0u64; trials as usize + 1];
    for &x in samples {
        observed[x.min(trials) as usize] += 1;
    }
    let mut bins: Vec<(u64, u64, u64, f64)> = Vec::new();
    let (mut start, mut obs, mut exp, mut cum) = (0u64, 0u64, 0.0, 0.0);
    for k in 0..=trials {
        let e = total * dist.pmf(k);
        obs += observed[k as usize];
        exp += e;
        cum += e;
        if exp >= 5.0 && total - cum >= 5.0 {
            bins.push((start, k, obs, exp));
            (start, obs, exp) = (k + 1, 0, 0.0);
        }
    }
    if obs > 0 || exp > 0.0 {
        match bins.last_mut() {
            Some(last) if exp < 5.0 => {
                last.1 = trials;
                last.2 += obs;
                last.3 += exp;
            }
            _ => bins.push((start, trials, obs, exp)),
        }
    }
    if bins.len() < 2 {
        return None;
    }
    let statistic: f64 = bins.iter().map(|&(_, _, o, e)| (o as f64 - e).powi(2) / e).sum();
    let df = bins.len() - 1;
    let p_value = 1.0 - ChiSquared::new(df as f64).ok()?.cdf(statistic);
    Some(ChiSquareFit { trials, p, samples: samples.len(), statistic, df, p_value, bins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wilson_all_successes() {
        let (lo, hi) = wilson(100, 100, Z95);
        assert!((lo - 0.963).abs() < 5e-4, "{lo}");
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn wilson_matches_closed_form() {
        // 5 of 10: centre 0.5, half-width z·sqrt(0.025 + z²/400)/(1 + z²/10)
        let (lo, hi) = wilson(5, 10, Z95);
        let z = Z95;
        let half = z * (0.025 + z * z / 400.0).sqrt() / (1.0 + z * z / 10.0);
        assert!((lo - (0.5 - half)).abs() < 1e-12 && (hi - (0.5 + half)).abs() < 1e-12);
    }

    #[test]
    fn constant_metric_has_zero_spread() {
        let d = describe(&[3.0; 7]).unwrap();
        assert_eq!((d.mean, d.median, d.stddev), (3.0, 3.0, 0.0));
        assert!(describe(&[]).is_none());
        assert!(proportion(&[]).is_none());
    }

    #[test]
    fn binomial_samples_fit_and_shifted_samples_do_not() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draw = |rng: &mut ChaCha8Rng, p: f64| (0..60).filter(|_| rng.random_bool(p)).count() as u64;
        let good: Vec<u64> = (0..3000).map(|_| draw(&mut rng, 0.3)).collect();
        let fit = chi_square_binomial(&good, 60, 0.3).unwrap();
        assert!(fit.p_value > 0.001, "{fit:?}");
        assert_eq!(fit.bins.iter().map(|b| b.2).sum::<u64>(), 3000);
        assert!(fit.bins.iter().all(|b| b.3 >= 5.0));
        let bad: Vec<u64> = (0..3000).map(|_| draw(&mut rng, 0.33)).collect();
        assert!(chi_square_binomial(&bad, 60, 0.3).unwrap().p_value < 1e-6);
    }
}
