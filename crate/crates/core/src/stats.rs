//! Statistical helpers: moments, Kolmogorov-Smirnov machinery, bootstrap and
//! permutation p-values, chi-square goodness of fit, least squares.

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::rng::{exp_sample, rng_from, substream};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("need at least {need} distinct x values, got {got}")]
    TooFewPoints { need: usize, got: usize },
}

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample mean and its standard error (unbiased variance, so at least two
/// samples are required).
pub fn mean_se(xs: &[f64]) -> Result<(f64, f64), StatsError> {
    if xs.len() < 2 {
        return Err(StatsError::TooFewSamples { need: 2, got: xs.len() });
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    Ok((m, (var / xs.len() as f64).sqrt()))
}

/// Standard error of a binomial proportion estimated from `n` trials.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Partial sums of 1/k, i.e. the expected maximum of n unit exponentials.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// One-sample KS statistic against the unit-exponential CDF 1 - e^{-x}.
pub fn ks_exp1(xs: &[f64]) -> f64 {
    let v = sorted(xs);
    let m = v.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in v.iter().enumerate() {
        let f = 1.0 - (-x).exp();
        d = d.max(f - i as f64 / m).max((i + 1) as f64 / m - f);
    }
    d
}

/// KS statistic against the unit exponential after dividing the sample by its
/// own mean. Invariant under rescaling the sample by any positive constant.
pub fn ks_exp1_mean_normalized(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let scaled: Vec<f64> = xs.iter().map(|x| x / m).collect();
    ks_exp1(&scaled)
}

/// Two-sample KS statistic. Ties are handled by advancing both empirical
/// CDFs past each distinct value before measuring.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> f64 {
    let a = sorted(xs);
    let b = sorted(ys);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Survival function of the Kolmogorov distribution,
/// Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // Jacobi-theta form converges fast for small arguments.
        let mut s = 0.0;
        for k in 0..20 {
            let t = (2 * k + 1) as f64;
            s += (-(t * t) * std::f64::consts::PI.powi(2) / (8.0 * x * x)).exp();
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s
    } else {
        let mut s = 0.0;
        for k in 1..=20 {
            let term = (-2.0 * (k * k) as f64 * x * x).exp();
            s += if k % 2 == 1 { term } else { -term };
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// Asymptotic p-value for a one-sample KS statistic on `m` points, with the
/// Stephens small-sample adjustment.
pub fn ks_pvalue(d: f64, m: usize) -> f64 {
    let sm = (m as f64).sqrt();
    kolmogorov_sf((sm + 0.12 + 0.11 / sm) * d)
}

/// Bootstrap p-value for a KS statistic against the unit exponential.
///
/// Resamples `b` synthetic samples of size `m` from Exp(1); when `normalize`
/// is set each synthetic sample is divided by its own mean before the KS
/// statistic is taken, matching the estimated-mean test actually performed.
pub fn bootstrap_exp1_pvalue(observed: f64, m: usize, normalize: bool, b: usize, seed: u64) -> f64 {
    const TAG: u64 = 0x6b73_6578_7031;
    let mut exceed = 0usize;
    for i in 0..b {
        let mut rng = rng_from(substream(seed, TAG, i as u64));
        let xs: Vec<f64> = (0..m).map(|_| exp_sample(&mut rng, 1.0)).collect();
        let d = if normalize { ks_exp1_mean_normalized(&xs) } else { ks_exp1(&xs) };
        if d >= observed {
            exceed += 1;
        }
    }
    exceed as f64 / b as f64
}

/// Permutation p-value for a two-sample KS statistic.
pub fn permutation_ks_pvalue(xs: &[f64], ys: &[f64], b: usize, seed: u64) -> f64 {
    const TAG: u64 = 0x6b73_3273;
    let observed = ks_two_sample(xs, ys);
    let mut pool: Vec<f64> = xs.iter().chain(ys.iter()).copied().collect();
    let mut exceed = 0usize;
    let mut rng = rng_from(substream(seed, TAG, 0));
    for _ in 0..b {
        // Fisher-Yates on the pooled sample, then split at |xs|.
        for i in (1..pool.len()).rev() {
            let j = rng.random_range(0..=i);
            pool.swap(i, j);
        }
        if ks_two_sample(&pool[..xs.len()], &pool[xs.len()..]) >= observed {
            exceed += 1;
        }
    }
    exceed as f64 / b as f64
}

/// Pearson chi-square statistic and p-value for observed counts against
/// expected counts (degrees of freedom = categories - 1).
pub fn chi_square_pvalue(observed: &[u64], expected: &[f64]) -> (f64, f64) {
    assert_eq!(observed.len(), expected.len());
    assert!(observed.len() >= 2);
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let df = (observed.len() - 1) as f64;
    let p = ChiSquared::new(df).expect("positive df").sf(stat);
    (stat, p)
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of y on x. Requires at least 3 points with at
/// least 2 distinct x values.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit, StatsError> {
    assert_eq!(x.len(), y.len());
    if x.len() < 3 {
        return Err(StatsError::TooFewSamples { need: 3, got: x.len() });
    }
    let mut distinct = x.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(StatsError::TooFewPoints { need: 2, got: distinct.len() });
    }
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope_se = if x.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(LinearFit { slope, intercept, slope_se, r_squared })
}
