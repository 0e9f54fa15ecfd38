//! Extinction-time ensembles, the exponential-limit test, and the growth fit
//! of log mean extinction time against the vertex count.

use rayon::prelude::*;

use super::spread::gamma_exponent;
use super::ExperimentError;
use crate::engine::{extinction_time, Configuration, ExtinctionSample, Process};
use crate::graph::Adjacency;
use crate::rng::substream;
use crate::stats::{bootstrap_exp1_pvalue, ks_exp1_mean_normalized, linear_fit, mean_se};

const TAG_TAU: u64 = 0x7461_755f;
const TAG_BOOT: u64 = 0x626f_6f74;
const TAG_PLATEAU: u64 = 0x706c_6174;

const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 2000;

#[derive(Debug, Clone, serde::Serialize)]
pub struct EnsembleReport {
    pub lambda: f64,
    pub t_cap: f64,
    pub replicas: usize,
    pub samples: Vec<ExtinctionSample>,
    pub uncensored: usize,
    pub censored_fraction: f64,
    /// Mean and standard error over the uncensored samples only.
    pub mean: f64,
    pub se: f64,
    /// KS distance of (tau / mean) against the unit exponential.
    pub ks: f64,
    /// Parametric bootstrap p-value with the same mean normalization.
    pub bootstrap_p: f64,
}

impl EnsembleReport {
    pub fn uncensored_taus(&self) -> Vec<f64> {
        self.samples.iter().filter(|s| !s.censored).map(|s| s.tau).collect()
    }
}

/// Samples extinction times from full occupancy. Censored runs are flagged
/// and excluded from the mean and the distribution test.
pub fn extinction_ensemble(
    g: &Adjacency,
    lambda: f64,
    replicas: usize,
    t_cap: f64,
    seed: u64,
) -> Result<EnsembleReport, ExperimentError> {
    extinction_ensemble_with(g, lambda, replicas, t_cap, DEFAULT_BOOTSTRAP_RESAMPLES, seed)
}

pub fn extinction_ensemble_with(
    g: &Adjacency,
    lambda: f64,
    replicas: usize,
    t_cap: f64,
    bootstrap_resamples: usize,
    seed: u64,
) -> Result<EnsembleReport, ExperimentError> {
    if replicas < 100 {
        return Err(ExperimentError::TooFewReplicas { need: 100, got: replicas });
    }
    let init = Configuration::full(g.vertex_count());
    let samples: Result<Vec<ExtinctionSample>, ExperimentError> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            extinction_time(g, lambda, &init, t_cap, substream(seed, TAG_TAU, r as u64))
                .map_err(ExperimentError::from)
        })
        .collect();
    let samples = samples?;
    let taus: Vec<f64> = samples.iter().filter(|s| !s.censored).map(|s| s.tau).collect();
    if taus.is_empty() {
        return Err(ExperimentError::AllCensored);
    }
    let (mean, se) = mean_se(&taus)?;
    let ks = ks_exp1_mean_normalized(&taus);
    let bootstrap_p =
        bootstrap_exp1_pvalue(ks, taus.len(), true, bootstrap_resamples, substream(seed, TAG_BOOT, 0));
    Ok(EnsembleReport {
        lambda,
        t_cap,
        replicas,
        uncensored: taus.len(),
        censored_fraction: 1.0 - taus.len() as f64 / replicas as f64,
        mean,
        se,
        ks,
        bootstrap_p,
        samples,
    })
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct BetaFit {
    pub beta_hat: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub r_squared: f64,
}

/// Least-squares fit of log mean extinction time against the vertex count.
/// Requires at least three distinct sizes.
pub fn beta_fit(records: &[(u32, f64)]) -> Result<BetaFit, ExperimentError> {
    let xs: Vec<f64> = records.iter().map(|&(n, _)| f64::from(n)).collect();
    let ys: Vec<f64> = records.iter().map(|&(_, m)| m.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    Ok(BetaFit {
        beta_hat: fit.slope,
        intercept: fit.intercept,
        slope_se: fit.slope_se,
        r_squared: fit.r_squared,
    })
}

/// Mean occupied fraction at a probe time on the quasi-stationary plateau;
/// used as the measured stand-in for the plateau density constant.
pub fn plateau_fraction(
    g: &Adjacency,
    lambda: f64,
    runs: usize,
    t_probe: f64,
    seed: u64,
) -> Result<f64, ExperimentError> {
    let n = g.vertex_count();
    let init = Configuration::full(n);
    let total: f64 = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut p = Process::new(g, lambda, &init, substream(seed, TAG_PLATEAU, r as u64))
                .expect("validated");
            p.run_until(t_probe);
            p.count() as f64 / n as f64
        })
        .sum();
    Ok(total / runs as f64)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct NRecord {
    pub n: u32,
    pub replicas: usize,
    pub uncensored: usize,
    pub censored_fraction: f64,
    pub mean: f64,
    pub se: f64,
    pub ks: f64,
    pub bootstrap_p: f64,
    pub taus: Vec<f64>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MetastabilityReport {
    pub d: u32,
    pub lambda: f64,
    pub t_cap: f64,
    pub records: Vec<NRecord>,
    pub beta: BetaFit,
    /// Closed-form spread exponent at (d, lambda).
    pub gamma: f64,
    /// Measured plateau fraction, when probed.
    pub delta0_hat: Option<f64>,
    /// Dual-window grid the deficiency sweeps use.
    pub a_grid: Vec<f64>,
}

/// Combines per-size ensembles into the headline report: per-n statistics
/// plus the exponential growth fit.
pub fn assemble_metastability(
    d: u32,
    lambda: f64,
    t_cap: f64,
    per_n: &[(u32, &EnsembleReport)],
    delta0_hat: Option<f64>,
    a_grid: Vec<f64>,
) -> Result<MetastabilityReport, ExperimentError> {
    let records: Vec<NRecord> = per_n
        .iter()
        .map(|&(n, r)| NRecord {
            n,
            replicas: r.replicas,
            uncensored: r.uncensored,
            censored_fraction: r.censored_fraction,
            mean: r.mean,
            se: r.se,
            ks: r.ks,
            bootstrap_p: r.bootstrap_p,
            taus: r.uncensored_taus(),
        })
        .collect();
    let beta = beta_fit(&records.iter().map(|r| (r.n, r.mean)).collect::<Vec<_>>())?;
    Ok(MetastabilityReport {
        d,
        lambda,
        t_cap,
        records,
        beta,
        gamma: gamma_exponent(d, lambda),
        delta0_hat,
        a_grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_random_regular;
    use crate::stats::harmonic;

    #[test]
    fn beta_fit_recovers_exact_slope() {
        // log mean = 0.1 n + 2 exactly.
        let records: Vec<(u32, f64)> =
            [10u32, 20, 30, 40].iter().map(|&n| (n, (0.1 * f64::from(n) + 2.0).exp())).collect();
        let fit = beta_fit(&records).unwrap();
        assert!((fit.beta_hat - 0.1).abs() < 1e-10);
        assert!((fit.intercept - 2.0).abs() < 1e-10);
    }

    #[test]
    fn beta_fit_of_constant_means_is_zero() {
        let records = vec![(10u32, 5.0), (20, 5.0), (30, 5.0)];
        assert!(beta_fit(&records).unwrap().beta_hat.abs() < 1e-12);
    }

    #[test]
    fn beta_fit_needs_three_sizes() {
        assert!(beta_fit(&[(10, 1.0), (20, 2.0)]).is_err());
    }

    #[test]
    fn small_ensembles_are_rejected() {
        let g = generate_random_regular(10, 3, 1).unwrap();
        assert!(matches!(
            extinction_ensemble(&g, 1.0, 50, 100.0, 1),
            Err(ExperimentError::TooFewReplicas { .. })
        ));
    }

    #[test]
    fn all_censored_is_reported() {
        let g = generate_random_regular(20, 3, 2).unwrap();
        // The cap is far below the first possible extinction of 20 sites.
        assert!(matches!(
            extinction_ensemble(&g, 2.5, 100, 1e-4, 3),
            Err(ExperimentError::AllCensored)
        ));
    }

    #[test]
    fn pure_death_ensemble_matches_harmonic_mean() {
        let g = generate_random_regular(8, 3, 5).unwrap();
        let r = extinction_ensemble_with(&g, 0.0, 4000, 100.0, 400, 7).unwrap();
        assert_eq!(r.uncensored, 4000);
        assert_eq!(r.censored_fraction, 0.0);
        let h8 = harmonic(8);
        assert!((r.mean - h8).abs() < 3.0 * r.se, "mean {} vs {h8}", r.mean);
    }

    #[test]
    fn ensemble_is_deterministic() {
        let g = generate_random_regular(12, 3, 6).unwrap();
        let a = extinction_ensemble_with(&g, 1.0, 200, 500.0, 200, 9).unwrap();
        let b = extinction_ensemble_with(&g, 1.0, 200, 500.0, 200, 9).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.ks, b.ks);
        assert_eq!(a.bootstrap_p, b.bootstrap_p);
    }

    #[test]
    fn plateau_fraction_reasonable_at_supercritical_rate() {
        let g = generate_random_regular(60, 3, 8).unwrap();
        let f = plateau_fraction(&g, 2.5, 64, 5.0, 11).unwrap();
        assert!(f > 0.3 && f < 1.0, "plateau fraction {f}");
    }
}
