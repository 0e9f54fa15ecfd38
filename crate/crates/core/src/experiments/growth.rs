//! Growth-rate and survival estimation for the single-seed process on a
//! depth-truncated regular tree.

use rayon::prelude::*;

use super::ExperimentError;
use crate::engine::{BoundedStep, Configuration, Process, StepEvent};
use crate::rng::substream;
use crate::stats::{linear_fit, mean_se};
use crate::structure::truncated_regular_tree;

const TAG_GROWTH: u64 = 0x6772_6f77_7468;
const TAG_SURVIVAL: u64 = 0x7375_7276_6976;

const CHECKPOINTS: usize = 21;
/// The regression window starts this far into the horizon, past the
/// single-seed transient.
const WINDOW_START_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, serde::Serialize)]
pub struct GrowthEstimate {
    pub d: u32,
    pub lambda: f64,
    pub depth: u32,
    pub horizon: f64,
    pub replicas: usize,
    pub times: Vec<f64>,
    pub means: Vec<f64>,
    pub ses: Vec<f64>,
    /// Regression window over which log mean population was fitted.
    pub window: (f64, f64),
    pub c_hat: f64,
    pub c_se: f64,
    pub intercept: f64,
    /// mean(t) / exp(c_hat * t) across the window checkpoints.
    pub ratios: Vec<f64>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Fraction of replicas in which the infection ever reached a
    /// truncation leaf; large values mean the horizon outruns the depth.
    pub boundary_hit_fraction: f64,
}

/// Simulates the single-seed process on the truncated d-regular tree and
/// regresses log mean population on time over the tail window.
pub fn estimate_growth_rate(
    d: u32,
    lambda: f64,
    depth: u32,
    horizon: f64,
    replicas: usize,
    seed: u64,
) -> Result<GrowthEstimate, ExperimentError> {
    if replicas < 2 {
        return Err(ExperimentError::TooFewReplicas { need: 2, got: replicas });
    }
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(ExperimentError::DegenerateRegression("horizon must be positive"));
    }
    let tree = truncated_regular_tree(d, depth);
    let mut is_leaf = vec![false; tree.adj.vertex_count()];
    for &l in &tree.leaves {
        is_leaf[l as usize] = true;
    }
    let times: Vec<f64> =
        (0..CHECKPOINTS).map(|i| horizon * i as f64 / (CHECKPOINTS - 1) as f64).collect();
    let init = Configuration::singleton(tree.root);
    let runs: Vec<(Vec<f64>, bool)> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut p = Process::new(&tree.adj, lambda, &init, substream(seed, TAG_GROWTH, r as u64))
                .expect("parameters validated");
            let mut counts = Vec::with_capacity(times.len());
            let mut hit = false;
            for &cp in &times {
                loop {
                    match p.step_bounded(cp) {
                        BoundedStep::Event(StepEvent::Infection { target, .. }) => {
                            if is_leaf[target as usize] {
                                hit = true;
                            }
                        }
                        BoundedStep::Event(_) => {}
                        BoundedStep::Limit | BoundedStep::Absorbed => break,
                    }
                }
                counts.push(p.count() as f64);
            }
            (counts, hit)
        })
        .collect();
    let boundary_hit_fraction =
        runs.iter().filter(|(_, hit)| *hit).count() as f64 / replicas as f64;
    let mut means = Vec::with_capacity(times.len());
    let mut ses = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        let col: Vec<f64> = runs.iter().map(|(c, _)| c[i]).collect();
        let (m, s) = mean_se(&col)?;
        means.push(m);
        ses.push(s);
    }
    let t0 = horizon * WINDOW_START_FRACTION;
    let window_idx: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= t0).collect();
    if window_idx.len() < 5 {
        return Err(ExperimentError::DegenerateRegression("fewer than 5 window checkpoints"));
    }
    if window_idx.iter().any(|&i| means[i] <= 0.0) {
        return Err(ExperimentError::AllExtinctWindow);
    }
    let xs: Vec<f64> = window_idx.iter().map(|&i| times[i]).collect();
    let ys: Vec<f64> = window_idx.iter().map(|&i| means[i].ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    let ratios: Vec<f64> =
        window_idx.iter().map(|&i| means[i] / (fit.slope * times[i]).exp()).collect();
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().copied().fold(0.0f64, f64::max);
    Ok(GrowthEstimate {
        d,
        lambda,
        depth,
        horizon,
        replicas,
        times,
        means,
        ses,
        window: (t0, horizon),
        c_hat: fit.slope,
        c_se: fit.slope_se,
        intercept: fit.intercept,
        ratios,
        min_ratio,
        max_ratio,
        boundary_hit_fraction,
    })
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SurvivalCell {
    pub depth: u32,
    pub horizon: f64,
    pub p_hat: f64,
    pub se: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SurvivalEstimate {
    pub d: u32,
    pub lambda: f64,
    pub depth: u32,
    pub horizon: f64,
    pub replicas: usize,
    pub p_hat: f64,
    pub se: f64,
    /// The same estimate at doubled depth and/or horizon; agreement within
    /// noise indicates the truncation is not biting.
    pub sensitivity: Vec<SurvivalCell>,
}

/// Fraction of single-seed replicas still alive at the horizon, with a
/// depth/horizon sensitivity table.
pub fn estimate_survival(
    d: u32,
    lambda: f64,
    depth: u32,
    horizon: f64,
    replicas: usize,
    seed: u64,
) -> Result<SurvivalEstimate, ExperimentError> {
    if replicas < 2 {
        return Err(ExperimentError::TooFewReplicas { need: 2, got: replicas });
    }
    if !horizon.is_finite() || horizon < 0.0 {
        return Err(ExperimentError::DegenerateRegression("horizon must be nonnegative"));
    }
    let cells = [
        (depth, horizon),
        (depth * 2, horizon),
        (depth, horizon * 2.0),
        (depth * 2, horizon * 2.0),
    ];
    let mut sensitivity = Vec::with_capacity(cells.len());
    for (ci, &(cd, ch)) in cells.iter().enumerate() {
        let tree = truncated_regular_tree(d, cd);
        let init = Configuration::singleton(tree.root);
        let alive: usize = (0..replicas)
            .into_par_iter()
            .filter(|&r| {
                let s = substream(seed, TAG_SURVIVAL, (ci * replicas + r) as u64);
                let mut p =
                    Process::new(&tree.adj, lambda, &init, s).expect("parameters validated");
                p.run_until(ch);
                p.count() > 0
            })
            .count();
        let p_hat = alive as f64 / replicas as f64;
        sensitivity.push(SurvivalCell {
            depth: cd,
            horizon: ch,
            p_hat,
            se: crate::stats::binomial_se(p_hat, replicas),
        });
    }
    let base = sensitivity[0];
    Ok(SurvivalEstimate {
        d,
        lambda,
        depth,
        horizon,
        replicas,
        p_hat: base.p_hat,
        se: base.se,
        sensitivity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_horizon_is_degenerate() {
        assert!(matches!(
            estimate_growth_rate(3, 2.5, 6, 0.0, 100, 1),
            Err(ExperimentError::DegenerateRegression(_))
        ));
    }

    #[test]
    fn supercritical_growth_rate_is_positive() {
        // The front is extreme-value fast: the chance some ray of the tree
        // is crossed by time t is about 3 * 2^{k-1} P(Poisson(lambda t) >= k)
        // at depth k, so horizon 1.2 needs depth ~15 to keep hits rare.
        let e = estimate_growth_rate(3, 2.5, 15, 1.2, 1500, 11).unwrap();
        assert!(e.c_hat > 0.0, "c_hat = {}", e.c_hat);
        assert!(e.boundary_hit_fraction < 0.05, "hits = {}", e.boundary_hit_fraction);
        assert!(e.min_ratio > 0.0 && e.max_ratio.is_finite());
        assert_eq!(e.ratios.len(), 16);
    }

    #[test]
    fn deep_subcritical_slope_is_negative() {
        let e = estimate_growth_rate(3, 0.05, 6, 4.0, 4000, 13).unwrap();
        assert!(e.c_hat < 0.0, "c_hat = {}", e.c_hat);
    }

    #[test]
    fn growth_estimate_is_deterministic() {
        let a = estimate_growth_rate(3, 1.5, 6, 1.5, 300, 7).unwrap();
        let b = estimate_growth_rate(3, 1.5, 6, 1.5, 300, 7).unwrap();
        assert_eq!(a.means, b.means);
        assert_eq!(a.c_hat, b.c_hat);
    }

    #[test]
    fn survival_without_infection_decays_like_single_clock() {
        let horizon = 2.0;
        let e = estimate_survival(3, 0.0, 4, horizon, 20_000, 3).unwrap();
        let expect = (-horizon).exp();
        assert!(
            (e.p_hat - expect).abs() < 3.0 * e.se + 1e-3,
            "p_hat = {} vs {expect}",
            e.p_hat
        );
    }

    #[test]
    fn survival_needs_replicas() {
        assert!(matches!(
            estimate_survival(3, 1.0, 4, 1.0, 1, 0),
            Err(ExperimentError::TooFewReplicas { .. })
        ));
    }

    #[test]
    fn sensitivity_table_has_four_cells() {
        let e = estimate_survival(3, 2.5, 5, 2.0, 400, 5).unwrap();
        assert_eq!(e.sensitivity.len(), 4);
        assert_eq!(e.sensitivity[0].p_hat, e.p_hat);
        assert_eq!(e.sensitivity[3].depth, 10);
    }
}
