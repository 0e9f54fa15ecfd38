//! Per-vertex survival scan at the covering time (1 + epsilon) ln n / c_hat,
//! with size-conditional statistics against the expected plateau band.

use rayon::prelude::*;

use super::ExperimentError;
use crate::engine::{Configuration, Process};
use crate::graph::Adjacency;
use crate::rng::substream;
use crate::stats::binomial_se;

const TAG_SCAN: u64 = 0x7363_616e;

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ScanParams {
    pub epsilon: f64,
    /// Estimated growth rate; the scan time is (1+epsilon) ln n / c_hat.
    pub c_hat: f64,
    /// Its standard error; the scan also reports survival at the times
    /// implied by c_hat -+ 2 SE.
    pub c_se: f64,
    /// Estimated single-seed survival probability (sets the size band).
    pub p_hat: f64,
    /// Half-width of the relative size band around n * p_hat.
    pub band_delta: f64,
    pub replicas: usize,
    /// Scan only this many vertices (lowest ids) instead of all of them.
    pub vertex_sample: Option<usize>,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct VertexSurvival {
    pub vertex: u32,
    pub survival: f64,
    pub se: f64,
    pub surviving: usize,
    /// Among surviving replicas, the fraction whose size landed in the band.
    pub band_fraction: Option<f64>,
    pub mean_size_surviving: Option<f64>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GoodVertexScan {
    pub target_time: f64,
    /// Scan times at c_hat + 2 SE and c_hat - 2 SE.
    pub target_time_low: f64,
    pub target_time_high: f64,
    pub band: (f64, f64),
    pub per_vertex: Vec<VertexSurvival>,
    /// Mean survival across scanned vertices at the three times.
    pub pooled_survival: f64,
    pub pooled_survival_low: f64,
    pub pooled_survival_high: f64,
    /// Fraction of scanned vertices whose estimate is within 3 SE of p_hat.
    pub fraction_near_p_hat: f64,
}

pub fn good_vertex_scan(
    g: &Adjacency,
    lambda: f64,
    params: &ScanParams,
    seed: u64,
) -> Result<GoodVertexScan, ExperimentError> {
    if params.c_hat <= 0.0 {
        return Err(ExperimentError::NonPositiveGrowthRate(params.c_hat));
    }
    if params.replicas < 2 {
        return Err(ExperimentError::TooFewReplicas { need: 2, got: params.replicas });
    }
    let n = g.vertex_count();
    let log_n = (n as f64).ln();
    let target = (1.0 + params.epsilon) * log_n / params.c_hat;
    // Lower growth rate means a later covering time.
    let c_low = (params.c_hat - 2.0 * params.c_se).max(params.c_hat * 0.1);
    let c_high = params.c_hat + 2.0 * params.c_se;
    let t_low = (1.0 + params.epsilon) * log_n / c_high;
    let t_high = (1.0 + params.epsilon) * log_n / c_low;
    let band =
        ((1.0 - params.band_delta) * n as f64 * params.p_hat,
         (1.0 + params.band_delta) * n as f64 * params.p_hat);
    let scanned = params.vertex_sample.unwrap_or(n).min(n);
    let replicas = params.replicas;
    let per_vertex: Vec<(VertexSurvival, usize, usize)> = (0..scanned as u32)
        .into_par_iter()
        .map(|u| {
            let init = Configuration::singleton(u);
            let mut alive_low = 0usize;
            let mut alive_high = 0usize;
            let mut surviving = 0usize;
            let mut in_band = 0usize;
            let mut size_sum = 0.0f64;
            for r in 0..replicas {
                let s = substream(seed, TAG_SCAN, (u64::from(u) << 32) | r as u64);
                let mut p = Process::new(g, lambda, &init, s).expect("validated");
                p.run_until(t_low);
                alive_low += usize::from(p.count() > 0);
                p.run_until(target);
                let size = p.count();
                if size > 0 {
                    surviving += 1;
                    size_sum += size as f64;
                    if (band.0..=band.1).contains(&(size as f64)) {
                        in_band += 1;
                    }
                }
                p.run_until(t_high);
                alive_high += usize::from(p.count() > 0);
            }
            let survival = surviving as f64 / replicas as f64;
            let vs = VertexSurvival {
                vertex: u,
                survival,
                se: binomial_se(survival, replicas),
                surviving,
                band_fraction: (surviving > 0).then(|| in_band as f64 / surviving as f64),
                mean_size_surviving: (surviving > 0).then(|| size_sum / surviving as f64),
            };
            (vs, alive_low, alive_high)
        })
        .collect();
    let pooled = |f: &dyn Fn(&(VertexSurvival, usize, usize)) -> f64| {
        per_vertex.iter().map(f).sum::<f64>() / scanned as f64
    };
    let pooled_survival = pooled(&|x| x.0.survival);
    let pooled_survival_low = pooled(&|x| x.1 as f64 / replicas as f64);
    let pooled_survival_high = pooled(&|x| x.2 as f64 / replicas as f64);
    let near = per_vertex
        .iter()
        .filter(|(v, _, _)| (v.survival - params.p_hat).abs() <= 3.0 * v.se.max(1e-12))
        .count();
    Ok(GoodVertexScan {
        target_time: target,
        target_time_low: t_low,
        target_time_high: t_high,
        band,
        per_vertex: per_vertex.into_iter().map(|(v, _, _)| v).collect(),
        pooled_survival,
        pooled_survival_low,
        pooled_survival_high,
        fraction_near_p_hat: near as f64 / scanned as f64,
    })
}
