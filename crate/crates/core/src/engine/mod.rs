//! The contact process: infected vertices recover at rate 1, healthy
//! vertices are infected at rate lambda per infected neighbor.
//!
//! Two execution modes realize the same law. Active-clock mode draws the next
//! event from the exact total rate and is the workhorse for long extinction
//! runs; full-field mode realizes every recovery mark and infection arrow on
//! a window, which is what coupling and duality need.

mod field;
mod state;

pub use field::{
    extinction_time_full_field, simulate_coupled, Arrow, EventField, FieldEvent, Mark,
};
pub use state::{BoundedStep, Process, RunOutcome, StepEvent};

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{Adjacency, VertexSet};
use crate::rng::substream;
use crate::stats::mean_se;
use crate::structure::{build_delta, StructureError};

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("lambda must be nonnegative and finite, got {0}")]
    InvalidRate(f64),
    #[error("time bound must be nonnegative and finite, got {0}")]
    InvalidTime(f64),
    #[error("time cap must be positive, got {0}")]
    InvalidCap(f64),
    #[error("vertex {v} out of range for n = {n}")]
    VertexOutOfRange { v: u32, n: u32 },
    #[error("dual window {t_back} exceeds the field window {t_max}")]
    DualWindowExceeded { t_back: f64, t_max: f64 },
    #[error("need at least {need} {what}, got {got}")]
    TooFew { what: &'static str, need: usize, got: usize },
    #[error("checkpoints must be ascending and within [0, t_max]")]
    BadCheckpoints,
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// A set of infected vertices.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Configuration {
    infected: VertexSet,
}

impl Configuration {
    pub fn new(infected: VertexSet) -> Self {
        Configuration { infected }
    }

    pub fn empty() -> Self {
        Configuration { infected: VertexSet::empty() }
    }

    pub fn singleton(v: u32) -> Self {
        Configuration { infected: VertexSet::singleton(v) }
    }

    pub fn full(n: usize) -> Self {
        Configuration { infected: VertexSet::full(n) }
    }

    pub fn infected(&self) -> &VertexSet {
        &self.infected
    }

    pub fn len(&self) -> usize {
        self.infected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.infected.is_empty()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.infected.contains(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Checkpoint {
    pub time: f64,
    pub infected: u32,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TrajectorySummary {
    pub final_config: Configuration,
    /// Present exactly when the final configuration is empty.
    pub extinction_time: Option<f64>,
    pub checkpoints: Vec<Checkpoint>,
    pub events: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ExtinctionSample {
    pub tau: f64,
    pub censored: bool,
    pub t_cap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Mode {
    ActiveClock,
    FullField,
}

/// Exact transition rates out of a configuration: recoveries fire at rate 1
/// per infected vertex, infections at rate lambda per directed boundary edge.
pub fn step_rates(g: &Adjacency, c: &Configuration, lambda: f64) -> (f64, f64, f64) {
    assert!(lambda >= 0.0, "lambda must be nonnegative");
    let mut infected = vec![false; g.vertex_count()];
    for v in c.infected().iter() {
        infected[v as usize] = true;
    }
    let mut boundary = 0u64;
    for v in c.infected().iter() {
        boundary += g.neighbors(v).iter().filter(|&&u| !infected[u as usize]).count() as u64;
    }
    let rec = c.len() as f64;
    let inf = lambda * boundary as f64;
    (rec, inf, rec + inf)
}

fn validate_checkpoints(checkpoints: &[f64], t_max: f64) -> Result<(), EngineError> {
    let ok = checkpoints.windows(2).all(|w| w[0] <= w[1])
        && checkpoints.iter().all(|&c| (0.0..=t_max).contains(&c));
    if ok {
        Ok(())
    } else {
        Err(EngineError::BadCheckpoints)
    }
}

/// Runs one trajectory to `t_max`, recording infected counts at the given
/// checkpoint times. Full-field mode also returns the realized field.
pub fn simulate(
    g: &Adjacency,
    lambda: f64,
    init: &Configuration,
    t_max: f64,
    mode: Mode,
    checkpoints: &[f64],
    seed: u64,
) -> Result<(TrajectorySummary, Option<EventField>), EngineError> {
    if !t_max.is_finite() || t_max < 0.0 {
        return Err(EngineError::InvalidTime(t_max));
    }
    validate_checkpoints(checkpoints, t_max)?;
    match mode {
        Mode::ActiveClock => {
            let mut p = Process::new(g, lambda, init, seed)?;
            let mut recorded = Vec::with_capacity(checkpoints.len());
            let mut extinction = None;
            for &cp in checkpoints {
                if extinction.is_none() {
                    if let RunOutcome::Absorbed(t) = p.run_until(cp) {
                        extinction = Some(t);
                    }
                }
                recorded.push(Checkpoint { time: cp, infected: p.count() as u32 });
            }
            if extinction.is_none() {
                if let RunOutcome::Absorbed(t) = p.run_until(t_max) {
                    extinction = Some(t);
                }
            }
            Ok((
                TrajectorySummary {
                    final_config: p.configuration(),
                    extinction_time: extinction,
                    checkpoints: recorded,
                    events: p.events(),
                },
                None,
            ))
        }
        Mode::FullField => {
            let field = EventField::generate(g, lambda, t_max, seed)?;
            let summary = field.apply(init, checkpoints)?;
            Ok((summary, Some(field)))
        }
    }
}

/// Dual process over the tail of a realized field: arrows reversed, marks
/// kill. `dual(field, B, t)` and a forward run of length `t` satisfy the
/// duality identity in law.
pub fn dual_simulate(
    field: &EventField,
    targets: &Configuration,
    t_back: f64,
) -> Result<Configuration, EngineError> {
    field.dual(targets, t_back)
}

/// Active-clock run until absorption or the cap.
pub fn extinction_time(
    g: &Adjacency,
    lambda: f64,
    init: &Configuration,
    t_cap: f64,
    seed: u64,
) -> Result<ExtinctionSample, EngineError> {
    if t_cap.is_nan() || t_cap <= 0.0 {
        return Err(EngineError::InvalidCap(t_cap));
    }
    let mut p = Process::new(g, lambda, init, seed)?;
    match p.run_until(t_cap) {
        RunOutcome::Absorbed(t) => Ok(ExtinctionSample { tau: t, censored: false, t_cap }),
        RunOutcome::Reached => Ok(ExtinctionSample { tau: t_cap, censored: true, t_cap }),
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SeveredEstimate {
    pub d: u32,
    pub depth: u32,
    pub horizon: f64,
    pub cap: u32,
    pub mean_size: f64,
    pub se_size: f64,
    pub mean_truncated: f64,
    pub se_truncated: f64,
    pub replicas: usize,
}

/// Contact process on the severed tree started from its root: estimates the
/// mean population at the horizon and its cap-truncated companion.
pub fn severed_growth(
    d: u32,
    depth: u32,
    lambda: f64,
    horizon: f64,
    cap: u32,
    replicas: usize,
    seed: u64,
) -> Result<SeveredEstimate, EngineError> {
    const TAG: u64 = 0x7365_7665_7265;
    if replicas < 2 {
        return Err(EngineError::TooFew { what: "replicas", need: 2, got: replicas });
    }
    if !horizon.is_finite() || horizon < 0.0 {
        return Err(EngineError::InvalidTime(horizon));
    }
    let tree = build_delta(d, depth)?;
    let init = Configuration::singleton(tree.root);
    let sizes: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut p = Process::new(&tree.adj, lambda, &init, substream(seed, TAG, r as u64))
                .expect("validated above");
            p.run_until(horizon);
            p.count() as f64
        })
        .collect();
    let truncated: Vec<f64> = sizes.iter().map(|&s| s.min(cap as f64)).collect();
    let (mean_size, se_size) = mean_se(&sizes).expect("replicas >= 2");
    let (mean_truncated, se_truncated) = mean_se(&truncated).expect("replicas >= 2");
    Ok(SeveredEstimate {
        d,
        depth,
        horizon,
        cap,
        mean_size,
        se_size,
        mean_truncated,
        se_truncated,
        replicas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{complete, prism};
    use crate::stats::{harmonic, ks_pvalue};

    #[test]
    fn step_rates_examples() {
        let g = complete(4);
        assert_eq!(step_rates(&g, &Configuration::full(4), 3.0), (4.0, 0.0, 4.0));
        let one = Configuration::singleton(0);
        assert_eq!(step_rates(&g, &one, 2.5), (1.0, 7.5, 8.5));
        assert_eq!(step_rates(&g, &Configuration::empty(), 1.0), (0.0, 0.0, 0.0));
    }

    #[test]
    fn zero_horizon_returns_initial_state() {
        let g = complete(4);
        let init = Configuration::new(VertexSet::new(vec![1, 3]));
        for mode in [Mode::ActiveClock, Mode::FullField] {
            let (s, _) = simulate(&g, 2.0, &init, 0.0, mode, &[], 5).unwrap();
            assert_eq!(s.final_config, init);
            assert_eq!(s.events, 0);
            assert!(s.extinction_time.is_none());
        }
    }

    #[test]
    fn pure_death_extinction_mean_is_harmonic() {
        // With lambda = 0 the extinction time is the max of n unit
        // exponentials; its mean is H_n = 25/12 for n = 4.
        let g = complete(4);
        let replicas = 40_000;
        let taus: Vec<f64> = (0..replicas)
            .map(|r| {
                extinction_time(&g, 0.0, &Configuration::full(4), 1e9, substream(3, 1, r))
                    .unwrap()
                    .tau
            })
            .collect();
        let (mean, se) = mean_se(&taus).unwrap();
        let h4 = harmonic(4);
        assert!((mean - h4).abs() < 3.0 * se, "mean {mean} vs {h4} (se {se})");
    }

    #[test]
    fn extinction_from_empty_is_zero_uncensored() {
        let g = complete(4);
        let s = extinction_time(&g, 1.0, &Configuration::empty(), 10.0, 1).unwrap();
        assert_eq!((s.tau, s.censored), (0.0, false));
    }

    #[test]
    fn tiny_cap_censors_nearly_always() {
        // From full occupancy on K4 the first event fires at rate 4, so the
        // chance of any event by 0.001 is ~ 0.4%, and extinction needs four
        // recoveries on top of that.
        let g = complete(4);
        let replicas = 20_000u64;
        let censored = (0..replicas)
            .filter(|&r| {
                extinction_time(&g, 2.5, &Configuration::full(4), 0.001, substream(9, 2, r))
                    .unwrap()
                    .censored
            })
            .count();
        let frac = censored as f64 / replicas as f64;
        assert!(frac >= 0.996, "censored fraction {frac}");
    }

    #[test]
    fn determinism_bit_for_bit() {
        let g = prism();
        let init = Configuration::full(6);
        let cps = [0.5, 1.0, 1.5, 2.0];
        let (a, _) = simulate(&g, 1.3, &init, 2.0, Mode::ActiveClock, &cps, 77).unwrap();
        let (b, _) = simulate(&g, 1.3, &init, 2.0, Mode::ActiveClock, &cps, 77).unwrap();
        assert_eq!(a, b);
        let (c, fc) = simulate(&g, 1.3, &init, 2.0, Mode::FullField, &cps, 77).unwrap();
        let (d, fd) = simulate(&g, 1.3, &init, 2.0, Mode::FullField, &cps, 77).unwrap();
        assert_eq!(c, d);
        assert_eq!(fc.unwrap().to_csv(), fd.unwrap().to_csv());
    }

    #[test]
    fn holding_times_from_frozen_state_are_exponential_with_total_rate() {
        let g = prism();
        let init = Configuration::new(VertexSet::new(vec![0, 1]));
        let lambda = 1.7;
        let (_, _, total) = step_rates(&g, &init, lambda);
        let m = 4000;
        let times: Vec<f64> = (0..m)
            .map(|r| {
                let mut p = Process::new(&g, lambda, &init, substream(21, 4, r)).unwrap();
                match p.step_bounded(f64::INFINITY) {
                    BoundedStep::Event(e) => e.time() * total,
                    _ => unreachable!("nonempty state always has a next event"),
                }
            })
            .collect();
        let d = crate::stats::ks_exp1(&times);
        let p = ks_pvalue(d, m as usize);
        assert!(p > 0.01, "KS p-value {p}");
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn coupled_containment_and_additivity_pathwise() {
        let g = prism();
        let a = Configuration::new(VertexSet::new(vec![0, 4]));
        let b = Configuration::new(VertexSet::new(vec![1, 4, 5]));
        let union = Configuration::new(a.infected().union(b.infected()));
        let full = Configuration::full(6);
        for seed in 0..300 {
            let inits = [a.clone(), b.clone(), union.clone(), full.clone()];
            let (res, field) = simulate_coupled(&g, 2.0, &inits, 3.0, &[], seed).unwrap();
            // Recheck the relations at every event time by replaying the
            // field on all four configurations in lockstep.
            let mut sets: Vec<Vec<bool>> = inits
                .iter()
                .map(|c| {
                    let mut s = vec![false; 6];
                    c.infected().iter().for_each(|v| s[v as usize] = true);
                    s
                })
                .collect();
            for ev in field.events() {
                match ev {
                    FieldEvent::Mark(m) => {
                        for s in &mut sets {
                            s[m.vertex as usize] = false;
                        }
                    }
                    FieldEvent::Arrow(arw) => {
                        for s in &mut sets {
                            if s[arw.source as usize] {
                                s[arw.target as usize] = true;
                            }
                        }
                    }
                }
                for v in 0..6 {
                    assert!(!sets[0][v] || sets[3][v], "containment A <= full broke");
                    assert!(!sets[1][v] || sets[3][v], "containment B <= full broke");
                    assert_eq!(sets[2][v], sets[0][v] || sets[1][v], "additivity broke");
                }
            }
            for v in 0..6u32 {
                assert_eq!(
                    res[2].final_config.contains(v),
                    res[0].final_config.contains(v) || res[1].final_config.contains(v)
                );
            }
        }
    }

    #[test]
    fn coupled_without_arrows_keeps_intersection_exact() {
        let g = complete(4);
        let a = Configuration::new(VertexSet::new(vec![0, 2]));
        let full = Configuration::full(4);
        for seed in 0..200 {
            let inits = [a.clone(), full.clone()];
            let (res, _) = simulate_coupled(&g, 0.0, &inits, 2.0, &[], 1000 + seed).unwrap();
            let from_a: Vec<u32> = res[0].final_config.infected().iter().collect();
            let expected: Vec<u32> = res[1]
                .final_config
                .infected()
                .iter()
                .filter(|&v| a.contains(v))
                .collect();
            assert_eq!(from_a, expected, "shared marks, no arrows: xi^A = A intersect xi^V");
        }
    }

    #[test]
    fn coupled_requires_two_configurations() {
        let g = complete(4);
        assert!(matches!(
            simulate_coupled(&g, 1.0, &[Configuration::full(4)], 1.0, &[], 0),
            Err(EngineError::TooFew { .. })
        ));
    }

    #[test]
    fn severed_growth_at_zero_horizon_is_one() {
        let e = severed_growth(3, 3, 2.5, 0.0, 10, 100, 5).unwrap();
        assert_eq!(e.mean_size, 1.0);
        assert_eq!(e.se_size, 0.0);
        assert_eq!(e.mean_truncated, 1.0);
    }

    #[test]
    fn severed_growth_needs_two_replicas() {
        assert!(matches!(
            severed_growth(3, 2, 1.0, 1.0, 5, 1, 0),
            Err(EngineError::TooFew { .. })
        ));
    }

    #[test]
    fn invalid_inputs_rejected() {
        let g = complete(4);
        let init = Configuration::full(4);
        assert!(simulate(&g, 1.0, &init, f64::NAN, Mode::ActiveClock, &[], 0).is_err());
        assert!(simulate(&g, -0.5, &init, 1.0, Mode::ActiveClock, &[], 0).is_err());
        assert!(simulate(&g, 1.0, &init, 1.0, Mode::ActiveClock, &[2.0], 0).is_err());
        assert!(extinction_time(&g, 1.0, &init, 0.0, 0).is_err());
    }
}
