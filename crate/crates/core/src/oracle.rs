//! Exact answers on small graphs, the ground truth the engine is validated
//! against: expected extinction times by solving the first-passage system
//! over all 2^n configurations, and transient occupation probabilities by
//! uniformization. Everything is matrix-free; a configuration is an n-bit
//! integer and the generator is applied on the fly.

use thiserror::Error;

use crate::engine::Configuration;
use crate::graph::{Adjacency, VertexSet};

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("state space 2^{n} exceeds the cap 2^{cap}")]
    StateSpaceCapExceeded { n: usize, cap: usize },
    #[error("iteration did not reach tolerance {tolerance} within {budget} steps")]
    ToleranceUnachievable { tolerance: f64, budget: u64 },
    #[error("elimination hit a vanishing pivot, which cannot happen for a nonnegative rate")]
    Singular,
    #[error("lambda must be nonnegative and finite, got {0}")]
    InvalidRate(f64),
    #[error("time must be nonnegative and finite, got {0}")]
    InvalidTime(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Method {
    LinearSolve,
    Uniformization,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ExactResult {
    pub expected_extinction: Option<f64>,
    pub survival_probability: Option<f64>,
    pub marginals: Option<Vec<f64>>,
    pub method: Method,
    /// Sweeps for the linear solve, series terms for uniformization.
    pub terms: u64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    /// Largest vertex count the 2^n representation is allowed for.
    pub state_cap: usize,
    pub tolerance: f64,
    /// Iteration budget: sweeps for the solver, terms for uniformization.
    pub budget: u64,
    /// Lower bound on the uniformization term count (stability checks).
    pub min_terms: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { state_cap: 14, tolerance: 1e-10, budget: 2_000_000, min_terms: 0 }
    }
}

struct StateSpace {
    n: usize,
    nbr_mask: Vec<u32>,
    lambda: f64,
}

impl StateSpace {
    fn new(g: &Adjacency, lambda: f64, opts: &OracleOptions) -> Result<Self, OracleError> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(OracleError::InvalidRate(lambda));
        }
        let n = g.vertex_count();
        if n > opts.state_cap {
            return Err(OracleError::StateSpaceCapExceeded { n, cap: opts.state_cap });
        }
        let nbr_mask = (0..n as u32)
            .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | (1 << u)))
            .collect();
        Ok(StateSpace { n, nbr_mask, lambda })
    }

    #[inline]
    fn states(&self) -> usize {
        1 << self.n
    }

    /// Total exit rate of state `s`.
    fn total_rate(&self, s: u32) -> f64 {
        let mut infection = 0u32;
        for v in 0..self.n {
            if s & (1 << v) == 0 {
                infection += (self.nbr_mask[v] & s).count_ones();
            }
        }
        s.count_ones() as f64 + self.lambda * f64::from(infection)
    }

    /// Applies one step toward the fixed point h(s) = rhs(h)(s) and reports
    /// the largest update; sweeps visit states by ascending popcount so the
    /// recovery part (which only points downward) is consumed immediately.
    fn gauss_seidel_sweep(&self, order: &[u32], h: &mut [f64]) -> f64 {
        let mut delta = 0.0f64;
        for &s in order {
            let mut acc = 1.0;
            let mut rate = 0.0;
            for v in 0..self.n {
                let bit = 1u32 << v;
                if s & bit != 0 {
                    acc += h[(s ^ bit) as usize];
                    rate += 1.0;
                } else {
                    let k = (self.nbr_mask[v] & s).count_ones();
                    if k > 0 {
                        let r = self.lambda * f64::from(k);
                        acc += r * h[(s | bit) as usize];
                        rate += r;
                    }
                }
            }
            let new = acc / rate;
            delta = delta.max((new - h[s as usize]).abs());
            h[s as usize] = new;
        }
        delta
    }
}

fn init_mask(init: &Configuration) -> u32 {
    init.infected().iter().fold(0u32, |m, v| m | (1 << v))
}

/// Expected time to reach the empty configuration, by Gauss-Seidel on the
/// first-passage system with an extrapolated stopping rule: iteration ends
/// when the geometric tail estimate of the remaining error drops below the
/// tolerance.
pub fn exact_mean_extinction(
    g: &Adjacency,
    lambda: f64,
    init: &Configuration,
) -> Result<ExactResult, OracleError> {
    exact_mean_extinction_with(g, lambda, init, &OracleOptions::default())
}

pub fn exact_mean_extinction_with(
    g: &Adjacency,
    lambda: f64,
    init: &Configuration,
    opts: &OracleOptions,
) -> Result<ExactResult, OracleError> {
    let space = StateSpace::new(g, lambda, opts)?;
    let mut order: Vec<u32> = (1..space.states() as u32).collect();
    order.sort_by_key(|s| (s.count_ones(), *s));
    let mut h = vec![0.0f64; space.states()];
    let mut recent: [f64; 4] = [f64::INFINITY; 4];
    let mut sweeps = 0u64;
    loop {
        sweeps += 1;
        if sweeps > opts.budget {
            return Err(OracleError::ToleranceUnachievable {
                tolerance: opts.tolerance,
                budget: opts.budget,
            });
        }
        let delta = space.gauss_seidel_sweep(&order, &mut h);
        if delta == 0.0 {
            break;
        }
        recent.rotate_left(1);
        recent[3] = delta;
        // Geometric-tail stop: with contraction rho, the remaining error is
        // about delta * rho / (1 - rho). Use the most pessimistic recent
        // ratio so a lucky sweep cannot end the iteration early.
        if sweeps >= 4 {
            let rho = (recent[1] / recent[0]).max(recent[2] / recent[1]).max(recent[3] / recent[2]);
            if rho < 1.0 && delta * rho / (1.0 - rho) < opts.tolerance {
                break;
            }
        }
    }
    Ok(ExactResult {
        expected_extinction: Some(h[init_mask(init) as usize]),
        survival_probability: None,
        marginals: None,
        method: Method::LinearSolve,
        terms: sweeps,
        tolerance: opts.tolerance,
    })
}

/// Dense elimination over the 2^n - 1 transient states; the independent
/// cross-check for the iterative path, practical for n <= 8.
pub fn exact_mean_extinction_direct(
    g: &Adjacency,
    lambda: f64,
    init: &Configuration,
) -> Result<f64, OracleError> {
    let opts = OracleOptions { state_cap: 8, ..OracleOptions::default() };
    let space = StateSpace::new(g, lambda, &opts)?;
    let m = space.states() - 1; // transient states 1..2^n
    let mut a = vec![0.0f64; m * m];
    let mut b = vec![1.0f64; m];
    for s in 1..space.states() as u32 {
        let row = (s - 1) as usize;
        let mut rate_sum = 0.0;
        for v in 0..space.n {
            let bit = 1u32 << v;
            if s & bit != 0 {
                rate_sum += 1.0;
                let t = s ^ bit;
                if t != 0 {
                    a[row * m + (t - 1) as usize] -= 1.0;
                }
            } else {
                let k = (space.nbr_mask[v] & s).count_ones();
                if k > 0 {
                    let r = space.lambda * f64::from(k);
                    rate_sum += r;
                    a[row * m + (s | bit) as usize - 1] -= r;
                }
            }
        }
        a[row * m + row] = rate_sum;
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i * m + col].abs().total_cmp(&a[j * m + col].abs()))
            .unwrap();
        if a[pivot * m + col].abs() < 1e-14 {
            return Err(OracleError::Singular);
        }
        if pivot != col {
            for k in 0..m {
                a.swap(col * m + k, pivot * m + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * m + col];
        for row in 0..m {
            if row == col {
                continue;
            }
            let factor = a[row * m + col] / diag;
            if factor != 0.0 {
                for k in col..m {
                    a[row * m + k] -= factor * a[col * m + k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mask = init_mask(init);
    if mask == 0 {
        return Ok(0.0);
    }
    let row = (mask - 1) as usize;
    Ok(b[row] / a[row * m + row])
}

/// Full distribution over configurations at time `t`, by uniformization with
/// an adaptive term count: the series stops once the neglected Poisson tail
/// falls below the tolerance.
pub fn transient_distribution(
    g: &Adjacency,
    lambda: f64,
    init: &Configuration,
    t: f64,
    opts: &OracleOptions,
) -> Result<(Vec<f64>, u64), OracleError> {
    if !t.is_finite() || t < 0.0 {
        return Err(OracleError::InvalidTime(t));
    }
    let space = StateSpace::new(g, lambda, opts)?;
    let states = space.states();
    let rates: Vec<f64> = (0..states as u32).map(|s| space.total_rate(s)).collect();
    let uni = rates.iter().copied().fold(0.0f64, f64::max);
    let mut v = vec![0.0f64; states];
    v[init_mask(init) as usize] = 1.0;
    let a = uni * t;
    if a == 0.0 {
        return Ok((v, 1));
    }
    let mut out = vec![0.0f64; states];
    let mut log_w = -a; // ln of the Poisson(a) weight at k = 0
    let mut covered = 0.0f64;
    let mut next = vec![0.0f64; states];
    let mut k = 0u64;
    loop {
        let w = log_w.exp();
        covered += w;
        if w > 0.0 {
            for s in 0..states {
                out[s] += w * v[s];
            }
        }
        if (1.0 - covered < opts.tolerance && k >= opts.min_terms) || covered >= 1.0 {
            break;
        }
        k += 1;
        if k > opts.budget {
            return Err(OracleError::ToleranceUnachievable {
                tolerance: opts.tolerance,
                budget: opts.budget,
            });
        }
        // One application of the uniformized kernel I + Q/uni.
        next.iter_mut().for_each(|x| *x = 0.0);
        for s in 0..states as u32 {
            let mass = v[s as usize];
            if mass == 0.0 {
                continue;
            }
            next[s as usize] += mass * (1.0 - rates[s as usize] / uni);
            for vx in 0..space.n {
                let bit = 1u32 << vx;
                if s & bit != 0 {
                    next[(s ^ bit) as usize] += mass / uni;
                } else {
                    let kk = (space.nbr_mask[vx] & s).count_ones();
                    if kk > 0 {
                        next[(s | bit) as usize] += mass * space.lambda * f64::from(kk) / uni;
                    }
                }
            }
        }
        std::mem::swap(&mut v, &mut next);
        log_w += a.ln() - (k as f64).ln();
    }
    Ok((out, k + 1))
}

/// Survival probability and per-vertex occupation marginals at time `t`.
pub fn exact_transient(
    g: &Adjacency,
    lambda: f64,
    init: &Configuration,
    t: f64,
) -> Result<ExactResult, OracleError> {
    exact_transient_with(g, lambda, init, t, &OracleOptions::default())
}

pub fn exact_transient_with(
    g: &Adjacency,
    lambda: f64,
    init: &Configuration,
    t: f64,
    opts: &OracleOptions,
) -> Result<ExactResult, OracleError> {
    let (dist, terms) = transient_distribution(g, lambda, init, t, opts)?;
    let n = g.vertex_count();
    let mut marginals = vec![0.0f64; n];
    for (s, &mass) in dist.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        let mut bits = s;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            marginals[v] += mass;
            bits &= bits - 1;
        }
    }
    Ok(ExactResult {
        expected_extinction: None,
        survival_probability: Some(1.0 - dist[0]),
        marginals: Some(marginals),
        method: Method::Uniformization,
        terms,
        tolerance: opts.tolerance,
    })
}

/// P{the configuration at time t intersects `targets`}, from the full
/// transient distribution.
pub fn hit_probability(
    g: &Adjacency,
    lambda: f64,
    init: &Configuration,
    targets: &VertexSet,
    t: f64,
) -> Result<f64, OracleError> {
    let (dist, _) = transient_distribution(g, lambda, init, t, &OracleOptions::default())?;
    let target_mask = targets.iter().fold(0u32, |m, v| m | (1 << v));
    let miss: f64 = dist
        .iter()
        .enumerate()
        .filter(|(s, _)| *s as u32 & target_mask == 0)
        .map(|(_, &p)| p)
        .sum();
    Ok(1.0 - miss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{complete, prism, two_path};
    use crate::graph::generate_random_regular;
    use crate::stats::harmonic;

    fn single_vertex() -> Adjacency {
        Adjacency::from_edges(1, &[]).unwrap()
    }

    #[test]
    fn lone_vertex_dies_in_unit_mean_time() {
        for lambda in [0.0, 1.0, 5.0] {
            let r =
                exact_mean_extinction(&single_vertex(), lambda, &Configuration::singleton(0))
                    .unwrap();
            assert!((r.expected_extinction.unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_vertex_closed_forms() {
        let g = two_path();
        for lambda in [0.0, 0.7, 1.0, 2.5] {
            let one = exact_mean_extinction(&g, lambda, &Configuration::singleton(0))
                .unwrap()
                .expected_extinction
                .unwrap();
            let both = exact_mean_extinction(&g, lambda, &Configuration::full(2))
                .unwrap()
                .expected_extinction
                .unwrap();
            assert!((one - (1.0 + lambda / 2.0)).abs() < 1e-9, "one={one} lambda={lambda}");
            assert!((both - (1.5 + lambda / 2.0)).abs() < 1e-9, "both={both} lambda={lambda}");
        }
    }

    #[test]
    fn pure_death_from_full_is_harmonic() {
        for (n, g) in [
            (4u32, complete(4)),
            (8, generate_random_regular(8, 3, 1).unwrap()),
            (12, generate_random_regular(12, 3, 2).unwrap()),
        ] {
            let r = exact_mean_extinction(&g, 0.0, &Configuration::full(n as usize)).unwrap();
            let h = harmonic(n as usize);
            assert!(
                (r.expected_extinction.unwrap() - h).abs() < 1e-9,
                "n={n}: {} vs {h}",
                r.expected_extinction.unwrap()
            );
        }
    }

    #[test]
    fn iterative_matches_direct_elimination() {
        for (g, lambda) in [
            (prism(), 2.5),
            (prism(), 0.8),
            (complete(4), 2.5),
            (generate_random_regular(8, 3, 3).unwrap(), 1.2),
        ] {
            let init = Configuration::full(g.vertex_count());
            let iterative =
                exact_mean_extinction(&g, lambda, &init).unwrap().expected_extinction.unwrap();
            let direct = exact_mean_extinction_direct(&g, lambda, &init).unwrap();
            assert!(
                (iterative - direct).abs() < 1e-7 * (1.0 + direct),
                "iterative {iterative} vs direct {direct}"
            );
        }
    }

    #[test]
    fn cap_exceeded_is_reported() {
        let g = generate_random_regular(16, 3, 4).unwrap();
        assert!(matches!(
            exact_mean_extinction(&g, 1.0, &Configuration::full(16)),
            Err(OracleError::StateSpaceCapExceeded { .. })
        ));
    }

    #[test]
    fn transient_at_zero_time_is_initial_indicator() {
        let g = complete(4);
        let init = Configuration::new(VertexSet::new(vec![1, 2]));
        let r = exact_transient(&g, 2.0, &init, 0.0).unwrap();
        assert_eq!(r.survival_probability, Some(1.0));
        assert_eq!(r.marginals.unwrap(), vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn lone_vertex_marginal_decays_exponentially() {
        let g = single_vertex();
        for t in [0.3, 0.7, 2.0] {
            let r = exact_transient(&g, 3.0, &Configuration::singleton(0), t).unwrap();
            let m = r.marginals.unwrap()[0];
            assert!((m - (-t).exp()).abs() < 1e-9, "t={t}: {m}");
            assert!((r.survival_probability.unwrap() - (-t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn k4_marginals_respect_symmetry() {
        let g = complete(4);
        let r = exact_transient(&g, 2.5, &Configuration::singleton(0), 1.0).unwrap();
        let m = r.marginals.unwrap();
        assert!((m[1] - m[2]).abs() < 1e-9);
        assert!((m[1] - m[3]).abs() < 1e-9);
        assert!(m[0] > 0.0 && m[0] < 1.0);
    }

    #[test]
    fn uniformization_stable_under_doubled_terms() {
        let g = prism();
        let init = Configuration::singleton(0);
        let base = exact_transient(&g, 2.5, &init, 1.0).unwrap();
        let forced = exact_transient_with(
            &g,
            2.5,
            &init,
            1.0,
            &OracleOptions { min_terms: base.terms * 2, ..OracleOptions::default() },
        )
        .unwrap();
        let d = (base.survival_probability.unwrap() - forced.survival_probability.unwrap()).abs();
        assert!(d < 1e-10, "doubling the term count moved the result by {d}");
    }

    #[test]
    fn survival_monotone_in_time_and_rate() {
        let g = prism();
        let init = Configuration::singleton(0);
        let mut last = 1.0f64;
        for t in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let s = exact_transient(&g, 1.5, &init, t).unwrap().survival_probability.unwrap();
            assert!(s <= last + 1e-9, "survival rose from {last} to {s} at t={t}");
            last = s;
        }
        let mut lastl = 0.0f64;
        for lambda in [0.0, 0.5, 1.0, 2.0, 3.0] {
            let s =
                exact_transient(&g, lambda, &init, 1.0).unwrap().survival_probability.unwrap();
            assert!(s + 1e-9 >= lastl, "survival fell from {lastl} to {s} at lambda={lambda}");
            lastl = s;
        }
    }

    #[test]
    fn hit_probability_of_everything_is_survival() {
        let g = complete(4);
        let init = Configuration::singleton(0);
        let everything = VertexSet::full(4);
        let hit = hit_probability(&g, 2.5, &init, &everything, 1.0).unwrap();
        let surv =
            exact_transient(&g, 2.5, &init, 1.0).unwrap().survival_probability.unwrap();
        assert!((hit - surv).abs() < 1e-12);
    }
}
