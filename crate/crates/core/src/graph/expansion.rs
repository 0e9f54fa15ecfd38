//! Edge expansion: min over nonempty S with |S| <= k of |E(S, S^c)| / |S|.
//!
//! Exact mode enumerates every subset up to the size cap, which is feasible
//! only at desk scale; the enumeration budget refuses anything larger.
//! Sampled mode evaluates random *connected* subsets (the natural candidates
//! for small boundary) and therefore reports an upper bound on the true
//! minimum.

use rand::Rng;

use super::{Adjacency, GraphError, VertexSet};
use crate::rng::{rng_from, substream};

/// Maximum number of subsets exact mode will enumerate.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ExpansionMode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ExpansionReport {
    pub k: usize,
    /// Boundary edge count of the witness.
    pub boundary: u64,
    /// Size of the witness set; `value = boundary / size`.
    pub size: u64,
    pub witness: VertexSet,
    pub mode: ExpansionMode,
}

impl ExpansionReport {
    pub fn value(&self) -> f64 {
        self.boundary as f64 / self.size as f64
    }
}

/// Boundary edge count |E(S, S^c)|; the checker used to validate witnesses.
pub fn boundary_edges(g: &Adjacency, s: &VertexSet) -> u64 {
    let mut marker = vec![false; g.vertex_count()];
    for v in s.iter() {
        marker[v as usize] = true;
    }
    let mut count = 0u64;
    for v in s.iter() {
        count += g.neighbors(v).iter().filter(|&&u| !marker[u as usize]).count() as u64;
    }
    count
}

pub fn edge_expansion(
    g: &Adjacency,
    k: usize,
    mode: ExpansionMode,
    samples: usize,
    seed: u64,
) -> Result<ExpansionReport, GraphError> {
    edge_expansion_with_budget(g, k, mode, samples, seed, DEFAULT_ENUMERATION_BUDGET)
}

pub fn edge_expansion_with_budget(
    g: &Adjacency,
    k: usize,
    mode: ExpansionMode,
    samples: usize,
    seed: u64,
    budget: u64,
) -> Result<ExpansionReport, GraphError> {
    let n = g.vertex_count();
    assert!(k >= 1 && k <= n, "size cap must lie in 1..=n");
    match mode {
        ExpansionMode::Exact => exact(g, k, budget),
        ExpansionMode::Sampled => Ok(sampled(g, k, samples, seed)),
    }
}

fn subsets_up_to(n: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    let mut c: u128 = 1;
    for s in 1..=k {
        c = c * (n - s + 1) as u128 / s as u128;
        total = total.saturating_add(c);
        if total > u128::from(u64::MAX) {
            break;
        }
    }
    total
}

fn exact(g: &Adjacency, k: usize, budget: u64) -> Result<ExpansionReport, GraphError> {
    let n = g.vertex_count();
    let needed = subsets_up_to(n, k);
    if needed > budget as u128 {
        return Err(GraphError::EnumerationBudgetExceeded { needed, budget });
    }
    let mut marker = vec![false; n];
    let mut best: Option<(u64, u64, Vec<u32>)> = None;
    let mut subset: Vec<u32> = Vec::with_capacity(k);
    for size in 1..=k {
        subset.clear();
        subset.extend(0..size as u32);
        loop {
            let b = boundary_of(g, &subset, &mut marker);
            let better = match &best {
                None => true,
                // Compare b/size < best.b/best.size by cross products.
                Some((bb, bs, _)) => b as u128 * u128::from(*bs) < u128::from(*bb) * size as u128,
            };
            if better {
                best = Some((b, size as u64, subset.clone()));
            }
            if !next_combination(&mut subset, n) {
                break;
            }
        }
    }
    let (boundary, size, witness) = best.expect("k >= 1 so at least singletons were scanned");
    Ok(ExpansionReport {
        k,
        boundary,
        size,
        witness: VertexSet::new(witness),
        mode: ExpansionMode::Exact,
    })
}

fn boundary_of(g: &Adjacency, subset: &[u32], marker: &mut [bool]) -> u64 {
    for &v in subset {
        marker[v as usize] = true;
    }
    let mut count = 0u64;
    for &v in subset {
        count += g.neighbors(v).iter().filter(|&&u| !marker[u as usize]).count() as u64;
    }
    for &v in subset {
        marker[v as usize] = false;
    }
    count
}

/// Advances `subset` to the next k-combination of 0..n in lexicographic
/// order; returns false after the last one.
fn next_combination(subset: &mut [u32], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < (n - k + i) as u32 {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn sampled(g: &Adjacency, k: usize, samples: usize, seed: u64) -> ExpansionReport {
    const TAG: u64 = 0x6578_7061_6e64;
    let n = g.vertex_count();
    let mut marker = vec![false; n];
    let mut best: Option<(u64, u64, Vec<u32>)> = None;
    let mut rng = rng_from(substream(seed, TAG, 0));
    for size in 1..=k {
        for _ in 0..samples.max(1) {
            if let Some(subset) = random_connected_subset(g, size, &mut rng, &mut marker) {
                let b = boundary_of(g, &subset, &mut marker);
                let better = match &best {
                    None => true,
                    Some((bb, bs, _)) => b as u128 * u128::from(*bs) < u128::from(*bb) * size as u128,
                };
                if better {
                    best = Some((b, size as u64, subset));
                }
            }
        }
    }
    let (boundary, size, witness) = best.expect("singleton subsets always exist");
    ExpansionReport {
        k,
        boundary,
        size,
        witness: VertexSet::new(witness),
        mode: ExpansionMode::Sampled,
    }
}

/// Grows a uniform-start random connected subset of the requested size;
/// None when the start component is too small.
fn random_connected_subset(
    g: &Adjacency,
    size: usize,
    rng: &mut impl Rng,
    marker: &mut [bool],
) -> Option<Vec<u32>> {
    let n = g.vertex_count();
    let start = rng.random_range(0..n) as u32;
    let mut subset = vec![start];
    marker[start as usize] = true;
    let mut frontier: Vec<u32> = g.neighbors(start).to_vec();
    while subset.len() < size {
        // Frontier may hold already-absorbed vertices; drop them lazily.
        let mut picked = None;
        while !frontier.is_empty() {
            let i = rng.random_range(0..frontier.len());
            let v = frontier.swap_remove(i);
            if !marker[v as usize] {
                picked = Some(v);
                break;
            }
        }
        match picked {
            Some(v) => {
                marker[v as usize] = true;
                subset.push(v);
                frontier.extend(g.neighbors(v).iter().copied().filter(|&u| !marker[u as usize]));
            }
            None => break,
        }
    }
    for &v in &subset {
        marker[v as usize] = false;
    }
    if subset.len() == size {
        Some(subset)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{complete, prism};
    use crate::graph::generate_random_regular;

    #[test]
    fn k4_singletons() {
        let g = complete(4);
        let r = edge_expansion(&g, 1, ExpansionMode::Exact, 0, 0).unwrap();
        assert_eq!((r.boundary, r.size), (3, 1));
        assert_eq!(r.value(), 3.0);
    }

    #[test]
    fn k4_pairs() {
        let g = complete(4);
        let r = edge_expansion(&g, 2, ExpansionMode::Exact, 0, 0).unwrap();
        assert_eq!((r.boundary, r.size), (4, 2), "any pair has 4 outgoing edges");
        assert_eq!(r.value(), 2.0);
    }

    #[test]
    fn prism_triangle_face_is_the_minimizer() {
        let g = prism();
        let r = edge_expansion(&g, 3, ExpansionMode::Exact, 0, 0).unwrap();
        assert_eq!(r.value(), 1.0);
        assert_eq!(r.size, 3);
        let w: Vec<u32> = r.witness.iter().collect();
        assert!(w == vec![0, 1, 2] || w == vec![3, 4, 5], "witness {w:?} should be a face");
        // Witness reproduces the reported value.
        assert_eq!(boundary_edges(&g, &r.witness), r.boundary);
    }

    #[test]
    fn budget_refusal() {
        let g = generate_random_regular(40, 3, 5).unwrap();
        let err = edge_expansion_with_budget(&g, 20, ExpansionMode::Exact, 0, 0, 1000).unwrap_err();
        assert!(matches!(err, GraphError::EnumerationBudgetExceeded { .. }));
    }

    #[test]
    fn sampled_upper_bounds_exact() {
        for seed in 0..8 {
            let g = generate_random_regular(14, 3, 200 + seed).unwrap();
            let exact = edge_expansion(&g, 4, ExpansionMode::Exact, 0, 0).unwrap();
            let sampled = edge_expansion(&g, 4, ExpansionMode::Sampled, 6, seed).unwrap();
            assert!(
                exact.value() <= sampled.value() + 1e-12,
                "exact {} > sampled {}",
                exact.value(),
                sampled.value()
            );
            assert_eq!(boundary_edges(&g, &sampled.witness), sampled.boundary);
        }
    }
}
