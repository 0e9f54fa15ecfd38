//! Uniform random d-regular graphs via the pairing model with rejection.
//!
//! Each attempt draws a uniform perfect matching on the n*d half-edges
//! (vertex v owns stubs v*d .. (v+1)*d) by shuffling the stub list and pairing
//! consecutive entries. Conditioned on producing no loop and no repeated
//! edge, the matching induces a uniform simple d-regular graph, so rejecting
//! bad pairings outright preserves exact uniformity. Disconnected outcomes
//! are rejected as well, which keeps the output uniform over *connected*
//! simple d-regular graphs; the attempt count is recorded so improbable
//! parameter regimes are visible to the caller.

use rand::seq::SliceRandom;

use super::{Adjacency, Graph, GraphError};
use crate::rng::rng_from;

/// Rejection attempts allowed before giving up. Acceptance probability for
/// small fixed d is bounded away from zero, so hitting this signals a
/// parameter regime the pairing model is unsuited for.
pub const DEFAULT_ATTEMPT_BUDGET: u64 = 100_000;

pub fn generate_random_regular(n: u32, d: u32, seed: u64) -> Result<Graph, GraphError> {
    generate_random_regular_with_budget(n, d, seed, DEFAULT_ATTEMPT_BUDGET)
}

pub fn generate_random_regular_with_budget(
    n: u32,
    d: u32,
    seed: u64,
    budget: u64,
) -> Result<Graph, GraphError> {
    if d < 3 || n <= d {
        return Err(GraphError::InvalidParameters { n, d, min_d: 3 });
    }
    if (n as u64 * d as u64) % 2 == 1 {
        return Err(GraphError::ParityViolation { n, d });
    }
    let mut rng = rng_from(seed);
    let mut stubs: Vec<u32> = (0..n * d).collect();
    let mut attempts = 0u64;
    while attempts < budget {
        attempts += 1;
        stubs.shuffle(&mut rng);
        if let Some(adj) = pairing_to_simple(n, d, &stubs) {
            if adj.is_connected() {
                let g = Graph::from_adjacency(adj, d)?;
                return Ok(g.with_attempts(attempts));
            }
        }
    }
    Err(GraphError::AttemptBudgetExhausted { attempts })
}

/// Builds the multigraph induced by the pairing and returns it only when it
/// is simple.
fn pairing_to_simple(n: u32, d: u32, stubs: &[u32]) -> Option<Adjacency> {
    let mut lists: Vec<Vec<u32>> = vec![Vec::with_capacity(d as usize); n as usize];
    for pair in stubs.chunks_exact(2) {
        let u = pair[0] / d;
        let v = pair[1] / d;
        if u == v {
            return None;
        }
        lists[u as usize].push(v);
        lists[v as usize].push(u);
    }
    for l in &mut lists {
        l.sort_unstable();
        if l.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
    }
    Adjacency::from_lists(lists).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tree_like_census;
    use crate::stats::chi_square_pvalue;

    #[test]
    fn unique_cubic_graph_on_four_vertices_is_k4() {
        for seed in 0..20 {
            let g = generate_random_regular(4, 3, seed).unwrap();
            assert_eq!(g.edge_count(), 6);
            for v in 0..4 {
                assert_eq!(g.neighbors(v).len(), 3);
            }
            assert!(g.generator_attempts() >= 1);
        }
    }

    #[test]
    fn parity_violation_detected() {
        assert_eq!(
            generate_random_regular(5, 3, 1).unwrap_err(),
            GraphError::ParityViolation { n: 5, d: 3 }
        );
    }

    #[test]
    fn order_must_exceed_degree() {
        assert!(matches!(
            generate_random_regular(3, 3, 1),
            Err(GraphError::InvalidParameters { .. })
        ));
        assert!(matches!(
            generate_random_regular(10, 2, 1),
            Err(GraphError::InvalidParameters { .. })
        ));
    }

    #[test]
    fn budget_exhaustion_reports_attempts() {
        // Budget zero forces the failure path.
        assert_eq!(
            generate_random_regular_with_budget(8, 3, 1, 0).unwrap_err(),
            GraphError::AttemptBudgetExhausted { attempts: 0 }
        );
    }

    #[test]
    fn outputs_satisfy_all_graph_invariants() {
        for seed in 0..30 {
            let g = generate_random_regular(24, 3, seed).unwrap();
            assert!(g.connected());
            assert_eq!(g.n(), 24);
            // from_adjacency already validated simplicity/regularity; spot
            // check symmetry anyway.
            for v in 0..g.n() {
                for &u in g.neighbors(v) {
                    assert!(g.neighbors(u).contains(&v));
                }
            }
        }
    }

    #[test]
    fn six_vertex_cubic_classes_fit_six_to_one() {
        // The 70 labeled cubic graphs on 6 vertices split 60 prisms to 10
        // copies of K33; prisms contain a triangle, K33 does not.
        let draws = 3000;
        let mut prisms = 0u64;
        for seed in 0..draws {
            let g = generate_random_regular(6, 3, 1000 + seed).unwrap();
            if tree_like_census(&g, 1) == 0 {
                prisms += 1;
            } else {
                assert_eq!(tree_like_census(&g, 1), 6, "only two cubic classes exist on 6 vertices");
            }
        }
        let k33 = draws - prisms;
        let expected = [60.0 / 70.0 * draws as f64, 10.0 / 70.0 * draws as f64];
        let (_, p) = chi_square_pvalue(&[prisms, k33], &expected);
        assert!(p > 0.001, "prisms = {prisms}, k33 = {k33}, p = {p}");
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = generate_random_regular(30, 3, 99).unwrap();
        let b = generate_random_regular(30, 3, 99).unwrap();
        assert_eq!(a.adjacency(), b.adjacency());
        assert_eq!(a.generator_attempts(), b.generator_attempts());
    }
}
