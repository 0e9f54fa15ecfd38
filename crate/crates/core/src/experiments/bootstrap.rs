//! The regrowth step: starting from a random set of epsilon * n infected
//! vertices, does the population hold its ground over a fixed horizon? Each
//! replica also reports the structural pipeline behind the guarantee: how
//! many seeds were admissible at depth 2M, how many were black, and how many
//! vertex-disjoint severed-tree copies their free branches supplied.

use rayon::prelude::*;

use super::ExperimentError;
use crate::engine::{Configuration, Process};
use crate::graph::{Graph, VertexSet};
use crate::rng::{rng_from, substream};
use crate::stats::binomial_se;
use crate::structure::{classify_black_white, Color, DeltaTree};

const TAG_SET: u64 = 0x626f_6f74_5f75;
const TAG_RUN: u64 = 0x626f_6f74_5f70;

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct BootstrapRow {
    pub replica: usize,
    /// Members whose depth-2M ball is a tree.
    pub admissible: usize,
    pub black: usize,
    /// Vertex-disjoint severed-tree copies extracted from free branches.
    pub copies: usize,
    pub final_size: usize,
    pub success: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct BootstrapReport {
    pub epsilon: f64,
    pub set_size: usize,
    pub branch_depth: u32,
    pub horizon: f64,
    pub cap: u32,
    pub replicas: usize,
    /// Estimate of P{final size >= initial size}.
    pub success_rate: f64,
    pub se: f64,
    pub rows: Vec<BootstrapRow>,
    pub min_copies: usize,
    pub mean_copies: f64,
    /// True iff every extracted copy system was pairwise vertex-disjoint
    /// with the expected severed-tree size.
    pub copies_all_disjoint: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn bootstrap_step(
    g: &Graph,
    lambda: f64,
    epsilon: f64,
    branch_depth: u32,
    horizon: f64,
    cap: u32,
    replicas: usize,
    seed: u64,
) -> Result<BootstrapReport, ExperimentError> {
    if replicas < 2 {
        return Err(ExperimentError::TooFewReplicas { need: 2, got: replicas });
    }
    let n = g.n();
    let set_size = (epsilon * f64::from(n)).floor() as usize;
    if set_size == 0 {
        return Err(ExperimentError::EpsilonTooSmall { epsilon, n });
    }
    let rows: Result<Vec<BootstrapRow>, ExperimentError> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut set_rng = rng_from(substream(seed, TAG_SET, r as u64));
            let members = VertexSet::random(n as usize, set_size, &mut set_rng);
            let coloring = classify_black_white(g, &members, 2 * branch_depth)
                .map_err(crate::engine::EngineError::from)?;
            let admissible = coloring.black + coloring.white;
            let (copies, disjoint) = severed_copies(g, &coloring.colors, branch_depth);
            let init = Configuration::new(members);
            let mut p =
                Process::new(g.adjacency(), lambda, &init, substream(seed, TAG_RUN, r as u64))?;
            p.run_until(horizon);
            let final_size = p.count();
            Ok(BootstrapRow {
                replica: r,
                admissible,
                black: coloring.black,
                copies: if disjoint { copies } else { 0 },
                final_size,
                success: final_size >= set_size,
            })
        })
        .collect();
    let rows = rows?;
    let successes = rows.iter().filter(|r| r.success).count();
    let success_rate = successes as f64 / replicas as f64;
    let min_copies = rows.iter().map(|r| r.copies).min().unwrap_or(0);
    let mean_copies = rows.iter().map(|r| r.copies as f64).sum::<f64>() / replicas as f64;
    let copies_all_disjoint = rows.iter().all(|r| r.copies == r.black);
    Ok(BootstrapReport {
        epsilon,
        set_size,
        branch_depth,
        horizon,
        cap,
        replicas,
        success_rate,
        se: binomial_se(success_rate, replicas),
        rows,
        min_copies,
        mean_copies,
        copies_all_disjoint,
    })
}

/// For every black vertex, walks depth `m` into its free branch (chosen at
/// classification time inside the tree 2m-ball) and collects the vertex plus
/// that branch segment: a severed-tree copy rooted at the black vertex.
/// Returns the copy count and whether all copies were pairwise disjoint with
/// the expected size — which the tree-ball geometry guarantees, so a false
/// here means a bug upstream.
fn severed_copies(
    g: &Graph,
    colors: &[crate::structure::VertexColor],
    m: u32,
) -> (usize, bool) {
    let mut used = vec![false; g.vertex_count()];
    let expected = DeltaTree::expected_vertex_count(g.d(), m) as usize;
    let mut copies = 0usize;
    let mut all_ok = true;
    for c in colors.iter().filter(|c| c.color == Color::Black) {
        let root = c.vertex;
        let branch = c.free_branch.expect("black vertices carry a free branch");
        // BFS inside the branch, never crossing the root, to depth m - 1
        // from the branch head (distance m from the root).
        let mut copy = vec![root, branch];
        let mut frontier = vec![branch];
        for _ in 1..m {
            let mut next = Vec::new();
            for &v in &frontier {
                for &w in g.neighbors(v) {
                    if w != root && !copy.contains(&w) {
                        copy.push(w);
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        if copy.len() != expected {
            all_ok = false;
        }
        for &v in &copy {
            if used[v as usize] {
                all_ok = false;
            }
            used[v as usize] = true;
        }
        copies += 1;
    }
    (copies, all_ok)
}
