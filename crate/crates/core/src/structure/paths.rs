//! Vertex-disjoint short path systems between two vertex sets.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::graph::{Adjacency, VertexSet};

/// A system of vertex-disjoint paths, each with one endpoint in the source
/// set and one in the target set, none longer than `max_length` edges.
/// Length-0 paths (a single vertex in both sets) are allowed.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PathSet {
    pub paths: Vec<Vec<u32>>,
    pub max_length: usize,
}

impl PathSet {
    pub fn count(&self) -> usize {
        self.paths.len()
    }

    /// CSV with header `path,length,vertices`, one row per path; vertices are
    /// space-separated within the row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("path,length,vertices\n");
        for (i, p) in self.paths.iter().enumerate() {
            let verts: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{},{},{}", i, p.len() - 1, verts.join(" ")).unwrap();
        }
        out
    }
}

/// Greedy maximal system: repeatedly takes a shortest source-target path in
/// the residual graph (vertices of accepted paths removed), accepting while
/// the length stays within `max_length`. Deterministic: BFS explores sorted
/// adjacency from sources in id order and ties break toward the lowest
/// target id.
pub fn disjoint_short_paths(
    g: &Adjacency,
    sources: &VertexSet,
    targets: &VertexSet,
    max_length: usize,
) -> PathSet {
    let n = g.vertex_count();
    let mut removed = vec![false; n];
    let mut is_target = vec![false; n];
    for v in targets.iter() {
        is_target[v as usize] = true;
    }
    let mut paths = Vec::new();
    let mut dist = vec![u32::MAX; n];
    let mut parent = vec![u32::MAX; n];
    loop {
        dist.iter_mut().for_each(|d| *d = u32::MAX);
        let mut queue = VecDeque::new();
        for v in sources.iter() {
            if !removed[v as usize] {
                dist[v as usize] = 0;
                parent[v as usize] = v;
                queue.push_back(v);
            }
        }
        // Shortest reachable live target, lowest id among equals.
        let mut best: Option<(u32, u32)> = None;
        'bfs: while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            if let Some((bd, _)) = best {
                // Finish the layer that produced the best target so the
                // lowest-id tie wins, then stop.
                if du > bd {
                    break 'bfs;
                }
            }
            if is_target[u as usize] {
                best = match best {
                    Some((bd, bv)) if (bd, bv) <= (du, u) => best,
                    _ => Some((du, u)),
                };
                continue;
            }
            if du as usize >= max_length {
                continue;
            }
            for &w in g.neighbors(u) {
                if !removed[w as usize] && dist[w as usize] == u32::MAX {
                    dist[w as usize] = du + 1;
                    parent[w as usize] = u;
                    queue.push_back(w);
                }
            }
        }
        let Some((d, target)) = best else { break };
        debug_assert!(d as usize <= max_length);
        let mut path = vec![target];
        let mut at = target;
        while parent[at as usize] != at {
            at = parent[at as usize];
            path.push(at);
        }
        path.reverse();
        for &v in &path {
            removed[v as usize] = true;
        }
        paths.push(path);
    }
    let set = PathSet { paths, max_length };
    assert!(
        verify_path_set(g, sources, targets, max_length, &set),
        "constructed path system failed independent verification"
    );
    set
}

/// Independent checker for the path-system invariants: adjacency along each
/// path, endpoints in the respective sets, length bound, and global vertex
/// disjointness.
pub fn verify_path_set(
    g: &Adjacency,
    sources: &VertexSet,
    targets: &VertexSet,
    max_length: usize,
    set: &PathSet,
) -> bool {
    let mut seen = vec![false; g.vertex_count()];
    for p in &set.paths {
        if p.is_empty() || p.len() - 1 > max_length {
            return false;
        }
        if !sources.contains(p[0]) || !targets.contains(*p.last().unwrap()) {
            return false;
        }
        for w in p.windows(2) {
            if !g.neighbors(w[0]).contains(&w[1]) {
                return false;
            }
        }
        for &v in p {
            if seen[v as usize] {
                return false;
            }
            seen[v as usize] = true;
        }
    }
    true
}
