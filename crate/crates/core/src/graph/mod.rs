//! Random d-regular graphs and structural queries.

mod expansion;
mod generate;
pub mod fixtures;
pub mod io;

pub use expansion::{
    boundary_edges, edge_expansion, edge_expansion_with_budget, ExpansionMode, ExpansionReport,
    DEFAULT_ENUMERATION_BUDGET,
};
pub use generate::{
    generate_random_regular, generate_random_regular_with_budget, DEFAULT_ATTEMPT_BUDGET,
};

use std::collections::VecDeque;
use std::ops::Deref;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("parity violation: n*d = {n}*{d} is odd, no {d}-regular graph on {n} vertices exists")]
    ParityViolation { n: u32, d: u32 },
    #[error("invalid parameters: need n > d >= {min_d}, got n = {n}, d = {d}")]
    InvalidParameters { n: u32, d: u32, min_d: u32 },
    #[error("attempt budget exhausted after {attempts} pairings without a simple connected outcome")]
    AttemptBudgetExhausted { attempts: u64 },
    #[error("edge ({u}, {v}) out of range for n = {n}")]
    EdgeOutOfRange { u: u32, v: u32, n: u32 },
    #[error("self-loop at vertex {v}")]
    SelfLoop { v: u32 },
    #[error("repeated edge ({u}, {v})")]
    RepeatedEdge { u: u32, v: u32 },
    #[error("vertex {v} has degree {got}, expected {want}")]
    NotRegular { v: u32, got: u32, want: u32 },
    #[error("vertex {v} out of range for n = {n}")]
    VertexOutOfRange { v: u32, n: u32 },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("exact enumeration needs {needed} subsets, budget is {budget}")]
    EnumerationBudgetExceeded { needed: u128, budget: u64 },
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Immutable simple undirected graph in compressed adjacency form.
///
/// Neighbor lists are sorted, which both fixes iteration order and gives a
/// dense numbering of the directed edges: the pair `(u, neighbors(u)[i])`
/// has directed-edge id `offset(u) + i`. The event engine relies on that
/// numbering for O(1) boundary-edge bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<u32>,
    list: Vec<u32>,
}

impl Adjacency {
    /// Builds from per-vertex neighbor lists, validating simplicity and
    /// symmetry. Lists may arrive unsorted.
    pub fn from_lists(mut lists: Vec<Vec<u32>>) -> Result<Self, GraphError> {
        let n = lists.len() as u32;
        for (v, l) in lists.iter_mut().enumerate() {
            l.sort_unstable();
            let v = v as u32;
            for (i, &u) in l.iter().enumerate() {
                if u >= n {
                    return Err(GraphError::VertexOutOfRange { v: u, n });
                }
                if u == v {
                    return Err(GraphError::SelfLoop { v });
                }
                if i > 0 && l[i - 1] == u {
                    return Err(GraphError::RepeatedEdge { u: v.min(u), v: v.max(u) });
                }
            }
        }
        // Symmetry: u lists v iff v lists u.
        for (v, l) in lists.iter().enumerate() {
            for &u in l {
                if lists[u as usize].binary_search(&(v as u32)).is_err() {
                    return Err(GraphError::RepeatedEdge { u: v.min(u as usize) as u32, v: v.max(u as usize) as u32 });
                }
            }
        }
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut list = Vec::new();
        offsets.push(0);
        for l in &lists {
            list.extend_from_slice(l);
            offsets.push(list.len() as u32);
        }
        Ok(Adjacency { offsets, list })
    }

    /// Builds from an undirected edge list.
    pub fn from_edges(n: u32, edges: &[(u32, u32)]) -> Result<Self, GraphError> {
        let mut lists = vec![Vec::new(); n as usize];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::EdgeOutOfRange { u, v, n });
            }
            lists[u as usize].push(v);
            lists[v as usize].push(u);
        }
        Self::from_lists(lists)
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.list[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }

    #[inline]
    pub fn degree(&self, v: u32) -> usize {
        self.neighbors(v).len()
    }

    pub fn edge_count(&self) -> usize {
        self.list.len() / 2
    }

    /// Number of directed edges (twice the edge count).
    #[inline]
    pub fn directed_edge_count(&self) -> usize {
        self.list.len()
    }

    #[inline]
    pub(crate) fn edge_offset(&self, v: u32) -> u32 {
        self.offsets[v as usize]
    }

    /// Decodes a directed edge id into (source, target).
    #[inline]
    pub(crate) fn directed_edge(&self, id: u32) -> (u32, u32) {
        let src = match self.offsets.binary_search(&id) {
            Ok(mut i) => {
                // Skip any degree-0 vertices sharing the same offset.
                while self.offsets[i + 1] == id {
                    i += 1;
                }
                i
            }
            Err(i) => i - 1,
        } as u32;
        (src, self.list[id as usize])
    }

    /// Directed id of the edge `u -> v`; `v` must be a neighbor of `u`.
    #[inline]
    pub(crate) fn directed_id(&self, u: u32, v: u32) -> u32 {
        let nbrs = self.neighbors(u);
        // Neighbor lists are short; a linear scan beats binary search here.
        for (i, &w) in nbrs.iter().enumerate() {
            if w == v {
                return self.offsets[u as usize] + i as u32;
            }
        }
        unreachable!("({u}, {v}) is not an edge")
    }

    /// BFS distances from `v`; unreachable vertices get `u32::MAX`.
    pub fn distances_from(&self, v: u32) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[v as usize] = 0;
        queue.push_back(v);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &w in self.neighbors(u) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count() == 0 {
            return true;
        }
        self.distances_from(0).iter().all(|&d| d != u32::MAX)
    }
}

/// A set of vertex ids, stored sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct VertexSet {
    members: Vec<u32>,
}

impl VertexSet {
    pub fn new(mut members: Vec<u32>) -> Self {
        members.sort_unstable();
        members.dedup();
        VertexSet { members }
    }

    pub fn empty() -> Self {
        VertexSet { members: Vec::new() }
    }

    pub fn singleton(v: u32) -> Self {
        VertexSet { members: vec![v] }
    }

    pub fn full(n: usize) -> Self {
        VertexSet { members: (0..n as u32).collect() }
    }

    /// Uniform random subset of size `k` from `0..n`.
    pub fn random(n: usize, k: usize, rng: &mut impl rand::Rng) -> Self {
        let picked = rand::seq::index::sample(rng, n, k);
        Self::new(picked.iter().map(|i| i as u32).collect())
    }

    /// Uniform random k-subset of an explicit candidate pool.
    pub fn random_from_pool(pool: &[u32], k: usize, rng: &mut impl rand::Rng) -> Self {
        let picked = rand::seq::index::sample(rng, pool.len(), k);
        Self::new(picked.iter().map(|i| pool[i]).collect())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.members.iter().copied()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.members
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut v = self.members.clone();
        v.extend_from_slice(&other.members);
        VertexSet::new(v)
    }

    pub fn max_id(&self) -> Option<u32> {
        self.members.last().copied()
    }
}

/// A simple connected-or-not d-regular graph.
///
/// Construction validates regularity on top of the [`Adjacency`] simplicity
/// checks; `generator_attempts` records how many pairings the generator
/// rejected before this one (1 for directly constructed graphs).
#[derive(Debug, Clone)]
pub struct Graph {
    adj: Adjacency,
    d: u32,
    connected: bool,
    generator_attempts: u64,
}

impl Graph {
    pub fn from_edges(n: u32, d: u32, edges: &[(u32, u32)]) -> Result<Self, GraphError> {
        let adj = Adjacency::from_edges(n, edges)?;
        Self::from_adjacency(adj, d)
    }

    pub fn from_adjacency(adj: Adjacency, d: u32) -> Result<Self, GraphError> {
        for v in 0..adj.vertex_count() as u32 {
            let got = adj.degree(v) as u32;
            if got != d {
                return Err(GraphError::NotRegular { v, got, want: d });
            }
        }
        let connected = adj.is_connected();
        Ok(Graph { adj, d, connected, generator_attempts: 1 })
    }

    pub(crate) fn with_attempts(mut self, attempts: u64) -> Self {
        self.generator_attempts = attempts;
        self
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.adj.vertex_count() as u32
    }

    #[inline]
    pub fn d(&self) -> u32 {
        self.d
    }

    #[inline]
    pub fn connected(&self) -> bool {
        self.connected
    }

    #[inline]
    pub fn generator_attempts(&self) -> u64 {
        self.generator_attempts
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adj
    }
}

impl Deref for Graph {
    type Target = Adjacency;

    fn deref(&self) -> &Adjacency {
        &self.adj
    }
}

/// Ball of radius `r` around `v` plus whether its induced subgraph is a tree.
///
/// The ball is connected by construction, so it is a tree exactly when the
/// induced edge count is one less than the vertex count.
pub fn neighborhood_ball(g: &Adjacency, v: u32, r: u32) -> (VertexSet, bool) {
    assert!((v as usize) < g.vertex_count(), "vertex out of range");
    let mut dist = std::collections::HashMap::new();
    let mut order = vec![v];
    dist.insert(v, 0u32);
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        let du = dist[&u];
        if du == r {
            continue;
        }
        for &w in g.neighbors(u) {
            dist.entry(w).or_insert_with(|| {
                order.push(w);
                du + 1
            });
        }
    }
    let mut induced_edges = 0usize;
    for &u in &order {
        for &w in g.neighbors(u) {
            if w > u && dist.contains_key(&w) {
                induced_edges += 1;
            }
        }
    }
    let is_tree = induced_edges == order.len() - 1;
    (VertexSet::new(order), is_tree)
}

/// Number of vertices whose r-ball induces a tree.
pub fn tree_like_census(g: &Adjacency, r: u32) -> usize {
    (0..g.vertex_count() as u32)
        .filter(|&v| neighborhood_ball(g, v, r).1)
        .count()
}

/// Exact diameter by BFS from every vertex. Errors on disconnected input.
pub fn diameter(g: &Adjacency) -> Result<u32, GraphError> {
    use rayon::prelude::*;
    let n = g.vertex_count();
    if n == 0 {
        return Ok(0);
    }
    let per_source: Result<Vec<u32>, GraphError> = (0..n as u32)
        .into_par_iter()
        .map(|v| {
            let dist = g.distances_from(v);
            let m = *dist.iter().max().unwrap();
            if m == u32::MAX {
                Err(GraphError::Disconnected)
            } else {
                Ok(m)
            }
        })
        .collect();
    Ok(per_source?.into_iter().max().unwrap())
}
