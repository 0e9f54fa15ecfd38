//! Severed and truncated regular trees.

use super::StructureError;
use crate::graph::Adjacency;

/// The severed tree: a root of degree 1 (all but one of its edges removed),
/// then a d-regular tree below it, cut at distance `depth` from the root.
/// Interior vertices have degree d; the root and the depth-`depth` vertices
/// have degree 1.
#[derive(Debug, Clone)]
pub struct DeltaTree {
    pub d: u32,
    pub depth: u32,
    pub root: u32,
    pub adj: Adjacency,
}

impl DeltaTree {
    /// 1 + ((d-1)^depth - 1) / (d-2), specializing to 2^depth at d = 3.
    pub fn expected_vertex_count(d: u32, depth: u32) -> u64 {
        let mut sum = 1u64; // the root
        let mut level = 1u64;
        for _ in 0..depth {
            sum += level;
            level *= u64::from(d - 1);
        }
        sum
    }
}

/// Builds the severed tree with breadth-first vertex numbering from the root.
pub fn build_delta(d: u32, depth: u32) -> Result<DeltaTree, StructureError> {
    if d < 3 {
        return Err(StructureError::DegreeTooSmall(d));
    }
    if depth == 0 {
        return Err(StructureError::DepthZero);
    }
    let mut edges = Vec::new();
    let mut next = 1u32;
    // Root keeps a single child; every interior vertex below it has d-1
    // children.
    let mut level = vec![0u32];
    for dist in 0..depth {
        let mut next_level = Vec::new();
        for &v in &level {
            let children = if dist == 0 { 1 } else { (d - 1) as usize };
            for _ in 0..children {
                edges.push((v, next));
                next_level.push(next);
                next += 1;
            }
        }
        level = next_level;
    }
    let adj = Adjacency::from_edges(next, &edges).expect("tree construction is simple");
    Ok(DeltaTree { d, depth, root: 0, adj })
}

/// A d-regular tree truncated at `depth`: the root has d children, interior
/// vertices d-1 children, and the depth-`depth` leaves degree 1.
#[derive(Debug, Clone)]
pub struct TruncatedTree {
    pub d: u32,
    pub depth: u32,
    pub root: u32,
    pub leaves: Vec<u32>,
    pub adj: Adjacency,
}

pub fn truncated_regular_tree(d: u32, depth: u32) -> TruncatedTree {
    assert!(d >= 3, "degree must be at least 3");
    let mut edges = Vec::new();
    let mut next = 1u32;
    let mut level = vec![0u32];
    for dist in 0..depth {
        let mut next_level = Vec::new();
        for &v in &level {
            let children = if dist == 0 { d as usize } else { (d - 1) as usize };
            for _ in 0..children {
                edges.push((v, next));
                next_level.push(next);
                next += 1;
            }
        }
        level = next_level;
    }
    let adj = Adjacency::from_edges(next.max(1), &edges).expect("tree construction is simple");
    TruncatedTree { d, depth, root: 0, leaves: level, adj }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::neighborhood_ball;

    #[test]
    fn smallest_severed_tree_is_an_edge() {
        let t = build_delta(3, 1).unwrap();
        assert_eq!(t.adj.vertex_count(), 2);
        assert_eq!(t.adj.edge_count(), 1);
    }

    #[test]
    fn severed_tree_examples() {
        let t = build_delta(3, 2).unwrap();
        assert_eq!(t.adj.vertex_count(), 4);
        let mut degrees: Vec<usize> = (0..4).map(|v| t.adj.degree(v)).collect();
        degrees.sort_unstable();
        assert_eq!(degrees, vec![1, 1, 1, 3]);

        let t = build_delta(4, 2).unwrap();
        assert_eq!(t.adj.vertex_count(), 5, "1 + (3^2 - 1)/2");
    }

    #[test]
    fn severed_tree_invariants_across_parameters() {
        for d in 3..=5u32 {
            for depth in 1..=6u32 {
                let t = build_delta(d, depth).unwrap();
                let n = t.adj.vertex_count() as u64;
                assert_eq!(n, DeltaTree::expected_vertex_count(d, depth));
                assert_eq!(t.adj.edge_count() as u64, n - 1, "a tree has n-1 edges");
                assert!(t.adj.is_connected());
                let dist = t.adj.distances_from(t.root);
                for v in 0..t.adj.vertex_count() as u32 {
                    let deg = t.adj.degree(v) as u32;
                    if v == t.root || dist[v as usize] == depth {
                        assert_eq!(deg, 1, "root and deepest vertices have degree 1");
                    } else {
                        assert_eq!(deg, d);
                    }
                }
            }
        }
    }

    #[test]
    fn severed_tree_ball_from_root_is_everything() {
        let t = build_delta(3, 4).unwrap();
        let (ball, is_tree) = neighborhood_ball(&t.adj, t.root, 4);
        assert_eq!(ball.len(), t.adj.vertex_count());
        assert!(is_tree);
    }

    #[test]
    fn bad_parameters_rejected() {
        assert_eq!(build_delta(2, 3).unwrap_err(), StructureError::DegreeTooSmall(2));
        assert_eq!(build_delta(3, 0).unwrap_err(), StructureError::DepthZero);
    }

    #[test]
    fn truncated_tree_shape() {
        let t = truncated_regular_tree(3, 3);
        // 1 + 3 + 6 + 12
        assert_eq!(t.adj.vertex_count(), 22);
        assert_eq!(t.adj.degree(t.root), 3);
        assert_eq!(t.leaves.len(), 12);
        for &l in &t.leaves {
            assert_eq!(t.adj.degree(l), 1);
        }
        let dist = t.adj.distances_from(t.root);
        assert_eq!(*dist.iter().max().unwrap(), 3);
    }
}
