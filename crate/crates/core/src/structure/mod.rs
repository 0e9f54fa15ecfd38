//! Combinatorial constructions on vertex sets: black/white coloring by free
//! branches, grey closures, severed trees, and vertex-disjoint short paths.

mod delta;
mod paths;

pub use delta::{build_delta, truncated_regular_tree, DeltaTree, TruncatedTree};
pub use paths::{disjoint_short_paths, verify_path_set, PathSet};

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Adjacency, Graph, VertexSet};

#[derive(Debug, Error, PartialEq)]
pub enum StructureError {
    #[error("depth must be at least 1")]
    DepthZero,
    #[error("degree must be at least 3, got {0}")]
    DegreeTooSmall(u32),
    #[error("vertex {0} has a non-tree ball, closure is undefined")]
    InadmissibleVertex(u32),
    #[error("vertex {v} out of range for n = {n}")]
    VertexOutOfRange { v: u32, n: u32 },
}

/// Color assigned to a member of the distinguished set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Color {
    /// At least one depth-M branch is free of other members.
    Black,
    /// Every branch contains another member.
    White,
    /// The M-ball is not a tree; excluded from the black/white counts.
    Inadmissible,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct VertexColor {
    pub vertex: u32,
    pub color: Color,
    /// Root (the neighbor adjacent to `vertex`) of the lowest-id free branch,
    /// for black vertices.
    pub free_branch: Option<u32>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ColoringReport {
    pub colors: Vec<VertexColor>,
    pub black: usize,
    pub white: usize,
    pub inadmissible: usize,
    pub depth: u32,
    /// d + d(d-1) + ... + d(d-1)^{M-1}: the number of vertices in a full
    /// depth-M tree ball beyond its center.
    pub branch_bound: u64,
}

impl ColoringReport {
    /// CSV with header `vertex,color,free_branch`, one row per member.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex,color,free_branch\n");
        for c in &self.colors {
            let color = match c.color {
                Color::Black => "black",
                Color::White => "white",
                Color::Inadmissible => "inadmissible",
            };
            let fb = c.free_branch.map(|b| b.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{}", c.vertex, color, fb).unwrap();
        }
        out
    }
}

/// Ball size bound N_M = d + d(d-1) + ... + d(d-1)^{M-1}.
pub fn branch_bound(d: u32, m: u32) -> u64 {
    let mut total = 0u64;
    let mut level = u64::from(d);
    for _ in 0..m {
        total += level;
        level *= u64::from(d - 1);
    }
    total
}

/// BFS ball of radius `r` around `v` with parent links and, for each non-center
/// vertex, the branch (neighbor of `v`) through which it was first reached.
/// Branch labels are meaningful only when the ball is a tree, which is exactly
/// when they partition the ball minus the center into the components.
struct BranchBall {
    /// (vertex, parent index in `order`, branch root) in BFS order; the
    /// center sits at index 0 with itself as branch root.
    order: Vec<(u32, usize, u32)>,
    index: HashMap<u32, usize>,
    is_tree: bool,
}

fn branch_ball(g: &Adjacency, v: u32, r: u32) -> BranchBall {
    let mut order = vec![(v, 0usize, v)];
    let mut depth = vec![0u32];
    let mut index = HashMap::new();
    index.insert(v, 0usize);
    let mut head = 0;
    while head < order.len() {
        let (u, _, branch) = order[head];
        let du = depth[head];
        if du < r {
            for &w in g.neighbors(u) {
                if let std::collections::hash_map::Entry::Vacant(slot) = index.entry(w) {
                    slot.insert(order.len());
                    let b = if head == 0 { w } else { branch };
                    order.push((w, head, b));
                    depth.push(du + 1);
                }
            }
        }
        head += 1;
    }
    let mut induced_edges = 0usize;
    for &(u, _, _) in &order {
        for &w in g.neighbors(u) {
            if w > u && index.contains_key(&w) {
                induced_edges += 1;
            }
        }
    }
    BranchBall { is_tree: induced_edges == order.len() - 1, order, index }
}

/// Colors each member of `members` by whether it owns a free branch of depth
/// `m`: the components of its tree m-ball minus the center are examined, and
/// the vertex is black when at least one contains no other member. Vertices
/// with non-tree m-balls are labeled inadmissible and excluded from the
/// black/white counts.
pub fn classify_black_white(
    g: &Graph,
    members: &VertexSet,
    m: u32,
) -> Result<ColoringReport, StructureError> {
    if m == 0 {
        return Err(StructureError::DepthZero);
    }
    if let Some(v) = members.max_id() {
        if v >= g.n() {
            return Err(StructureError::VertexOutOfRange { v, n: g.n() });
        }
    }
    let mut colors = Vec::with_capacity(members.len());
    let (mut black, mut white, mut inadmissible) = (0, 0, 0);
    for v in members.iter() {
        let ball = branch_ball(g, v, m);
        if !ball.is_tree {
            inadmissible += 1;
            colors.push(VertexColor { vertex: v, color: Color::Inadmissible, free_branch: None });
            continue;
        }
        // Occupied branch roots: branches holding some other member.
        let mut occupied: Vec<u32> = ball
            .order
            .iter()
            .skip(1)
            .filter(|(w, _, _)| members.contains(*w))
            .map(|&(_, _, b)| b)
            .collect();
        occupied.sort_unstable();
        occupied.dedup();
        let free = g.neighbors(v).iter().copied().find(|b| occupied.binary_search(b).is_err());
        match free {
            Some(b) => {
                black += 1;
                colors.push(VertexColor { vertex: v, color: Color::Black, free_branch: Some(b) });
            }
            None => {
                white += 1;
                colors.push(VertexColor { vertex: v, color: Color::White, free_branch: None });
            }
        }
    }
    Ok(ColoringReport {
        colors,
        black,
        white,
        inadmissible,
        depth: m,
        branch_bound: branch_bound(g.d(), m),
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GreyClosure {
    /// The closure: members plus every geodesic interior added below.
    pub closure: VertexSet,
    /// Number of added (grey) vertices, |closure| - |members|.
    pub grey: usize,
    pub white: usize,
}

/// Closes `members` under geodesics from white vertices: for every white
/// vertex v and every other member x inside v's depth-`m` ball, all vertices
/// on the (unique, since the ball is a tree) geodesic between v and x join
/// the closure. Requires every member's m-ball to be a tree.
pub fn grey_closure(
    g: &Graph,
    members: &VertexSet,
    m: u32,
) -> Result<GreyClosure, StructureError> {
    let coloring = classify_black_white(g, members, m)?;
    if let Some(c) = coloring.colors.iter().find(|c| c.color == Color::Inadmissible) {
        return Err(StructureError::InadmissibleVertex(c.vertex));
    }
    let mut closure: Vec<u32> = members.iter().collect();
    for c in coloring.colors.iter().filter(|c| c.color == Color::White) {
        let ball = branch_ball(g, c.vertex, m);
        for &(x, _, _) in ball.order.iter().skip(1) {
            if !members.contains(x) {
                continue;
            }
            // Walk the parent chain from x back to the center.
            let mut at = ball.index[&x];
            while at != 0 {
                closure.push(ball.order[at].0);
                at = ball.order[at].1;
            }
        }
    }
    let closure = VertexSet::new(closure);
    Ok(GreyClosure {
        grey: closure.len() - members.len(),
        white: coloring.white,
        closure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{complete_bipartite_33, prism};
    use crate::graph::{generate_random_regular, neighborhood_ball};
    use crate::rng::rng_from;

    #[test]
    fn branch_bound_closed_form() {
        assert_eq!(branch_bound(3, 1), 3);
        assert_eq!(branch_bound(3, 2), 9);
        assert_eq!(branch_bound(4, 2), 16);
        // Tree balls in a d-regular graph have exactly 1 + N_M vertices.
        let g = generate_random_regular(2000, 3, 7).unwrap();
        for v in 0..50u32 {
            let (ball, is_tree) = neighborhood_ball(&g, v, 2);
            if is_tree {
                assert_eq!(ball.len() as u64, 1 + branch_bound(3, 2));
            }
        }
    }

    #[test]
    fn singleton_member_is_black() {
        let g = complete_bipartite_33();
        let r = classify_black_white(&g, &VertexSet::singleton(0), 1).unwrap();
        assert_eq!((r.black, r.white, r.inadmissible), (1, 0, 0));
        assert_eq!(r.colors[0].free_branch, Some(3), "lowest-id branch is chosen");
    }

    #[test]
    fn adjacent_pair_both_black() {
        let g = complete_bipartite_33();
        let r = classify_black_white(&g, &VertexSet::new(vec![0, 3]), 1).unwrap();
        assert_eq!((r.black, r.white), (2, 0));
    }

    #[test]
    fn vertex_with_all_neighbors_occupied_is_white() {
        let g = complete_bipartite_33();
        let r = classify_black_white(&g, &VertexSet::new(vec![0, 3, 4, 5]), 1).unwrap();
        let v0 = r.colors.iter().find(|c| c.vertex == 0).unwrap();
        assert_eq!(v0.color, Color::White);
        assert_eq!((r.black, r.white), (3, 1));
    }

    #[test]
    fn prism_balls_are_inadmissible() {
        let g = prism();
        let r = classify_black_white(&g, &VertexSet::new(vec![0, 4]), 1).unwrap();
        assert_eq!(r.inadmissible, 2);
        assert_eq!(r.black + r.white, 0);
        assert!(matches!(
            grey_closure(&g, &VertexSet::new(vec![0, 4]), 1),
            Err(StructureError::InadmissibleVertex(_))
        ));
    }

    #[test]
    fn all_black_set_has_empty_grey_closure() {
        let g = complete_bipartite_33();
        let members = VertexSet::new(vec![0, 3]);
        let r = grey_closure(&g, &members, 1).unwrap();
        assert_eq!(r.grey, 0);
        assert_eq!(r.closure, members);
        let singleton = VertexSet::singleton(2);
        assert_eq!(grey_closure(&g, &singleton, 1).unwrap().closure, singleton);
    }

    #[test]
    fn white_center_generates_geodesic_interiors() {
        // Pick a vertex with a tree 2-ball and one member at distance 2 in
        // each of its three branches: the center is white, the distance-2
        // members are black, and exactly the three distance-1 interiors
        // turn grey.
        let g = generate_random_regular(600, 3, 19).unwrap();
        let mut chosen = None;
        'search: for v in 0..g.n() {
            if !neighborhood_ball(&g, v, 2).1 {
                continue;
            }
            let ball = branch_ball(&g, v, 2);
            let mut picks = Vec::new();
            for &b in g.neighbors(v) {
                let pick = ball
                    .order
                    .iter()
                    .skip(1)
                    .find(|&&(_, parent, branch)| branch == b && parent != 0)
                    .map(|&(w, _, _)| w);
                match pick {
                    Some(w) if neighborhood_ball(&g, w, 2).1 => picks.push(w),
                    _ => continue 'search,
                }
            }
            chosen = Some((v, picks));
            break;
        }
        let (v, picks) = chosen.expect("a suitable center exists at this size");
        let members = VertexSet::new([vec![v], picks].concat());
        let coloring = classify_black_white(&g, &members, 2).unwrap();
        let center = coloring.colors.iter().find(|c| c.vertex == v).unwrap();
        assert_eq!(center.color, Color::White);
        assert_eq!(coloring.black, 3);
        let closure = grey_closure(&g, &members, 2).unwrap();
        assert_eq!(closure.grey, 3, "the three distance-1 interiors are grey");
        assert!(closure.grey as u64 <= branch_bound(3, 2) * closure.white as u64);
    }

    #[test]
    fn grey_bound_holds_on_random_graphs() {
        let g = generate_random_regular(600, 3, 11).unwrap();
        let mut rng = rng_from(3);
        for m in [1u32, 2] {
            for trial in 0..10 {
                let _ = trial;
                let admissible: Vec<u32> =
                    (0..g.n()).filter(|&v| neighborhood_ball(&g, v, m).1).collect();
                let members = {
                    let picked = rand::seq::index::sample(&mut rng, admissible.len(), 25);
                    VertexSet::new(picked.iter().map(|i| admissible[i]).collect())
                };
                let closure = grey_closure(&g, &members, m).unwrap();
                assert!(
                    (closure.grey as u64) <= branch_bound(3, m) * closure.white as u64,
                    "grey bound violated: g={} w={}",
                    closure.grey,
                    closure.white
                );
            }
        }
    }

    #[test]
    fn closure_is_monotone_in_the_member_set() {
        let g = generate_random_regular(600, 3, 13).unwrap();
        let m = 2;
        let admissible: Vec<u32> = (0..g.n()).filter(|&v| neighborhood_ball(&g, v, m).1).collect();
        let mut rng = rng_from(29);
        for _ in 0..10 {
            let big = rand::seq::index::sample(&mut rng, admissible.len(), 30);
            let big: Vec<u32> = big.iter().map(|i| admissible[i]).collect();
            let small = VertexSet::new(big[..15].to_vec());
            let big = VertexSet::new(big);
            let w_small = grey_closure(&g, &small, m).unwrap().closure;
            let w_big = grey_closure(&g, &big, m).unwrap().closure;
            for v in w_small.iter() {
                assert!(w_big.contains(v), "closure lost vertex {v} when members grew");
            }
        }
    }

    #[test]
    fn coloring_is_permutation_equivariant() {
        use rand::seq::SliceRandom;
        let g = generate_random_regular(60, 3, 17).unwrap();
        let mut rng = rng_from(41);
        let mut perm: Vec<u32> = (0..g.n()).collect();
        perm.shuffle(&mut rng);
        let mut edges = Vec::new();
        for u in 0..g.n() {
            for &v in g.neighbors(u) {
                if v > u {
                    edges.push((perm[u as usize], perm[v as usize]));
                }
            }
        }
        let h = Graph::from_edges(g.n(), 3, &edges).unwrap();
        let members = VertexSet::new(vec![0, 5, 11, 23, 42]);
        let mapped = VertexSet::new(members.iter().map(|v| perm[v as usize]).collect());
        let a = classify_black_white(&g, &members, 2).unwrap();
        let b = classify_black_white(&h, &mapped, 2).unwrap();
        for c in &a.colors {
            let image = perm[c.vertex as usize];
            let d = b.colors.iter().find(|x| x.vertex == image).unwrap();
            assert_eq!(c.color, d.color, "color of {} changed under relabeling", c.vertex);
        }
    }

    #[test]
    fn coloring_csv_has_documented_header() {
        let g = complete_bipartite_33();
        let r = classify_black_white(&g, &VertexSet::new(vec![0, 3]), 1).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("vertex,color,free_branch\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
