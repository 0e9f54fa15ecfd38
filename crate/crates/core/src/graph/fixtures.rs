//! Small named graphs used throughout the test suites and the oracle checks.

use super::Graph;

/// Complete graph on n vertices ((n-1)-regular).
pub fn complete(n: u32) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, n - 1, &edges).expect("complete graph is simple and regular")
}

/// The triangular prism: two triangle faces {0,1,2} and {3,4,5} joined by
/// rungs i -- i+3.
pub fn prism() -> Graph {
    let edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)];
    Graph::from_edges(6, 3, &edges).expect("prism is cubic")
}

/// Complete bipartite graph K3,3 with parts {0,1,2} and {3,4,5}.
pub fn complete_bipartite_33() -> Graph {
    let mut edges = Vec::new();
    for u in 0..3 {
        for v in 3..6 {
            edges.push((u, v));
        }
    }
    Graph::from_edges(6, 3, &edges).expect("K33 is cubic")
}

/// Single edge on two vertices (1-regular).
pub fn two_path() -> Graph {
    Graph::from_edges(2, 1, &[(0, 1)]).expect("an edge is 1-regular")
}

/// Cycle on n >= 3 vertices (2-regular).
pub fn cycle(n: u32) -> Graph {
    let edges: Vec<(u32, u32)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edges(n, 2, &edges).expect("cycle is 2-regular")
}
