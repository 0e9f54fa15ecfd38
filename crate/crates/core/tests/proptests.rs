//! Property tests for the structural invariants.

use proptest::prelude::*;

use cplab_core::engine::Configuration;
use cplab_core::graph::{
    boundary_edges, diameter, edge_expansion, generate_random_regular, io as graph_io,
    ExpansionMode,
};
use cplab_core::numfmt::sig12;
use cplab_core::stats::ks_exp1_mean_normalized;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Every generated graph is simple, d-regular, connected, and symmetric.
    #[test]
    fn generator_output_satisfies_graph_invariants(
        half_n in 3u32..16,
        d in 3u32..5,
        seed in any::<u64>(),
    ) {
        let n = 2 * half_n; // even n keeps n*d even for every d
        prop_assume!(n > d);
        let g = generate_random_regular(n, d, seed).unwrap();
        prop_assert!(g.connected());
        prop_assert_eq!(g.n(), n);
        for v in 0..n {
            let nbrs = g.neighbors(v);
            prop_assert_eq!(nbrs.len() as u32, d);
            prop_assert!(nbrs.windows(2).all(|w| w[0] < w[1]), "sorted, no duplicates");
            prop_assert!(!nbrs.contains(&v), "no self-loop");
            for &u in nbrs {
                prop_assert!(g.neighbors(u).contains(&v), "symmetry");
            }
        }
    }

    /// Sampled expansion can never undercut the exact minimum, and both
    /// witnesses reproduce their reported values.
    #[test]
    fn sampled_expansion_upper_bounds_exact(seed in any::<u64>(), k in 2usize..5) {
        let g = generate_random_regular(12, 3, seed).unwrap();
        let exact = edge_expansion(&g, k, ExpansionMode::Exact, 0, 0).unwrap();
        let sampled = edge_expansion(&g, k, ExpansionMode::Sampled, 4, seed).unwrap();
        prop_assert!(exact.value() <= sampled.value() + 1e-12);
        prop_assert_eq!(boundary_edges(&g, &exact.witness), exact.boundary);
        prop_assert_eq!(boundary_edges(&g, &sampled.witness), sampled.boundary);
    }

    /// Per-source BFS diameter agrees with the full pairwise distance matrix.
    #[test]
    fn diameter_agrees_with_pairwise_matrix(seed in any::<u64>(), half_n in 4u32..25) {
        let n = 2 * half_n;
        let g = generate_random_regular(n, 3, seed).unwrap();
        let by_bfs = diameter(&g).unwrap();
        // Floyd-Warshall as the independent route.
        let inf = u32::MAX / 4;
        let mut dist = vec![inf; (n * n) as usize];
        for v in 0..n {
            dist[(v * n + v) as usize] = 0;
            for &u in g.neighbors(v) {
                dist[(v * n + u) as usize] = 1;
            }
        }
        for k in 0..n as usize {
            for i in 0..n as usize {
                for j in 0..n as usize {
                    let via = dist[i * n as usize + k] + dist[k * n as usize + j];
                    if via < dist[i * n as usize + j] {
                        dist[i * n as usize + j] = via;
                    }
                }
            }
        }
        let by_matrix = dist.into_iter().max().unwrap();
        prop_assert_eq!(by_bfs, by_matrix);
    }

    /// Edge-list serialization round-trips and its bytes are canonical.
    #[test]
    fn edge_list_roundtrip_is_canonical(seed in any::<u64>()) {
        let g = generate_random_regular(20, 3, seed).unwrap();
        let text = graph_io::to_edge_list_string(&g);
        let parsed = graph_io::from_edge_list_str(&text).unwrap();
        prop_assert_eq!(parsed.adjacency(), g.adjacency());
        prop_assert_eq!(graph_io::to_edge_list_string(&parsed), text);
    }

    /// Mean normalization makes the KS statistic scale-free.
    #[test]
    fn ks_statistic_is_scale_invariant(
        seed in any::<u64>(),
        scale in prop::num::f64::POSITIVE.prop_filter("finite", |x| x.is_finite() && *x > 1e-6 && *x < 1e6),
    ) {
        use rand::Rng;
        let mut rng = cplab_core::rng::rng_from(seed);
        let xs: Vec<f64> = (0..100).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let scaled: Vec<f64> = xs.iter().map(|x| x * scale).collect();
        let d0 = ks_exp1_mean_normalized(&xs);
        let d1 = ks_exp1_mean_normalized(&scaled);
        prop_assert!((d0 - d1).abs() < 1e-9, "{} vs {}", d0, d1);
    }

    /// 12-significant-digit formatting parses back to the value it encodes.
    #[test]
    fn sig12_parses_back_within_representation_error(x in -1e14f64..1e14) {
        let text = sig12(x);
        let back: f64 = text.parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-11 * x.abs().max(1e-12), "{} -> {}", x, text);
    }

    /// Extinction is absorbing along any simulated trajectory.
    #[test]
    fn extinction_time_is_sane(seed in any::<u64>(), lambda in 0.0f64..2.0) {
        let g = generate_random_regular(10, 3, 77).unwrap();
        let s = cplab_core::engine::extinction_time(&g, lambda, &Configuration::full(10), 50.0, seed)
            .unwrap();
        prop_assert!(s.tau >= 0.0 && s.tau <= 50.0);
        prop_assert_eq!(s.censored, s.tau == 50.0);
    }
}
