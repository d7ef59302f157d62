mod common;

use proptest::prelude::*;
use sdr_core::graph::{Graph, GraphError, GraphKind};

#[test]
fn build_examples() {
    let g = Graph::build(2, &[(0, 1)]).unwrap();
    assert_eq!((g.m(), g.delta_max(), g.diameter()), (1, 1, 1));
    let g = Graph::build(3, &[(0, 1), (1, 2)]).unwrap();
    assert_eq!((g.delta_max(), g.diameter()), (2, 2));
    let g = Graph::build(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
    assert_eq!((g.delta_max(), g.diameter()), (2, 1));
}

#[test]
fn generator_examples() {
    let ring = Graph::generate(GraphKind::Ring, 4, 9).unwrap();
    assert_eq!((ring.m(), ring.diameter()), (4, 2));
    let star = Graph::generate(GraphKind::Star, 5, 9).unwrap();
    assert_eq!((star.delta_max(), star.diameter()), (4, 2));
    assert_eq!(
        Graph::generate(GraphKind::RandomConnected, 8, 42).unwrap(),
        Graph::generate(GraphKind::RandomConnected, 8, 42).unwrap()
    );
}

#[test]
fn diameter_examples() {
    assert_eq!(Graph::generate(GraphKind::Path, 3, 0).unwrap().diameter(), 2);
    assert_eq!(Graph::generate(GraphKind::Complete, 5, 0).unwrap().diameter(), 1);
    let c6 = Graph::generate(GraphKind::Ring, 6, 0).unwrap();
    let oracle = common::apsp(&c6).into_iter().flatten().max().unwrap();
    assert_eq!(oracle, 3);
    assert_eq!(c6.diameter(), oracle);
}

#[test]
fn disconnected_and_undersized_inputs_rejected() {
    assert_eq!(Graph::build(3, &[(0, 1)]), Err(GraphError::Disconnected));
    assert!(matches!(
        Graph::generate(GraphKind::Ring, 2, 0),
        Err(GraphError::InvalidSize { .. })
    ));
}

fn kind_strategy() -> impl Strategy<Value = GraphKind> {
    prop::sample::select(GraphKind::ALL.to_vec())
}

proptest! {
    #[test]
    fn generated_graphs_are_consistent(kind in kind_strategy(), n in 3usize..=8, seed in any::<u64>()) {
        let g = Graph::generate(kind, n, seed).unwrap();
        let degree_sum: usize = (0..n).map(|u| g.degree(u)).sum();
        prop_assert_eq!(degree_sum, 2 * g.m());
        let d = common::apsp(&g);
        prop_assert!(d.iter().flatten().all(|&x| x < n), "connected");
        prop_assert_eq!(g.diameter(), d.into_iter().flatten().max().unwrap());
        prop_assert_eq!(g.delta_max(), (0..n).map(|u| g.degree(u)).max().unwrap());
        for u in 0..n {
            for &v in g.neighbors(u) {
                prop_assert!(g.is_neighbor(v, u));
            }
        }
    }

    #[test]
    fn edge_list_round_trip(kind in kind_strategy(), n in 3usize..=8, seed in any::<u64>()) {
        let g = Graph::generate(kind, n, seed).unwrap();
        let back = Graph::from_edge_list(&g.to_edge_list()).unwrap();
        prop_assert_eq!(back.digest(), g.digest());
        prop_assert_eq!(back, g);
    }

    #[test]
    fn arbitrary_connected_graphs_match_oracle(n in 2usize..=8, extra in prop::collection::vec((0usize..8, 0usize..8), 0..12)) {
        // A spanning path plus arbitrary chords.
        let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        for (a, b) in extra {
            let (a, b) = (a % n, b % n);
            if a != b && !edges.iter().any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a)) {
                edges.push((a, b));
            }
        }
        let g = Graph::build(n, &edges).unwrap();
        prop_assert_eq!(g.m(), edges.len());
        prop_assert_eq!(g.diameter(), common::apsp(&g).into_iter().flatten().max().unwrap());
    }
}
