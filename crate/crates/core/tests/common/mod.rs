#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdr_core::graph::{Graph, GraphKind};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One graph per (kind, n) for `n` in `kind.min_size()..=max_n`; random
/// graphs are drawn with `seed`.
pub fn family(max_n: usize, seed: u64) -> Vec<Graph> {
    GraphKind::ALL
        .into_iter()
        .flat_map(|k| (k.min_size()..=max_n).map(move |n| Graph::generate(k, n, seed).unwrap()))
        .collect()
}

/// All-pairs shortest paths by Floyd–Warshall, independent of the BFS code.
pub fn apsp(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.n();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0;
    }
    for (u, v) in g.edges() {
        d[u][v] = 1;
        d[v][u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}
