//! Communication topologies: validated simple undirected connected graphs,
//! deterministic generators, and the edge-list text format.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Default probability of adding each non-tree edge in `random_connected`.
pub const DEFAULT_EXTRA_EDGE_PROBABILITY: f64 = 0.2;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one process")]
    Empty,
    #[error("edge ({0}, {1}) references a process outside 0..{2}")]
    OutOfRange(usize, usize, usize),
    #[error("self-loop on process {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    Duplicate(usize, usize),
    #[error("graph is not connected")]
    Disconnected,
    #[error("{kind} requires n >= {min}, got {n}")]
    InvalidSize {
        kind: GraphKind,
        n: usize,
        min: usize,
    },
    #[error("edge-list parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Generator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Path,
    Ring,
    Star,
    Complete,
    RandomConnected,
}

impl GraphKind {
    pub const ALL: [GraphKind; 5] = [
        GraphKind::Path,
        GraphKind::Ring,
        GraphKind::Star,
        GraphKind::Complete,
        GraphKind::RandomConnected,
    ];

    pub fn min_size(self) -> usize {
        match self {
            GraphKind::Ring => 3,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GraphKind::Path => "path",
            GraphKind::Ring => "ring",
            GraphKind::Star => "star",
            GraphKind::Complete => "complete",
            GraphKind::RandomConnected => "random_connected",
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GraphKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GraphKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown graph kind `{s}`"))
    }
}

/// A simple undirected connected graph over processes `0..n`.
///
/// Neighbor lists are sorted by index; a process's local label for a
/// neighbor is its position in that list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    m: usize,
    delta_max: usize,
    diameter: usize,
}

impl Graph {
    /// Validates an edge list and computes m, Δ and D.
    pub fn build(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut seen = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::OutOfRange(u, v, n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(GraphError::Duplicate(u, v));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let delta_max = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        let mut graph = Graph {
            adjacency,
            m: seen.len(),
            delta_max,
            diameter: 0,
        };
        graph.diameter = graph
            .eccentricities()
            .ok_or(GraphError::Disconnected)?
            .into_iter()
            .max()
            .unwrap_or(0);
        Ok(graph)
    }

    /// Deterministic generator; `seed` only matters for `RandomConnected`.
    pub fn generate(kind: GraphKind, n: usize, seed: u64) -> Result<Self, GraphError> {
        Self::generate_with(kind, n, seed, DEFAULT_EXTRA_EDGE_PROBABILITY)
    }

    pub fn generate_with(
        kind: GraphKind,
        n: usize,
        seed: u64,
        extra_edge_probability: f64,
    ) -> Result<Self, GraphError> {
        if n < kind.min_size() {
            return Err(GraphError::InvalidSize {
                kind,
                n,
                min: kind.min_size(),
            });
        }
        let edges: Vec<(usize, usize)> = match kind {
            GraphKind::Path => (1..n).map(|i| (i - 1, i)).collect(),
            GraphKind::Ring => (0..n).map(|i| (i, (i + 1) % n)).collect(),
            GraphKind::Star => (1..n).map(|i| (0, i)).collect(),
            GraphKind::Complete => (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .collect(),
            GraphKind::RandomConnected => random_connected_edges(n, seed, extra_edge_probability),
        };
        Self::build(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Maximum degree Δ.
    pub fn delta_max(&self) -> usize {
        self.delta_max
    }

    /// Hop diameter D.
    pub fn diameter(&self) -> usize {
        self.diameter
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn is_neighbor(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m);
        for (u, list) in self.adjacency.iter().enumerate() {
            out.extend(list.iter().filter(|&&v| u < v).map(|&v| (u, v)));
        }
        out
    }

    /// BFS hop distances from `source`; `None` for unreachable processes.
    pub fn bfs(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    fn eccentricities(&self) -> Option<Vec<usize>> {
        (0..self.n())
            .map(|u| {
                self.bfs(u)
                    .into_iter()
                    .try_fold(0, |acc, d| d.map(|d| acc.max(d)))
            })
            .collect()
    }

    /// Edge-list text: header `n <count>`, then one `u v` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n());
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    /// Parses the edge-list format. Blank lines and `#` comments are ignored.
    pub fn from_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut n = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: &str| GraphError::Parse {
                line: line_no,
                msg: msg.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if n.is_none() {
                match fields.as_slice() {
                    ["n", count] => {
                        n = Some(count.parse::<usize>().map_err(|_| parse_err("bad count"))?)
                    }
                    _ => return Err(parse_err("expected header `n <count>`")),
                }
                continue;
            }
            match fields.as_slice() {
                [u, v] => {
                    let u = u.parse().map_err(|_| parse_err("bad process index"))?;
                    let v = v.parse().map_err(|_| parse_err("bad process index"))?;
                    edges.push((u, v));
                }
                _ => return Err(parse_err("expected `u v`")),
            }
        }
        let n = n.ok_or(GraphError::Parse {
            line: 0,
            msg: "missing header `n <count>`".into(),
        })?;
        Self::build(n, &edges)
    }

    /// Short stable digest of the edge list, used in trace headers.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_edge_list().as_bytes());
        hash[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Randomized Prim over K_n: each process, taken in random order, attaches
/// to a uniformly chosen process already in the tree. Every remaining pair
/// then becomes an edge independently with probability `p`.
fn random_connected_edges(n: usize, seed: u64, p: f64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut tree = BTreeSet::new();
    for i in 1..n {
        let parent = order[rng.random_range(0..i)];
        let child = order[i];
        tree.insert((parent.min(child), parent.max(child)));
    }
    let mut edges: Vec<(usize, usize)> = tree.iter().copied().collect();
    for u in 0..n {
        for v in u + 1..n {
            if !tree.contains(&(u, v)) && rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}
