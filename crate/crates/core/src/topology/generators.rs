//! Random overlay generators: Erdős–Rényi G(n, M), Barabási–Albert
//! preferential attachment, one-dimensional Watts–Strogatz and random
//! k-regular graphs.
//!
//! All generators are deterministic in their seed. They may return a
//! disconnected graph; [`GeneratorSpec::generate_connected`] layers the
//! rejection loop used to build corpora on top.

use std::collections::{BTreeMap, HashSet};

use log::debug;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::graph::{NodeId, OverlayGraph};
use crate::error::{Error, Result};
use crate::seed::{rng_for, Stream};

/// Restart budget of the k-regular pairing procedure.
pub const KREGULAR_MAX_RESTARTS: usize = 1000;

/// Budget of connectivity rejections before giving up on a corpus member.
pub const MAX_CONNECT_ATTEMPTS: u64 = 500_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GeneratorSpec {
    ErdosRenyi {
        nodes: usize,
        edges: usize,
    },
    BarabasiAlbert {
        nodes: usize,
        edges_per_node: usize,
    },
    WattsStrogatz {
        nodes: usize,
        neighbors_each_side: usize,
        rewire_prob: f64,
    },
    KRegular {
        nodes: usize,
        k: usize,
    },
}

impl GeneratorSpec {
    pub fn node_count(&self) -> usize {
        match *self {
            GeneratorSpec::ErdosRenyi { nodes, .. }
            | GeneratorSpec::BarabasiAlbert { nodes, .. }
            | GeneratorSpec::WattsStrogatz { nodes, .. }
            | GeneratorSpec::KRegular { nodes, .. } => nodes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GeneratorSpec::ErdosRenyi { nodes, edges } => check_er(nodes, edges),
            GeneratorSpec::BarabasiAlbert {
                nodes,
                edges_per_node,
            } => check_ba(nodes, edges_per_node),
            GeneratorSpec::WattsStrogatz {
                nodes,
                neighbors_each_side,
                rewire_prob,
            } => check_ws(nodes, neighbors_each_side, rewire_prob),
            GeneratorSpec::KRegular { nodes, k } => check_kregular(nodes, k),
        }
    }

    /// One draw from the generator, connected or not.
    pub fn generate(&self, seed: u64) -> Result<OverlayGraph> {
        match *self {
            GeneratorSpec::ErdosRenyi { nodes, edges } => generate_er(nodes, edges, seed),
            GeneratorSpec::BarabasiAlbert {
                nodes,
                edges_per_node,
            } => generate_ba(nodes, edges_per_node, seed),
            GeneratorSpec::WattsStrogatz {
                nodes,
                neighbors_each_side,
                rewire_prob,
            } => generate_ws(nodes, neighbors_each_side, rewire_prob, seed),
            GeneratorSpec::KRegular { nodes, k } => generate_kregular(nodes, k, seed),
        }
    }

    /// Draw until the graph is connected. Attempt 0 uses `seed` itself,
    /// attempt `a` uses a seed derived from `(seed, a)`. Returns the graph,
    /// the seed that produced it and the number of rejected draws.
    pub fn generate_connected(&self, seed: u64) -> Result<(OverlayGraph, u64, u64)> {
        self.validate()?;
        for attempt in 0..MAX_CONNECT_ATTEMPTS {
            let s = if attempt == 0 {
                seed
            } else {
                crate::seed::derive(seed, Stream::Attempt, attempt)
            };
            // Isolated nodes are by far the common failure for sparse G(n, M);
            // screen for them without building the graph.
            if let GeneratorSpec::ErdosRenyi { nodes, edges } = *self {
                if nodes > 1 && has_isolated_node(nodes, &er_edges(nodes, edges, s)) {
                    continue;
                }
            }
            let g = self.generate(s)?;
            if g.is_connected() {
                if attempt > 0 {
                    debug!("{self:?} seed {seed}: {attempt} disconnected draws rejected");
                }
                return Ok((g, s, attempt));
            }
        }
        Err(Error::Generation(format!(
            "no connected graph after {MAX_CONNECT_ATTEMPTS} draws of {self:?}"
        )))
    }
}

fn check_er(nodes: usize, edges: usize) -> Result<()> {
    if nodes == 0 {
        return Err(Error::param("node count must be positive"));
    }
    let max = nodes * (nodes - 1) / 2;
    if edges > max {
        return Err(Error::param(format!(
            "{edges} edges exceed the maximum {max} for {nodes} nodes"
        )));
    }
    Ok(())
}

fn check_ba(nodes: usize, m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::param("edges per node must be at least 1"));
    }
    if nodes <= m {
        return Err(Error::param(format!(
            "node count {nodes} must exceed edges per node {m}"
        )));
    }
    Ok(())
}

fn check_ws(nodes: usize, k: usize, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("rewiring probability {p} not in [0, 1]")));
    }
    if 2 * k >= nodes {
        return Err(Error::param(format!(
            "lattice degree {} must be below node count {nodes}",
            2 * k
        )));
    }
    Ok(())
}

fn check_kregular(nodes: usize, k: usize) -> Result<()> {
    if nodes == 0 {
        return Err(Error::param("node count must be positive"));
    }
    if k >= nodes {
        return Err(Error::param(format!("degree {k} must be below node count {nodes}")));
    }
    if (k * nodes) % 2 == 1 {
        return Err(Error::param(format!(
            "degree sum {k}*{nodes} is odd, no {k}-regular graph exists"
        )));
    }
    Ok(())
}

fn has_isolated_node(nodes: usize, edges: &[(NodeId, NodeId)]) -> bool {
    let mut seen = vec![false; nodes];
    for &(u, v) in edges {
        seen[u as usize] = true;
        seen[v as usize] = true;
    }
    seen.iter().any(|s| !s)
}

/// Map a pair index in `0..n(n-1)/2` to `(u, v)`, `u < v`, enumerating pairs
/// by increasing `v`.
fn pair_from_index(k: usize) -> (NodeId, NodeId) {
    let mut v = ((1.0 + (1.0 + 8.0 * k as f64).sqrt()) / 2.0) as usize;
    while v * (v - 1) / 2 > k {
        v -= 1;
    }
    while (v + 1) * v / 2 <= k {
        v += 1;
    }
    let u = k - v * (v - 1) / 2;
    (u as NodeId, v as NodeId)
}

fn er_edges(nodes: usize, edges: usize, seed: u64) -> Vec<(NodeId, NodeId)> {
    let mut rng = rng_for(seed, Stream::Topology, 0);
    let max = nodes * (nodes - 1) / 2;
    index::sample(&mut rng, max, edges)
        .into_iter()
        .map(pair_from_index)
        .collect()
}

/// G(n, M): exactly `edge_count` distinct edges drawn uniformly without
/// replacement.
pub fn generate_er(node_count: usize, edge_count: usize, seed: u64) -> Result<OverlayGraph> {
    check_er(node_count, edge_count)?;
    OverlayGraph::from_edges(node_count, &er_edges(node_count, edge_count, seed))
}

/// Preferential attachment grown from a clique of `edges_per_node + 1`
/// nodes. Each arriving node links to `edges_per_node` distinct existing
/// nodes, each chosen with probability proportional to its degree.
pub fn generate_ba(node_count: usize, edges_per_node: usize, seed: u64) -> Result<OverlayGraph> {
    check_ba(node_count, edges_per_node)?;
    let m = edges_per_node;
    let mut rng = rng_for(seed, Stream::Topology, 0);
    let mut edges = Vec::with_capacity(m * node_count);
    // Every edge contributes both endpoints, so a uniform pick from this
    // pool is a degree-proportional pick of a node.
    let mut pool: Vec<NodeId> = Vec::with_capacity(2 * m * node_count);
    for u in 0..=m as NodeId {
        for v in u + 1..=m as NodeId {
            edges.push((u, v));
            pool.extend([u, v]);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for v in (m + 1) as NodeId..node_count as NodeId {
        targets.clear();
        while targets.len() < m {
            let t = pool[rng.random_range(0..pool.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, v));
            pool.extend([t, v]);
        }
    }
    OverlayGraph::from_edges(node_count, &edges)
}

/// One-dimensional Watts–Strogatz. Every lattice edge `(u, u + j)` is rewired
/// with probability `rewire_prob` by moving its far endpoint to a node drawn
/// uniformly among those that are neither `u` nor already adjacent to `u`.
pub fn generate_ws(
    node_count: usize,
    neighbors_each_side: usize,
    rewire_prob: f64,
    seed: u64,
) -> Result<OverlayGraph> {
    check_ws(node_count, neighbors_each_side, rewire_prob)?;
    let n = node_count;
    let mut rng = rng_for(seed, Stream::Topology, 0);
    let mut adj: Vec<Vec<NodeId>> = vec![Vec::with_capacity(2 * neighbors_each_side); n];
    for u in 0..n {
        for j in 1..=neighbors_each_side {
            let v = (u + j) % n;
            adj[u].push(v as NodeId);
            adj[v].push(u as NodeId);
        }
    }
    for u in 0..n {
        for j in 1..=neighbors_each_side {
            let v = ((u + j) % n) as NodeId;
            if rng.random::<f64>() >= rewire_prob {
                continue;
            }
            if adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n) as NodeId;
                if w as usize != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].retain(|&x| x != v);
            adj[v as usize].retain(|&x| x as usize != u);
            adj[u].push(w);
            adj[w as usize].push(u as NodeId);
        }
    }
    let edges: Vec<_> = adj
        .iter()
        .enumerate()
        .flat_map(|(u, row)| {
            row.iter()
                .filter(move |&&v| (u as NodeId) < v)
                .map(move |&v| (u as NodeId, v))
        })
        .collect();
    OverlayGraph::from_edges(n, &edges)
}

/// Random k-regular graph by stub pairing. Stubs are shuffled and paired;
/// pairs that would form a self-loop or a duplicate edge go back into the
/// pool, which is re-paired until empty. When no admissible pair remains the
/// attempt restarts from scratch.
pub fn generate_kregular(node_count: usize, k: usize, seed: u64) -> Result<OverlayGraph> {
    check_kregular(node_count, k)?;
    let mut rng = rng_for(seed, Stream::Topology, 0);
    for _ in 0..KREGULAR_MAX_RESTARTS {
        if let Some(edges) = try_pairing(node_count, k, &mut rng) {
            return OverlayGraph::from_edges(node_count, &edges);
        }
    }
    Err(Error::Generation(format!(
        "no simple {k}-regular graph on {node_count} nodes after {KREGULAR_MAX_RESTARTS} restarts"
    )))
}

fn try_pairing<R: Rng>(n: usize, k: usize, rng: &mut R) -> Option<Vec<(NodeId, NodeId)>> {
    let mut edges: HashSet<(NodeId, NodeId)> = HashSet::with_capacity(n * k / 2);
    let mut order: Vec<(NodeId, NodeId)> = Vec::with_capacity(n * k / 2);
    let mut stubs: Vec<NodeId> = (0..n as NodeId)
        .flat_map(|u| std::iter::repeat_n(u, k))
        .collect();
    while !stubs.is_empty() {
        let mut leftover: BTreeMap<NodeId, usize> = BTreeMap::new();
        stubs.shuffle(rng);
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a != b && edges.insert((a, b)) {
                order.push((a, b));
            } else {
                *leftover.entry(a).or_default() += 1;
                *leftover.entry(b).or_default() += 1;
            }
        }
        let open: Vec<NodeId> = leftover.keys().copied().collect();
        let admissible = open.iter().enumerate().any(|(i, &a)| {
            open[i + 1..]
                .iter()
                .any(|&b| !edges.contains(&(a.min(b), a.max(b))))
        });
        if !leftover.is_empty() && !admissible {
            return None;
        }
        stubs = leftover
            .into_iter()
            .flat_map(|(u, c)| std::iter::repeat_n(u, c))
            .collect();
    }
    Some(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_index_roundtrip() {
        let n = 9;
        let mut seen = HashSet::new();
        for k in 0..n * (n - 1) / 2 {
            let (u, v) = pair_from_index(k);
            assert!(u < v && (v as usize) < n);
            assert!(seen.insert((u, v)));
        }
    }

    #[test]
    fn er_small_cases() {
        let k4 = generate_er(4, 6, 7).unwrap();
        assert_eq!(k4, OverlayGraph::complete(4));
        let single = generate_er(2, 1, 99).unwrap();
        assert_eq!(single.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert!(matches!(generate_er(4, 7, 1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn er_exact_edge_count() {
        for seed in 0..5 {
            let g = generate_er(500, 1000, seed).unwrap();
            assert_eq!(g.node_count(), 500);
            assert_eq!(g.edge_count(), 1000);
            let mean = 2.0 * g.edge_count() as f64 / g.node_count() as f64;
            assert_eq!(mean, 4.0);
        }
    }

    #[test]
    fn ba_edge_counts_follow_clique_seed() {
        assert_eq!(generate_ba(500, 2, 3).unwrap().edge_count(), 997);
        assert_eq!(generate_ba(500, 3, 3).unwrap().edge_count(), 1494);
        assert_eq!(generate_ba(500, 4, 3).unwrap().edge_count(), 1990);
        let tree = generate_ba(3, 1, 11).unwrap();
        assert_eq!(tree.edge_count(), 2);
        assert!(tree.is_connected());
        assert!(generate_ba(2, 2, 0).is_err());
        assert!(generate_ba(5, 0, 0).is_err());
    }

    #[test]
    fn ba_has_hubs() {
        let hubby = (0..10)
            .filter(|&s| {
                let g = generate_ba(500, 2, s).unwrap();
                let mean = 2.0 * g.edge_count() as f64 / 500.0;
                *g.degrees().iter().max().unwrap() as f64 > 3.0 * mean
            })
            .count();
        assert!(hubby > 5, "only {hubby}/10 graphs have hubs");
    }

    #[test]
    fn ws_without_rewiring_is_the_ring_lattice() {
        assert_eq!(generate_ws(6, 1, 0.0, 5).unwrap(), OverlayGraph::cycle(6));
        let g = generate_ws(20, 2, 0.0, 5).unwrap();
        for u in 0..20u32 {
            let mut expect: Vec<u32> = [18, 19, 1, 2].iter().map(|d| (u + d) % 20).collect();
            expect.sort_unstable();
            assert_eq!(g.neighbors(u), &expect[..]);
        }
    }

    #[test]
    fn ws_rewired_edge_counts() {
        let g = generate_ws(500, 2, 0.1, 1).unwrap();
        assert_eq!(g.edge_count(), 1000);
        let full = generate_ws(500, 2, 1.0, 1).unwrap();
        assert!(full.edge_count() <= 1000);
        assert_ne!(full, generate_ws(500, 2, 0.0, 1).unwrap());
        assert!(generate_ws(4, 2, 0.1, 1).is_err());
        assert!(generate_ws(10, 1, 1.5, 1).is_err());
    }

    #[test]
    fn kregular_cases() {
        for k in [4, 6, 8] {
            let g = generate_kregular(500, k, 21).unwrap();
            assert_eq!(g.edge_count(), 500 * k / 2);
            assert!(g.degrees().iter().all(|&d| d == k));
        }
        assert_eq!(generate_kregular(4, 3, 0).unwrap(), OverlayGraph::complete(4));
        assert!(matches!(
            generate_kregular(5, 3, 0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(generate_kregular(4, 4, 0).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let specs = [
            GeneratorSpec::ErdosRenyi { nodes: 100, edges: 300 },
            GeneratorSpec::BarabasiAlbert { nodes: 100, edges_per_node: 2 },
            GeneratorSpec::WattsStrogatz { nodes: 100, neighbors_each_side: 2, rewire_prob: 0.3 },
            GeneratorSpec::KRegular { nodes: 100, k: 4 },
        ];
        for spec in specs {
            let a = spec.generate(1234).unwrap().to_edge_list();
            let b = spec.generate(1234).unwrap().to_edge_list();
            assert_eq!(a, b);
            assert_ne!(a, spec.generate(1235).unwrap().to_edge_list());
        }
    }

    #[test]
    fn connected_rejection_loop() {
        let spec = GeneratorSpec::ErdosRenyi { nodes: 500, edges: 1000 };
        let (g, used, rejected) = spec.generate_connected(3).unwrap();
        assert!(g.is_connected());
        assert_eq!(g.edge_count(), 1000);
        assert_eq!(spec.generate(used).unwrap(), g);
        assert_eq!(rejected > 0, used != 3);
    }
}
