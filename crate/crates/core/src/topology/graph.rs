use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub type NodeId = u32;

/// Immutable undirected simple graph over nodes `0..node_count`.
///
/// Adjacency is stored in compressed rows with every neighbor list sorted
/// ascending, so membership checks are a binary search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlayGraph {
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
}

impl OverlayGraph {
    /// Build from an edge list. Rejects self-loops, duplicate edges and
    /// out-of-range endpoints.
    pub fn from_edges(node_count: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::param("graph needs at least one node"));
        }
        if node_count > NodeId::MAX as usize {
            return Err(Error::param("node count exceeds id range"));
        }
        let mut degree = vec![0usize; node_count];
        for &(u, v) in edges {
            if u == v {
                return Err(Error::param(format!("self-loop on node {u}")));
            }
            if u as usize >= node_count || v as usize >= node_count {
                return Err(Error::param(format!("edge ({u}, {v}) out of range")));
            }
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..node_count].to_vec();
        let mut neighbors = vec![0; offsets[node_count]];
        for &(u, v) in edges {
            neighbors[fill[u as usize]] = v;
            fill[u as usize] += 1;
            neighbors[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        for u in 0..node_count {
            let row = &mut neighbors[offsets[u]..offsets[u + 1]];
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::param(format!("duplicate edge ({u}, {})", w[0])));
            }
        }
        Ok(OverlayGraph { offsets, neighbors })
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: u32) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n as usize, &edges).expect("path is simple")
    }

    /// Cycle on `n >= 3` nodes.
    pub fn cycle(n: u32) -> Self {
        assert!(n >= 3, "cycle needs at least 3 nodes");
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_edges(n as usize, &edges).expect("cycle is simple")
    }

    pub fn complete(n: u32) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Self::from_edges(n as usize, &edges).expect("complete graph is simple")
    }

    /// Star with hub 0 and `n - 1` leaves.
    pub fn star(n: u32) -> Self {
        let edges: Vec<_> = (1..n).map(|v| (0, v)).collect();
        Self::from_edges(n as usize, &edges).expect("star is simple")
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        let u = u as usize;
        &self.neighbors[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        let u = u as usize;
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        0..self.node_count() as NodeId
    }

    /// Edges as `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes().flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.nodes().map(|u| self.degree(u)).collect()
    }

    /// Hop distances from `source`; `None` for unreachable nodes.
    pub fn bfs_distances(&self, source: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.node_count()];
        let mut queue = VecDeque::new();
        dist[source as usize] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let d = dist[u as usize].unwrap();
            for &v in self.neighbors(u) {
                if dist[v as usize].is_none() {
                    dist[v as usize] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.bfs_distances(0).iter().all(Option::is_some)
    }

    /// Largest shortest-path hop distance over all node pairs.
    pub fn diameter(&self) -> Result<u32> {
        let mut best = 0;
        for u in self.nodes() {
            for d in self.bfs_distances(u) {
                best = best.max(d.ok_or(Error::Disconnected)?);
            }
        }
        Ok(best)
    }

    /// Canonical text form: `nodes <N>` then one `u v` line per edge, `u < v`,
    /// ascending.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(16 + self.edge_count() * 9);
        writeln!(out, "nodes {}", self.node_count()).unwrap();
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}").unwrap();
        }
        out
    }

    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_edge_list().as_bytes())?;
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Self> {
        let parse_err = |line: usize, detail: String| Error::Parse {
            what: "edge list",
            line,
            detail,
        };
        let mut lines = r.lines().enumerate();
        let node_count = match lines.next() {
            Some((_, header)) => {
                let header = header?;
                header
                    .strip_prefix("nodes ")
                    .and_then(|n| n.trim().parse::<usize>().ok())
                    .ok_or_else(|| parse_err(1, format!("expected `nodes <N>`, got {header:?}")))?
            }
            None => return Err(parse_err(1, "empty input".into())),
        };
        let mut edges = Vec::new();
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<NodeId>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
                _ => return Err(parse_err(i + 1, format!("expected `u v`, got {line:?}"))),
            }
        }
        OverlayGraph::from_edges(node_count, &edges)
    }
}
