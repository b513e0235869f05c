//! Network configurations: a connected simple graph, an injective identity
//! assignment and one input label per node.

mod automorphism;
mod file;
mod gadget;
mod generate;

pub use automorphism::{has_nontrivial_automorphism, AUTOMORPHISM_GUARD};
pub use file::{parse_graph_file, write_graph_file};
pub use gadget::build_sym_gadget;
pub use generate::{all_connected_graphs, generate, GraphKind};

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use crate::bits::Bits;

/// The first broken invariant found by [`NetworkConfig::validate`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("configuration has no nodes")]
    Empty,
    #[error("expected {expected} labels, found {found}")]
    LabelCount { expected: usize, found: usize },
    #[error("edge ({u}, {v}) references a node outside 0..{n}")]
    UnknownEndpoint { u: usize, v: usize, n: usize },
    #[error("self-loop at node with id {id}")]
    SelfLoop { id: u64 },
    #[error("multi-edge between ids {u} and {v}")]
    MultiEdge { u: u64, v: u64 },
    #[error("id not injective: {id} used by nodes {first} and {second}")]
    DuplicateId { id: u64, first: usize, second: usize },
    #[error("disconnected: node with id {id} is unreachable from id {from}")]
    Disconnected { id: u64, from: u64 },
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(#[from] Violation),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("graph file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("graph has {nodes} nodes, exhaustive search is limited to {limit}")]
    GuardExceeded { nodes: usize, limit: usize },
}

/// Nodes are addressed by their index `0..n`. Each node's ports are its
/// neighbors sorted by id, and the port order never changes.
#[derive(Clone, PartialEq, Eq)]
pub struct NetworkConfig {
    ids: Vec<u64>,
    labels: Vec<Bits>,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    index: HashMap<u64, usize>,
}

impl NetworkConfig {
    /// Builds and validates a configuration from node ids and edges given
    /// as pairs of ids. Labels default to empty strings.
    pub fn from_id_edges(ids: Vec<u64>, edges: &[(u64, u64)]) -> Result<Self, ConfigError> {
        let lookup: HashMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut idx_edges = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            let u = *lookup
                .get(&a)
                .ok_or_else(|| ConfigError::Infeasible(format!("edge endpoint {a} is not a node id")))?;
            let v = *lookup
                .get(&b)
                .ok_or_else(|| ConfigError::Infeasible(format!("edge endpoint {b} is not a node id")))?;
            idx_edges.push((u, v));
        }
        let n = ids.len();
        Ok(Self::new(ids, vec![Bits::new(); n], idx_edges)?)
    }

    /// Builds and validates a configuration from node-index edges.
    pub fn new(ids: Vec<u64>, labels: Vec<Bits>, edges: Vec<(usize, usize)>) -> Result<Self, Violation> {
        let c = Self::unchecked(ids, labels, edges);
        c.validate()?;
        Ok(c)
    }

    /// Builds a configuration without checking its invariants, so that
    /// [`validate`](Self::validate) can report what is wrong with it.
    pub fn unchecked(ids: Vec<u64>, labels: Vec<Bits>, edges: Vec<(usize, usize)>) -> Self {
        let n = ids.len();
        let mut adj = vec![Vec::new(); n];
        let mut canon = Vec::with_capacity(edges.len());
        for &(u, v) in &edges {
            if u < n && v < n {
                adj[u].push(v);
                if u != v {
                    adj[v].push(u);
                }
            }
            canon.push((u.min(v), u.max(v)));
        }
        for list in &mut adj {
            list.sort_by_key(|&w| (ids[w], w));
        }
        canon.sort_unstable();
        let index = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        NetworkConfig { ids, labels, edges: canon, adj, index }
    }

    /// Returns the first violated invariant, checking in order: non-empty,
    /// label count, edge endpoints, self-loops, multi-edges, id injectivity,
    /// connectivity.
    pub fn validate(&self) -> Result<(), Violation> {
        let n = self.ids.len();
        if n == 0 {
            return Err(Violation::Empty);
        }
        if self.labels.len() != n {
            return Err(Violation::LabelCount { expected: n, found: self.labels.len() });
        }
        for &(u, v) in &self.edges {
            if u >= n || v >= n {
                return Err(Violation::UnknownEndpoint { u, v, n });
            }
        }
        for &(u, v) in &self.edges {
            if u == v {
                return Err(Violation::SelfLoop { id: self.ids[u] });
            }
        }
        for w in self.edges.windows(2) {
            if w[0] == w[1] {
                return Err(Violation::MultiEdge { u: self.ids[w[0].0], v: self.ids[w[0].1] });
            }
        }
        let mut seen: BTreeMap<u64, usize> = BTreeMap::new();
        for (i, &id) in self.ids.iter().enumerate() {
            if let Some(&first) = seen.get(&id) {
                return Err(Violation::DuplicateId { id, first, second: i });
            }
            seen.insert(id, i);
        }
        let dist = self.bfs_distances(0);
        if let Some(v) = dist.iter().position(|d| d.is_none()) {
            return Err(Violation::Disconnected { id: self.ids[v], from: self.ids[0] });
        }
        Ok(())
    }

    pub fn with_labels(&self, labels: Vec<Bits>) -> Result<Self, Violation> {
        Self::new(self.ids.clone(), labels, self.edges.clone())
    }

    pub fn with_ids(&self, ids: Vec<u64>) -> Result<Self, Violation> {
        Self::new(ids, self.labels.clone(), self.edges.clone())
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn id(&self, v: usize) -> u64 {
        self.ids[v]
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn label(&self, v: usize) -> &Bits {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[Bits] {
        &self.labels
    }

    pub fn max_id(&self) -> u64 {
        self.ids.iter().copied().max().unwrap_or(0)
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Neighbors of `v` in port order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Port of `v` leading to `u`, if they are adjacent.
    pub fn port_of(&self, v: usize, u: usize) -> Option<usize> {
        self.adj[v].iter().position(|&w| w == u)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&v)
    }

    /// Canonical edge list: pairs `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edges as id pairs `(a, b)` with `a < b`, sorted.
    pub fn id_edges(&self) -> Vec<(u64, u64)> {
        let mut out: Vec<(u64, u64)> = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (self.ids[u], self.ids[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn bfs_distances(&self, root: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        let mut queue = VecDeque::new();
        dist[root] = Some(0);
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_regular(&self, d: usize) -> bool {
        self.adj.iter().all(|a| a.len() == d)
    }

    pub fn has_triangle(&self) -> bool {
        self.edges
            .iter()
            .any(|&(u, v)| self.adj[u].iter().any(|&w| w != v && self.adj[v].contains(&w)))
    }
}

impl fmt::Debug for NetworkConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NetworkConfig")
            .field("ids", &self.ids)
            .field("edges", &self.id_edges())
            .field("labels", &self.labels)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k3_is_valid() {
        let c = NetworkConfig::from_id_edges(vec![1, 2, 3], &[(1, 2), (2, 3), (1, 3)]).unwrap();
        assert_eq!(c.validate(), Ok(()));
        assert!(c.has_triangle());
    }

    #[test]
    fn two_disjoint_edges_are_disconnected() {
        let c = NetworkConfig::unchecked(vec![1, 2, 3, 4], vec![Bits::new(); 4], vec![(0, 1), (2, 3)]);
        let err = c.validate().unwrap_err();
        assert!(matches!(err, Violation::Disconnected { .. }));
        assert!(err.to_string().contains("disconnected"));
    }

    #[test]
    fn duplicate_id_detected() {
        let c = NetworkConfig::unchecked(vec![1, 2, 1], vec![Bits::new(); 3], vec![(0, 1), (1, 2)]);
        let err = c.validate().unwrap_err();
        assert_eq!(err, Violation::DuplicateId { id: 1, first: 0, second: 2 });
        assert!(err.to_string().contains("id not injective"));
    }

    #[test]
    fn self_loop_and_multi_edge_detected() {
        let c = NetworkConfig::unchecked(vec![1, 2], vec![Bits::new(); 2], vec![(0, 1), (1, 1)]);
        assert_eq!(c.validate(), Err(Violation::SelfLoop { id: 2 }));
        let c = NetworkConfig::unchecked(vec![1, 2], vec![Bits::new(); 2], vec![(0, 1), (1, 0)]);
        assert_eq!(c.validate(), Err(Violation::MultiEdge { u: 1, v: 2 }));
    }

    #[test]
    fn ports_follow_neighbor_ids() {
        let c = NetworkConfig::from_id_edges(vec![5, 9, 2], &[(5, 9), (5, 2)]).unwrap();
        let ids: Vec<u64> = c.neighbors(0).iter().map(|&w| c.id(w)).collect();
        assert_eq!(ids, vec![2, 9]);
        assert_eq!(c.port_of(0, 1), Some(1));
    }
}
