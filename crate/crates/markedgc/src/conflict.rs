//! Conflict systems: the markable elements of a graph with their
//! shared-vertex relation.
//!
//! A conflict system is a totally ordered list of elements (edges, cycles or
//! vertices) plus a symmetric irreflexive conflict relation. The element
//! order is the index order and feeds every sign computation downstream.

use crate::graph::{enumerate_cycles, Cycle, Graph, GraphError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard cap on system size; conflict masks are `u128` bitsets.
pub const MAX_ELEMENTS: usize = 128;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConflictError {
    #[error("conflict system has {0} elements (limit {MAX_ELEMENTS})")]
    TooManyElements(usize),
    #[error("conflict pair ({0}, {1}) out of range")]
    PairOutOfRange(usize, usize),
    #[error("element {0} conflicts with itself")]
    SelfConflict(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Edge,
    Cycle,
    Vertex,
}

/// Ordered markable elements with a symmetric conflict relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictSystem {
    key: String,
    sectors: Vec<Sector>,
    labels: Vec<String>,
    adj: Vec<u128>,
}

impl ConflictSystem {
    pub fn new(
        key: String,
        sectors: Vec<Sector>,
        labels: Vec<String>,
        conflicts: &[(usize, usize)],
    ) -> Result<Self, ConflictError> {
        let n = sectors.len();
        assert_eq!(labels.len(), n);
        if n > MAX_ELEMENTS {
            return Err(ConflictError::TooManyElements(n));
        }
        let mut adj = vec![0u128; n];
        for &(a, b) in conflicts {
            if a >= n || b >= n {
                return Err(ConflictError::PairOutOfRange(a, b));
            }
            if a == b {
                return Err(ConflictError::SelfConflict(a));
            }
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        Ok(ConflictSystem { key, sectors, labels, adj })
    }

    pub fn len(&self) -> usize {
        self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn sector(&self, id: usize) -> Sector {
        self.sectors[id]
    }

    pub fn label(&self, id: usize) -> &str {
        &self.labels[id]
    }

    pub fn conflicts(&self, a: usize, b: usize) -> bool {
        self.adj[a] >> b & 1 == 1
    }

    pub fn conflict_mask(&self, id: usize) -> u128 {
        self.adj[id]
    }

    /// Bitmask of the elements belonging to `sector`.
    pub fn sector_mask(&self, sector: Sector) -> u128 {
        self.sectors
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == sector)
            .fold(0u128, |m, (i, _)| m | 1 << i)
    }

    /// True iff no two elements of `mask` conflict.
    pub fn is_independent(&self, mask: u128) -> bool {
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if self.adj[i] & mask != 0 {
                return false;
            }
        }
        true
    }

    /// All conflict-free element sets up to `max_size`, the empty set first,
    /// then in lexicographic order of the id sequence.
    pub fn independent_sets(&self, max_size: Option<usize>) -> Vec<Vec<usize>> {
        let cap = max_size.unwrap_or(self.len());
        let mut out = Vec::new();
        let mut current = Vec::new();
        self.independent_rec(0, 0u128, cap, &mut current, &mut out);
        out
    }

    fn independent_rec(
        &self,
        start: usize,
        blocked: u128,
        cap: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        out.push(current.clone());
        if current.len() == cap {
            return;
        }
        for v in start..self.len() {
            if blocked >> v & 1 == 0 {
                current.push(v);
                self.independent_rec(v + 1, blocked | self.adj[v] | 1 << v, cap, current, out);
                current.pop();
            }
        }
    }

    /// Number of admissible markings: sum of `2^|I|` over independent sets.
    pub fn admissible_marking_count(&self) -> u64 {
        self.independent_sets(None)
            .iter()
            .map(|s| 1u64 << s.len())
            .sum()
    }

    /// The conflict graph: one vertex per element, one edge per conflict.
    pub fn conflict_graph(&self) -> (usize, Vec<(usize, usize)>) {
        let mut edges = Vec::new();
        for a in 0..self.len() {
            for b in a + 1..self.len() {
                if self.conflicts(a, b) {
                    edges.push((a, b));
                }
            }
        }
        (self.len(), edges)
    }

    /// Same elements in a new order: `perm[new_id] = old_id`.
    pub fn reordered(&self, perm: &[usize]) -> ConflictSystem {
        assert_eq!(perm.len(), self.len());
        let sectors = perm.iter().map(|&o| self.sectors[o]).collect();
        let labels = perm.iter().map(|&o| self.labels[o].clone()).collect();
        let mut old_to_new = vec![0usize; self.len()];
        for (new, &old) in perm.iter().enumerate() {
            old_to_new[old] = new;
        }
        let mut adj = vec![0u128; self.len()];
        for (new, &old) in perm.iter().enumerate() {
            let mut rest = self.adj[old];
            while rest != 0 {
                let o = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                adj[new] |= 1 << old_to_new[o];
            }
        }
        ConflictSystem { key: format!("{}#reordered", self.key), sectors, labels, adj }
    }
}

fn share_vertex_edge_edge(e: &(usize, usize), f: &(usize, usize)) -> bool {
    e.0 == f.0 || e.0 == f.1 || e.1 == f.0 || e.1 == f.1
}

fn share_vertex_edge_cycle(e: &(usize, usize), c: &Cycle) -> bool {
    c.vertex_ids.binary_search(&e.0).is_ok() || c.vertex_ids.binary_search(&e.1).is_ok()
}

fn share_vertex_cycle_cycle(c: &Cycle, d: &Cycle) -> bool {
    c.vertex_ids.iter().any(|v| d.vertex_ids.binary_search(v).is_ok())
}

/// One element per internal edge; conflict iff two edges share a vertex.
pub fn edge_system(g: &Graph, graph_key: &str) -> Result<ConflictSystem, ConflictError> {
    let sectors = vec![Sector::Edge; g.n_edges()];
    let labels = (0..g.n_edges()).map(|i| format!("e{i}")).collect();
    let mut conflicts = Vec::new();
    for a in 0..g.n_edges() {
        for b in a + 1..g.n_edges() {
            if share_vertex_edge_edge(&g.edges()[a], &g.edges()[b]) {
                conflicts.push((a, b));
            }
        }
    }
    ConflictSystem::new(format!("{graph_key}#edge"), sectors, labels, &conflicts)
}

/// One element per cycle, in enumeration order; conflict iff two cycles
/// share a vertex.
pub fn cycle_system(g: &Graph, graph_key: &str) -> Result<ConflictSystem, ConflictError> {
    let cycles = enumerate_cycles(g)?;
    let sectors = vec![Sector::Cycle; cycles.len()];
    let labels = (0..cycles.len()).map(|i| format!("c{i}")).collect();
    let mut conflicts = Vec::new();
    for a in 0..cycles.len() {
        for b in a + 1..cycles.len() {
            if share_vertex_cycle_cycle(&cycles[a], &cycles[b]) {
                conflicts.push((a, b));
            }
        }
    }
    ConflictSystem::new(format!("{graph_key}#cycle"), sectors, labels, &conflicts)
}

/// All edges followed by all cycles; conflict iff the two objects share a
/// vertex (an edge lying on a cycle conflicts with it).
pub fn mixed_system(g: &Graph, graph_key: &str) -> Result<ConflictSystem, ConflictError> {
    let cycles = enumerate_cycles(g)?;
    let ne = g.n_edges();
    let mut sectors = vec![Sector::Edge; ne];
    sectors.extend(vec![Sector::Cycle; cycles.len()]);
    let mut labels: Vec<String> = (0..ne).map(|i| format!("e{i}")).collect();
    labels.extend((0..cycles.len()).map(|i| format!("c{i}")));
    let mut conflicts = Vec::new();
    for a in 0..ne {
        for b in a + 1..ne {
            if share_vertex_edge_edge(&g.edges()[a], &g.edges()[b]) {
                conflicts.push((a, b));
            }
        }
        for (j, c) in cycles.iter().enumerate() {
            if share_vertex_edge_cycle(&g.edges()[a], c) {
                conflicts.push((a, ne + j));
            }
        }
    }
    for a in 0..cycles.len() {
        for b in a + 1..cycles.len() {
            if share_vertex_cycle_cycle(&cycles[a], &cycles[b]) {
                conflicts.push((ne + a, ne + b));
            }
        }
    }
    ConflictSystem::new(format!("{graph_key}#mixed"), sectors, labels, &conflicts)
}

/// Marks the internal vertices of `g` itself; conflict iff adjacent.
pub fn vertex_system_of_graph(g: &Graph, graph_key: &str) -> Result<ConflictSystem, ConflictError> {
    let n = g.n_vertices();
    let mut conflicts = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if g.edges().iter().any(|&(u, v)| (u, v) == (a, b) || (u, v) == (b, a)) {
                conflicts.push((a, b));
            }
        }
    }
    vertex_system(n, &conflicts, &format!("{graph_key}#vertex"))
}

/// Vertex-marking system of an abstract simple graph given by its edges.
pub fn vertex_system(
    n: usize,
    edges: &[(usize, usize)],
    key: &str,
) -> Result<ConflictSystem, ConflictError> {
    let sectors = vec![Sector::Vertex; n];
    let labels = (0..n).map(|i| format!("v{i}")).collect();
    ConflictSystem::new(key.to_string(), sectors, labels, edges)
}
