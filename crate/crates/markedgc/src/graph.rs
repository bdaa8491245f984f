//! Connected multigraphs with external legs.
//!
//! Internal vertices carry ids `0..n`, edges are an *ordered* sequence of
//! unordered vertex pairs (parallel edges allowed, self-loops rejected), and
//! legs are external half-edges attached to internal vertices. The position
//! of an edge in the sequence is its id; that order is load-bearing for the
//! sign conventions downstream, so it is never silently reshuffled.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one internal vertex")]
    Empty,
    #[error("edge {edge} endpoint {vertex} out of range (n = {n})")]
    EndpointOutOfRange { edge: usize, vertex: usize, n: usize },
    #[error("edge {edge} is a self-loop at vertex {vertex}")]
    SelfLoop { edge: usize, vertex: usize },
    #[error("leg {leg} attached to vertex {vertex} out of range (n = {n})")]
    LegOutOfRange { leg: usize, vertex: usize, n: usize },
    #[error("graph is not connected on its internal vertices")]
    Disconnected,
    #[error("{labels} leg labels given for {legs} legs")]
    LabelCountMismatch { labels: usize, legs: usize },
    #[error("duplicate leg label {0:?}")]
    DuplicateLabel(String),
    #[error("too many edges for cycle enumeration: {edges} (limit 64)")]
    TooManyEdges { edges: usize },
    #[error("cycle space dimension {loops} too large to enumerate (limit 24)")]
    TooManyLoops { loops: usize },
}

/// A finite connected multigraph with legs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    legs: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    leg_labels: Option<Vec<String>>,
}

impl Graph {
    /// Validates endpoints, self-loops, leg attachment and connectivity.
    pub fn new(
        n: usize,
        edges: Vec<(usize, usize)>,
        legs: Vec<usize>,
        leg_labels: Option<Vec<String>>,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= n {
                return Err(GraphError::EndpointOutOfRange { edge: i, vertex: u, n });
            }
            if v >= n {
                return Err(GraphError::EndpointOutOfRange { edge: i, vertex: v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop { edge: i, vertex: u });
            }
        }
        for (i, &v) in legs.iter().enumerate() {
            if v >= n {
                return Err(GraphError::LegOutOfRange { leg: i, vertex: v, n });
            }
        }
        if let Some(labels) = &leg_labels {
            if labels.len() != legs.len() {
                return Err(GraphError::LabelCountMismatch {
                    labels: labels.len(),
                    legs: legs.len(),
                });
            }
            let mut seen = std::collections::BTreeSet::new();
            for l in labels {
                if !seen.insert(l) {
                    return Err(GraphError::DuplicateLabel(l.clone()));
                }
            }
        }
        let g = Graph { n, edges, legs, leg_labels };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn legs(&self) -> &[usize] {
        &self.legs
    }

    pub fn leg_labels(&self) -> Option<&[String]> {
        self.leg_labels.as_deref()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Internal degree of `v` (legs not counted).
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    /// Number of legs attached to `v`.
    pub fn legs_at(&self, v: usize) -> usize {
        self.legs.iter().filter(|&&w| w == v).count()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(a, b) in &self.edges {
                let w = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Relabels internal vertices by `perm` (old id -> new id). Edge order is
    /// preserved; each pair is stored with the smaller endpoint first.
    pub fn relabeled(&self, perm: &[usize]) -> Graph {
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (perm[u], perm[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        let legs = self.legs.iter().map(|&v| perm[v]).collect();
        Graph { n: self.n, edges, legs, leg_labels: self.leg_labels.clone() }
    }
}

/// Coarse classification of a graph: leg count, loop order, 3-regularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphClass {
    pub r: usize,
    pub l: usize,
    pub regular3: bool,
}

/// Leg count, first Betti number and the trivalence flag.
///
/// Never rejects non-3-regular input; malformed graphs are already rejected
/// by [`Graph::new`].
pub fn classify(g: &Graph) -> GraphClass {
    let r = g.legs().len();
    // connected, so |E| >= |V| - 1
    let l = g.n_edges() + 1 - g.n_vertices();
    let regular3 = (0..g.n_vertices()).all(|v| g.degree(v) + g.legs_at(v) == 3);
    GraphClass { r, l, regular3 }
}

/// A cycle: a connected subgraph meeting every vertex in zero or two edges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cycle {
    /// Sorted edge ids.
    pub edge_ids: Vec<usize>,
    /// Sorted ids of the visited vertices.
    pub vertex_ids: Vec<usize>,
}

/// True iff the edge subset given by `mask` is a cycle of `g`.
pub fn is_cycle_mask(g: &Graph, mask: u64) -> bool {
    if mask == 0 {
        return false;
    }
    let mut deg = vec![0usize; g.n_vertices()];
    for (i, &(u, v)) in g.edges().iter().enumerate() {
        if mask >> i & 1 == 1 {
            deg[u] += 1;
            deg[v] += 1;
        }
    }
    if deg.iter().any(|&d| d != 0 && d != 2) {
        return false;
    }
    // connectivity of the support
    let Some(start) = deg.iter().position(|&d| d > 0) else {
        return false;
    };
    let mut seen = vec![false; g.n_vertices()];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for (i, &(a, b)) in g.edges().iter().enumerate() {
            if mask >> i & 1 == 0 {
                continue;
            }
            let w = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    (0..g.n_vertices()).all(|v| deg[v] == 0 || seen[v])
}

fn cycle_from_mask(g: &Graph, mask: u64) -> Cycle {
    let mut edge_ids = Vec::new();
    let mut verts = std::collections::BTreeSet::new();
    for (i, &(u, v)) in g.edges().iter().enumerate() {
        if mask >> i & 1 == 1 {
            edge_ids.push(i);
            verts.insert(u);
            verts.insert(v);
        }
    }
    Cycle { edge_ids, vertex_ids: verts.into_iter().collect() }
}

/// All cycles of `g`, ordered lexicographically by sorted edge-id set.
///
/// Every cycle is an even edge subset, hence a nonzero element of the cycle
/// space; the space is spanned by the fundamental cycles of a spanning tree,
/// so scanning its `2^l - 1` nonzero elements and keeping those that satisfy
/// the cycle predicate is exhaustive.
pub fn enumerate_cycles(g: &Graph) -> Result<Vec<Cycle>, GraphError> {
    let ne = g.n_edges();
    if ne > 64 {
        return Err(GraphError::TooManyEdges { edges: ne });
    }
    let loops = ne + 1 - g.n_vertices();
    if loops > 24 {
        return Err(GraphError::TooManyLoops { loops });
    }
    if loops == 0 {
        return Ok(Vec::new());
    }

    // spanning tree by BFS; record each vertex's tree path to the root as an
    // edge mask
    let n = g.n_vertices();
    let mut in_tree = vec![false; ne];
    let mut path = vec![0u64; n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for (i, &(a, b)) in g.edges().iter().enumerate() {
            let w = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if !seen[w] {
                seen[w] = true;
                in_tree[i] = true;
                path[w] = path[v] ^ (1u64 << i);
                queue.push_back(w);
            }
        }
    }

    let fundamental: Vec<u64> = (0..ne)
        .filter(|&i| !in_tree[i])
        .map(|i| {
            let (u, v) = g.edges()[i];
            path[u] ^ path[v] ^ (1u64 << i)
        })
        .collect();
    debug_assert_eq!(fundamental.len(), loops);

    let mut cycles = Vec::new();
    for combo in 1u64..(1 << loops) {
        let mut mask = 0u64;
        for (k, f) in fundamental.iter().enumerate() {
            if combo >> k & 1 == 1 {
                mask ^= f;
            }
        }
        if is_cycle_mask(g, mask) {
            cycles.push(cycle_from_mask(g, mask));
        }
    }
    cycles.sort();
    Ok(cycles)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn dumbbell() -> Graph {
        // two 2-cycles joined by a bridge, one leg at each end
        Graph::new(
            4,
            vec![(0, 1), (0, 1), (1, 2), (2, 3), (2, 3)],
            vec![0, 3],
            None,
        )
        .unwrap()
    }

    pub(crate) fn bubble() -> Graph {
        Graph::new(2, vec![(0, 1), (0, 1)], vec![0, 1], None).unwrap()
    }

    pub(crate) fn theta() -> Graph {
        Graph::new(2, vec![(0, 1), (0, 1), (0, 1)], vec![], None).unwrap()
    }

    #[test]
    fn rejects_self_loop_naming_edge() {
        let err = Graph::new(2, vec![(0, 1), (1, 1)], vec![], None).unwrap_err();
        assert_eq!(err, GraphError::SelfLoop { edge: 1, vertex: 1 });
    }

    #[test]
    fn rejects_out_of_range_endpoint() {
        let err = Graph::new(2, vec![(0, 2)], vec![], None).unwrap_err();
        assert_eq!(err, GraphError::EndpointOutOfRange { edge: 0, vertex: 2, n: 2 });
    }

    #[test]
    fn rejects_disconnected() {
        let err = Graph::new(4, vec![(0, 1), (0, 1), (2, 3), (2, 3)], vec![], None).unwrap_err();
        assert_eq!(err, GraphError::Disconnected);
    }

    #[test]
    fn classify_bubble() {
        let c = classify(&bubble());
        assert_eq!(c, GraphClass { r: 2, l: 1, regular3: true });
    }

    #[test]
    fn classify_dumbbell() {
        let c = classify(&dumbbell());
        assert_eq!(c, GraphClass { r: 2, l: 2, regular3: true });
    }

    #[test]
    fn classify_single_edge_four_legs() {
        let g = Graph::new(2, vec![(0, 1)], vec![0, 0, 1, 1], None).unwrap();
        let c = classify(&g);
        assert_eq!(c, GraphClass { r: 4, l: 0, regular3: true });
    }

    #[test]
    fn regular3_formulas_hold() {
        for g in [dumbbell(), bubble(), theta()] {
            let c = classify(&g);
            assert!(c.regular3);
            assert_eq!(g.n_vertices(), c.r + 2 * c.l - 2);
            assert_eq!(g.n_edges(), c.r + 3 * c.l - 3);
        }
    }

    #[test]
    fn dumbbell_cycles() {
        let cycles = enumerate_cycles(&dumbbell()).unwrap();
        assert_eq!(cycles.len(), 2);
        assert_eq!(cycles[0].edge_ids, vec![0, 1]);
        assert_eq!(cycles[0].vertex_ids, vec![0, 1]);
        assert_eq!(cycles[1].edge_ids, vec![3, 4]);
        assert_eq!(cycles[1].vertex_ids, vec![2, 3]);
    }

    #[test]
    fn tree_has_no_cycles() {
        let g = Graph::new(2, vec![(0, 1)], vec![0, 0, 1, 1], None).unwrap();
        assert!(enumerate_cycles(&g).unwrap().is_empty());
    }

    #[test]
    fn theta_has_three_cycles() {
        let cycles = enumerate_cycles(&theta()).unwrap();
        let sets: Vec<_> = cycles.iter().map(|c| c.edge_ids.clone()).collect();
        assert_eq!(sets, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn cycle_outputs_satisfy_predicate() {
        for g in [dumbbell(), bubble(), theta()] {
            for c in enumerate_cycles(&g).unwrap() {
                let mask = c.edge_ids.iter().fold(0u64, |m, &i| m | 1 << i);
                assert!(is_cycle_mask(&g, mask));
                assert_eq!(c.edge_ids.len(), c.vertex_ids.len());
                assert!(c.edge_ids.len() >= 2);
            }
        }
    }
}
