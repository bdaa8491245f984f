//! Exhaustive generation of the graph families: connected trivalent
//! multigraphs with `r` legs, first Betti number `l`, no self-loops.
//!
//! For a nonempty family the sizes are forced: `|V| = r + 2(l-1)` and
//! `|E| = r + 3(l-1)`. The production generator distributes legs as a
//! non-increasing count vector and fills the remaining valence row by row;
//! a second, independently structured generator (all leg vectors, global
//! lexicographic edge multisets) backs it as an oracle. Both reject
//! duplicates through canonical keys.

use crate::canon::{automorphisms, canonical_form};
use crate::conflict::{cycle_system, edge_system, mixed_system, vertex_system_of_graph, ConflictError};
use crate::graph::{Graph, GraphError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnumerateError {
    #[error("family (r = {r}, l = {l}) forces {required} internal vertices, above the bound {bound}")]
    TooManyVertices { r: usize, l: usize, required: usize, bound: usize },
    #[error("labeled oracle enumeration is limited to r <= {limit}, got r = {r}")]
    LabeledOracleTooLarge { r: usize, limit: usize },
    #[error(transparent)]
    Conflict(#[from] ConflictError),
}

/// Which family to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub r: usize,
    pub l: usize,
    /// Legs carry distinguishing labels (the default); unlabeled mode
    /// quotients by leg permutations.
    pub legs_labeled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerateLimits {
    pub max_vertices: usize,
}

impl Default for EnumerateLimits {
    fn default() -> Self {
        EnumerateLimits { max_vertices: 12 }
    }
}

/// Vertex and edge counts forced by 3-regularity, or `None` for an empty
/// family.
pub fn forced_sizes(r: usize, l: usize) -> Option<(usize, usize)> {
    let nv = r as isize + 2 * l as isize - 2;
    if nv < 1 {
        return None;
    }
    let ne = nv + l as isize - 1;
    Some((nv as usize, ne as usize))
}

fn leg_list(counts: &[usize]) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(v, &c)| std::iter::repeat(v).take(c))
        .collect()
}

/// Non-increasing vectors of length `parts` with the given sum, entries
/// bounded by `cap`.
fn sorted_compositions(sum: usize, parts: usize, cap: usize) -> Vec<Vec<usize>> {
    fn rec(sum: usize, parts: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if sum == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        let hi = max.min(sum);
        for c in (0..=hi).rev() {
            if sum - c <= c * (parts - 1) {
                prefix.push(c);
                rec(sum - c, parts - 1, c, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(sum, parts, cap, &mut Vec::new(), &mut out);
    out
}

/// Every vector of length `parts` with the given sum and entries `<= cap`.
fn all_compositions(sum: usize, parts: usize, cap: usize) -> Vec<Vec<usize>> {
    fn rec(sum: usize, parts: usize, cap: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if sum == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        for c in 0..=cap.min(sum) {
            if sum - c <= cap * (parts - 1) {
                prefix.push(c);
                rec(sum - c, parts - 1, cap, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(sum, parts, cap, &mut Vec::new(), &mut out);
    out
}

/// Row-by-row fill of the upper-triangular edge multiplicities for the given
/// internal degrees.
fn fill_rows(degrees: &[usize], mut emit: impl FnMut(&[(usize, usize)])) {
    let n = degrees.len();
    let mut rem = degrees.to_vec();
    let mut edges: Vec<(usize, usize)> = Vec::new();

    fn row(
        v: usize,
        w: usize,
        n: usize,
        rem: &mut Vec<usize>,
        edges: &mut Vec<(usize, usize)>,
        emit: &mut impl FnMut(&[(usize, usize)]),
    ) {
        if v == n {
            if rem.iter().all(|&x| x == 0) {
                emit(edges);
            }
            return;
        }
        if rem[v] == 0 {
            row(v + 1, v + 2, n, rem, edges, emit);
            return;
        }
        if w >= n {
            return;
        }
        // capacity left among later partners
        let capacity: usize = (w..n).map(|x| rem[x]).sum();
        if capacity < rem[v] {
            return;
        }
        let hi = rem[v].min(rem[w]);
        for mult in (0..=hi).rev() {
            rem[v] -= mult;
            rem[w] -= mult;
            for _ in 0..mult {
                edges.push((v, w));
            }
            row(v, w + 1, n, rem, edges, emit);
            for _ in 0..mult {
                edges.pop();
            }
            rem[v] += mult;
            rem[w] += mult;
        }
    }

    row(0, 1, n, &mut rem, &mut edges, &mut emit);
}

/// Global lexicographic enumeration of edge multisets for the given degrees;
/// the next edge always involves the smallest unsaturated vertex.
fn fill_lex(degrees: &[usize], mut emit: impl FnMut(&[(usize, usize)])) {
    let n = degrees.len();
    let mut rem = degrees.to_vec();
    let mut edges: Vec<(usize, usize)> = Vec::new();

    fn rec(
        n: usize,
        last: (usize, usize),
        rem: &mut Vec<usize>,
        edges: &mut Vec<(usize, usize)>,
        emit: &mut impl FnMut(&[(usize, usize)]),
    ) {
        let Some(v) = (0..n).find(|&x| rem[x] > 0) else {
            emit(edges);
            return;
        };
        // edges are chosen in non-decreasing order, so a vertex before the
        // current frontier can never be completed later
        if v < last.0 {
            return;
        }
        let w_start = if v == last.0 { last.1 } else { v + 1 };
        for w in w_start..n {
            if w > v && rem[w] > 0 {
                rem[v] -= 1;
                rem[w] -= 1;
                edges.push((v, w));
                rec(n, (v, w), rem, edges, emit);
                edges.pop();
                rem[v] += 1;
                rem[w] += 1;
            }
        }
    }

    rec(n, (0, 1), &mut rem, &mut edges, &mut emit);
}

fn collect_family(
    nv: usize,
    r: usize,
    leg_vectors: &[Vec<usize>],
    lex: bool,
) -> BTreeMap<String, Graph> {
    // leg vectors are independent work items; the merged key set does not
    // depend on the traversal order
    leg_vectors
        .par_iter()
        .map(|counts| {
            debug_assert_eq!(counts.iter().sum::<usize>(), r);
            let degrees: Vec<usize> = counts.iter().map(|&c| 3 - c).collect();
            let legs = leg_list(counts);
            let mut local: BTreeMap<String, Graph> = BTreeMap::new();
            let mut sink = |edges: &[(usize, usize)]| {
                match Graph::new(nv, edges.to_vec(), legs.clone(), None) {
                    Ok(g) => {
                        let (canon, key) = canonical_form(&g, false);
                        local.entry(key).or_insert(canon);
                    }
                    Err(GraphError::Disconnected) => {}
                    Err(e) => unreachable!("generated graph invalid: {e}"),
                }
            };
            if lex {
                fill_lex(&degrees, &mut sink);
            } else {
                fill_rows(&degrees, &mut sink);
            }
            local
        })
        .reduce(BTreeMap::new, |mut acc, local| {
            for (k, g) in local {
                acc.entry(k).or_insert(g);
            }
            acc
        })
}

fn label_names(r: usize) -> Vec<String> {
    (1..=r).map(|i| i.to_string()).collect()
}

/// Expands each unlabeled class into labeled classes: orbits of the
/// automorphism group acting on the assignments of distinct labels to leg
/// slots (legs at a common vertex are interchangeable).
fn expand_labeled(reps: Vec<Graph>, r: usize) -> Vec<Graph> {
    let names = label_names(r);
    let mut out: BTreeMap<String, Graph> = BTreeMap::new();
    for rep in reps {
        let auts = automorphisms(&rep, false);
        let n = rep.n_vertices();
        let capacity: Vec<usize> = (0..n).map(|v| rep.legs_at(v)).collect();
        // assignment[label] = vertex
        let mut assignment = vec![0usize; r];
        let mut seen_orbit = std::collections::BTreeSet::new();
        enumerate_assignments(0, r, &capacity, &mut vec![0; n], &mut assignment, &mut |a| {
            let orbit = orbit_key(a, &auts, n);
            if !seen_orbit.insert(orbit) {
                return;
            }
            // lay labels out on the sorted leg list of the representative
            let mut per_vertex: Vec<Vec<usize>> = vec![Vec::new(); n];
            for (label, &v) in a.iter().enumerate() {
                per_vertex[v].push(label);
            }
            let mut legs = Vec::with_capacity(r);
            let mut labels = Vec::with_capacity(r);
            for v in 0..n {
                for &label in &per_vertex[v] {
                    legs.push(v);
                    labels.push(names[label].clone());
                }
            }
            let g = Graph::new(n, rep.edges().to_vec(), legs, Some(labels))
                .expect("labeled variant of a valid graph");
            let (canon, key) = canonical_form(&g, true);
            out.entry(key).or_insert(canon);
        });
    }
    out.into_values().collect()
}

fn enumerate_assignments(
    label: usize,
    r: usize,
    capacity: &[usize],
    used: &mut Vec<usize>,
    assignment: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]),
) {
    if label == r {
        emit(assignment);
        return;
    }
    for v in 0..capacity.len() {
        if used[v] < capacity[v] {
            used[v] += 1;
            assignment[label] = v;
            enumerate_assignments(label + 1, r, capacity, used, assignment, emit);
            used[v] -= 1;
        }
    }
}

/// Canonical form of a label assignment under the vertex automorphisms:
/// the minimum over the group of the per-vertex label sets.
fn orbit_key(assignment: &[usize], auts: &[Vec<usize>], n: usize) -> Vec<Vec<usize>> {
    auts.iter()
        .map(|aut| {
            let mut table: Vec<Vec<usize>> = vec![Vec::new(); n];
            for (label, &v) in assignment.iter().enumerate() {
                table[aut[v]].push(label);
            }
            table
        })
        .min()
        .unwrap()
}

/// The complete duplicate-free family, as canonical representatives sorted
/// by canonical key.
pub fn enumerate_graphs(
    spec: &FamilySpec,
    limits: &EnumerateLimits,
) -> Result<Vec<Graph>, EnumerateError> {
    let Some((nv, _)) = forced_sizes(spec.r, spec.l) else {
        return Ok(Vec::new());
    };
    if nv > limits.max_vertices {
        return Err(EnumerateError::TooManyVertices {
            r: spec.r,
            l: spec.l,
            required: nv,
            bound: limits.max_vertices,
        });
    }
    let vectors = sorted_compositions(spec.r, nv, 3);
    let by_key = collect_family(nv, spec.r, &vectors, false);
    let reps: Vec<Graph> = by_key.into_values().collect();
    if spec.legs_labeled {
        Ok(expand_labeled(reps, spec.r))
    } else {
        Ok(reps)
    }
}

/// Independent oracle generator: every leg vector (not only the sorted
/// ones), lexicographic edge-multiset search, and for the labeled mode a
/// plain sweep over all label permutations.
pub fn enumerate_graphs_oracle(
    spec: &FamilySpec,
    limits: &EnumerateLimits,
) -> Result<Vec<Graph>, EnumerateError> {
    const LABELED_ORACLE_LIMIT: usize = 6;
    let Some((nv, _)) = forced_sizes(spec.r, spec.l) else {
        return Ok(Vec::new());
    };
    if nv > limits.max_vertices {
        return Err(EnumerateError::TooManyVertices {
            r: spec.r,
            l: spec.l,
            required: nv,
            bound: limits.max_vertices,
        });
    }
    let vectors = all_compositions(spec.r, nv, 3);
    let by_key = collect_family(nv, spec.r, &vectors, true);
    if !spec.legs_labeled {
        return Ok(by_key.into_values().collect());
    }
    if spec.r > LABELED_ORACLE_LIMIT {
        return Err(EnumerateError::LabeledOracleTooLarge {
            r: spec.r,
            limit: LABELED_ORACLE_LIMIT,
        });
    }
    let names = label_names(spec.r);
    let mut out: BTreeMap<String, Graph> = BTreeMap::new();
    for rep in by_key.into_values() {
        for perm in permutations_of(spec.r) {
            let labels: Vec<String> = perm.iter().map(|&i| names[i].clone()).collect();
            let g = Graph::new(rep.n_vertices(), rep.edges().to_vec(), rep.legs().to_vec(), Some(labels))
                .expect("labeled variant of a valid graph");
            let (canon, key) = canonical_form(&g, true);
            out.entry(key).or_insert(canon);
        }
    }
    Ok(out.into_values().collect())
}

fn permutations_of(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for p in out {
            for v in 0..n {
                if !p.contains(&v) {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out
}

/// One census row per graph of the family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub key: String,
    pub n_edges: usize,
    pub n_cycles: usize,
    pub edge_markings: u64,
    pub cycle_markings: u64,
    pub vertex_markings: u64,
    pub mixed_markings: u64,
}

/// Key, sizes and admissible-marking counts for every graph of the family.
pub fn family_census(
    spec: &FamilySpec,
    limits: &EnumerateLimits,
) -> Result<Vec<CensusRow>, EnumerateError> {
    let graphs = enumerate_graphs(spec, limits)?;
    let mut rows = Vec::with_capacity(graphs.len());
    for g in &graphs {
        let (_, key) = canonical_form(g, spec.legs_labeled);
        let edge = edge_system(g, &key)?;
        let cycle = cycle_system(g, &key)?;
        let vertex = vertex_system_of_graph(g, &key)?;
        let mixed = mixed_system(g, &key)?;
        rows.push(CensusRow {
            key,
            n_edges: g.n_edges(),
            n_cycles: cycle.len(),
            edge_markings: edge.admissible_marking_count(),
            cycle_markings: cycle.admissible_marking_count(),
            vertex_markings: vertex.admissible_marking_count(),
            mixed_markings: mixed.admissible_marking_count(),
        });
    }
    Ok(rows)
}
