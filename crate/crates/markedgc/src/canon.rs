//! Canonical labeling of multigraphs with legs.
//!
//! Color refinement plus individualization with backtracking. Parallel edges
//! enter vertex signatures through multiplicities. Two modes: with
//! `legs_labeled` an isomorphism must carry each vertex's leg-label multiset
//! to its image's; without, only per-vertex leg counts matter.

use crate::graph::Graph;
use std::collections::BTreeMap;

/// One relabeled graph, normalized for comparison.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Encoding {
    edges: Vec<(usize, usize)>,
    legs: Vec<(usize, Option<String>)>,
}

fn encode(g: &Graph, perm: &[usize], labeled: bool) -> Encoding {
    let mut edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .map(|&(u, v)| {
            let (a, b) = (perm[u], perm[v]);
            (a.min(b), a.max(b))
        })
        .collect();
    edges.sort_unstable();
    let mut legs: Vec<(usize, Option<String>)> = g
        .legs()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let label = if labeled {
                g.leg_labels().map(|ls| ls[i].clone())
            } else {
                None
            };
            (perm[v], label)
        })
        .collect();
    legs.sort();
    Encoding { edges, legs }
}

impl Encoding {
    fn key(&self, n: usize) -> String {
        let mut s = format!("V{n}|E");
        for (i, (u, v)) in self.edges.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&format!("{u}-{v}"));
        }
        s.push_str("|L");
        for (i, (v, label)) in self.legs.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            match label {
                Some(l) => s.push_str(&format!("{v}={l}")),
                None => s.push_str(&format!("{v}")),
            }
        }
        s
    }
}

fn initial_colors(g: &Graph, labeled: bool) -> Vec<usize> {
    let n = g.n_vertices();
    let mut invariants: Vec<(usize, usize, Vec<String>)> = (0..n)
        .map(|v| {
            let mut labels: Vec<String> = if labeled {
                match g.leg_labels() {
                    Some(ls) => g
                        .legs()
                        .iter()
                        .zip(ls)
                        .filter(|(&w, _)| w == v)
                        .map(|(_, l)| l.clone())
                        .collect(),
                    None => Vec::new(),
                }
            } else {
                Vec::new()
            };
            labels.sort();
            (g.degree(v), g.legs_at(v), labels)
        })
        .collect();
    let mut sorted = invariants.clone();
    sorted.sort();
    sorted.dedup();
    invariants
        .drain(..)
        .map(|inv| sorted.binary_search(&inv).unwrap())
        .collect()
}

/// Splits color classes by the multiset of neighbor colors (with edge
/// multiplicity) until stable. Never merges classes.
fn refine_with(neighbors: &[Vec<usize>], colors: &mut Vec<usize>) {
    let n = neighbors.len();
    let mut n_colors = colors.iter().max().map_or(0, |&c| c + 1);
    loop {
        let mut sigs: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|v| {
                let mut around: Vec<usize> = neighbors[v].iter().map(|&w| colors[w]).collect();
                around.sort_unstable();
                (colors[v], around)
            })
            .collect();
        let mut sorted = sigs.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() == n_colors {
            break;
        }
        n_colors = sorted.len();
        for (v, sig) in sigs.drain(..).enumerate() {
            colors[v] = sorted.binary_search(&sig).unwrap();
        }
    }
}

fn neighbor_lists(g: &Graph) -> Vec<Vec<usize>> {
    let mut neighbors = vec![Vec::new(); g.n_vertices()];
    for &(a, b) in g.edges() {
        neighbors[a].push(b);
        neighbors[b].push(a);
    }
    neighbors
}

/// Gives `v` its own class immediately before the rest of its old class.
fn individualize(colors: &[usize], v: usize) -> Vec<usize> {
    let c = colors[v];
    colors
        .iter()
        .enumerate()
        .map(|(w, &cw)| if w == v { c } else if cw >= c { cw + 1 } else { cw })
        .collect()
}

fn first_non_singleton(colors: &[usize]) -> Option<usize> {
    let mut counts = BTreeMap::new();
    for &c in colors {
        *counts.entry(c).or_insert(0usize) += 1;
    }
    counts.into_iter().find(|&(_, k)| k > 1).map(|(c, _)| c)
}

struct Search<'a> {
    g: &'a Graph,
    neighbors: Vec<Vec<usize>>,
    labeled: bool,
    best: Option<Encoding>,
    best_perms: Vec<Vec<usize>>,
}

impl<'a> Search<'a> {
    fn run(&mut self, colors: Vec<usize>) {
        match first_non_singleton(&colors) {
            None => {
                // discrete: the color of a vertex is its canonical id
                let enc = encode(self.g, &colors, self.labeled);
                match &self.best {
                    Some(b) if *b < enc => {}
                    Some(b) if *b == enc => self.best_perms.push(colors),
                    _ => {
                        self.best = Some(enc);
                        self.best_perms = vec![colors];
                    }
                }
            }
            Some(c) => {
                for v in 0..colors.len() {
                    if colors[v] == c {
                        let mut next = individualize(&colors, v);
                        refine_with(&self.neighbors, &mut next);
                        self.run(next);
                    }
                }
            }
        }
    }
}

fn canonical_search(g: &Graph, labeled: bool) -> (Encoding, Vec<Vec<usize>>) {
    let neighbors = neighbor_lists(g);
    let mut colors = initial_colors(g, labeled);
    refine_with(&neighbors, &mut colors);
    let mut search = Search { g, neighbors, labeled, best: None, best_perms: Vec::new() };
    search.run(colors);
    (search.best.unwrap(), search.best_perms)
}

/// Canonical representative and key. Isomorphic graphs (respecting leg
/// labels when `legs_labeled`) yield identical keys.
pub fn canonical_form(g: &Graph, legs_labeled: bool) -> (Graph, String) {
    let (enc, perms) = canonical_search(g, legs_labeled);
    let key = enc.key(g.n_vertices());
    let perm = &perms[0];
    // carry labels through the canonical permutation; within a vertex, legs
    // are ordered by label
    let (legs, labels) = match g.leg_labels() {
        Some(ls) => {
            let mut pairs: Vec<(usize, String)> = g
                .legs()
                .iter()
                .zip(ls)
                .map(|(&v, l)| (perm[v], l.clone()))
                .collect();
            pairs.sort();
            let legs = pairs.iter().map(|(v, _)| *v).collect();
            let labels = pairs.into_iter().map(|(_, l)| l).collect();
            (legs, Some(labels))
        }
        None => (enc.legs.iter().map(|(v, _)| *v).collect(), None),
    };
    let canon = Graph::new(g.n_vertices(), enc.edges.clone(), legs, labels)
        .expect("canonical relabeling preserves validity");
    (canon, key)
}

/// Canonical key only.
pub fn canonical_key(g: &Graph, legs_labeled: bool) -> String {
    canonical_search(g, legs_labeled).0.key(g.n_vertices())
}

/// The automorphism group of `g` as vertex permutations (old id -> old id).
pub fn automorphisms(g: &Graph, legs_labeled: bool) -> Vec<Vec<usize>> {
    let (_, perms) = canonical_search(g, legs_labeled);
    let base = &perms[0];
    // invert the first minimal permutation
    let n = g.n_vertices();
    let mut inv = vec![0usize; n];
    for (v, &c) in base.iter().enumerate() {
        inv[c] = v;
    }
    let mut auts: Vec<Vec<usize>> = perms
        .iter()
        .map(|p| (0..n).map(|v| inv[p[v]]).collect())
        .collect();
    auts.sort();
    auts.dedup();
    auts
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn dumbbell() -> Graph {
        Graph::new(4, vec![(0, 1), (0, 1), (1, 2), (2, 3), (2, 3)], vec![0, 3], None).unwrap()
    }

    fn theta() -> Graph {
        Graph::new(2, vec![(0, 1), (0, 1), (0, 1)], vec![], None).unwrap()
    }

    fn bubble_labeled(first: &str, second: &str) -> Graph {
        Graph::new(
            2,
            vec![(0, 1), (0, 1)],
            vec![0, 1],
            Some(vec![first.into(), second.into()]),
        )
        .unwrap()
    }

    /// Exhaustive isomorphism check, for validating the canonical key.
    pub(crate) fn brute_isomorphic(a: &Graph, b: &Graph, labeled: bool) -> bool {
        if a.n_vertices() != b.n_vertices() || a.n_edges() != b.n_edges() {
            return false;
        }
        let n = a.n_vertices();
        assert!(n <= 8, "brute-force isomorphism is for small graphs");
        let target = encode(b, &(0..n).collect::<Vec<_>>(), labeled);
        permutations(n).into_iter().any(|p| encode(a, &p, labeled) == target)
    }

    pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
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

    fn random_relabel(g: &Graph, rng: &mut impl Rng) -> Graph {
        let n = g.n_vertices();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        let relabeled = g.relabeled(&perm);
        Graph::new(
            n,
            relabeled.edges().to_vec(),
            relabeled.legs().to_vec(),
            relabeled.leg_labels().map(|l| l.to_vec()),
        )
        .unwrap()
    }

    #[test]
    fn dumbbell_key_is_relabeling_invariant() {
        let g = dumbbell();
        let key = canonical_key(&g, false);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let h = random_relabel(&g, &mut rng);
            assert_eq!(canonical_key(&h, false), key);
        }
    }

    #[test]
    fn theta_and_dumbbell_differ() {
        assert_ne!(canonical_key(&theta(), false), canonical_key(&dumbbell(), false));
    }

    #[test]
    fn bubble_label_swap_is_isomorphic() {
        let ab = bubble_labeled("a", "b");
        let ba = bubble_labeled("b", "a");
        assert_eq!(canonical_key(&ab, true), canonical_key(&ba, true));
    }

    #[test]
    fn distinct_labels_at_same_vertex_matter() {
        let g = Graph::new(
            2,
            vec![(0, 1)],
            vec![0, 0, 1, 1],
            Some(vec!["a".into(), "b".into(), "c".into(), "d".into()]),
        )
        .unwrap();
        let h = Graph::new(
            2,
            vec![(0, 1)],
            vec![0, 0, 1, 1],
            Some(vec!["a".into(), "c".into(), "b".into(), "d".into()]),
        )
        .unwrap();
        assert_ne!(canonical_key(&g, true), canonical_key(&h, true));
        // but unlabeled they agree
        assert_eq!(canonical_key(&g, false), canonical_key(&h, false));
    }

    #[test]
    fn key_equality_matches_brute_force_isomorphism() {
        let mut pool = vec![
            dumbbell(),
            theta(),
            bubble_labeled("a", "b"),
            Graph::new(3, vec![(0, 1), (1, 2), (0, 2)], vec![0, 1, 2], None).unwrap(),
            Graph::new(4, vec![(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)], vec![1, 3], None).unwrap(),
            Graph::new(4, vec![(0, 1), (0, 1), (1, 2), (2, 3), (2, 3)], vec![1, 2], None).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..pool.len() {
            let h = random_relabel(&pool[i], &mut rng);
            pool.push(h);
        }
        for labeled in [false, true] {
            for a in &pool {
                let (canon, key) = canonical_form(a, labeled);
                // the canonical representative reproduces its own key
                assert_eq!(canonical_key(&canon, labeled), key);
                for b in &pool {
                    let same = key == canonical_key(b, labeled);
                    assert_eq!(same, brute_isomorphic(a, b, labeled), "{a:?} vs {b:?}");
                }
            }
        }
    }

    #[test]
    fn automorphism_groups_match_brute_force() {
        for (g, labeled, expected_order) in [
            (dumbbell(), false, 2),
            (theta(), false, 2),
            (bubble_labeled("a", "b"), true, 1),
            (bubble_labeled("a", "b"), false, 2),
        ] {
            let auts = automorphisms(&g, labeled);
            assert_eq!(auts.len(), expected_order, "order for {g:?}");
            let n = g.n_vertices();
            let id: Vec<usize> = (0..n).collect();
            let brute: Vec<Vec<usize>> = permutations(n)
                .into_iter()
                .filter(|p| encode(&g, p, labeled) == encode(&g, &id, labeled))
                .collect();
            let mut brute = brute;
            brute.sort();
            assert_eq!(auts, brute);
        }
    }

    #[test]
    fn keys_separate_non_isomorphic_small_graphs() {
        // all 3-vertex connected multigraphs with <= 3 edges, pairwise
        let mut graphs = Vec::new();
        for edges in [
            vec![(0, 1), (1, 2)],
            vec![(0, 1), (1, 2), (0, 2)],
            vec![(0, 1), (0, 1), (1, 2)],
        ] {
            graphs.push(Graph::new(3, edges, vec![], None).unwrap());
        }
        for i in 0..graphs.len() {
            for j in i + 1..graphs.len() {
                let same_key =
                    canonical_key(&graphs[i], false) == canonical_key(&graphs[j], false);
                let iso = brute_isomorphic(&graphs[i], &graphs[j], false);
                assert_eq!(same_key, iso);
            }
        }
    }
}
