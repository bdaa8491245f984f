//! Graded bases of admissible markings and the matrices of the
//! differentials acting between them.
//!
//! The cochain degree of a marking is its number of 2-marks; the finer
//! bigrading also tracks 1-marks. Bases are ordered lexicographically by
//! value vector, so matrices are reproducible and two systems with equal
//! conflict data produce equal matrices.

use crate::conflict::{ConflictError, ConflictSystem, Sector};
use crate::marking::{
    apply_d, apply_delta, apply_full, apply_total, Chain, Marking, MarkingError, Scope, SignFault,
};
use std::collections::BTreeMap;
use thiserror::Error;

/// Default cap on the dimension of a single graded piece.
pub const DEFAULT_MAX_GRADE_DIM: usize = 200_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error(transparent)]
    Conflict(#[from] ConflictError),
    #[error(transparent)]
    Marking(#[from] MarkingError),
    #[error("graded piece (twos = {twos}) has {dim} markings, exceeding the bound {bound}")]
    GradeTooLarge { twos: usize, dim: usize, bound: usize },
    #[error("grade {0} out of range (max {1})")]
    GradeOutOfRange(usize, usize),
    #[error("differential left the graded basis at marking {0}")]
    TargetNotInBasis(String),
    #[error("kind {0:?} has no homogeneous bigraded matrix")]
    NotBigraded(DiffKind),
}

/// Which differential to realize as a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffKind {
    /// Exchange only (1-mark to 2-mark).
    Delta,
    /// Promotion only (0 to 2-mark).
    Dee,
    /// Exchange plus promotion.
    Full,
    /// Exchange plus promotion restricted to one sector.
    SectorFull(Sector),
    /// Edge part plus `(-1)^n` times the cycle part.
    Total,
}

impl DiffKind {
    fn apply(
        &self,
        cs: &ConflictSystem,
        m: &Marking,
        fault: SignFault,
    ) -> Result<Chain, MarkingError> {
        match *self {
            DiffKind::Delta => apply_delta(cs, m, Scope::All, fault),
            DiffKind::Dee => apply_d(cs, m, Scope::All, fault),
            DiffKind::Full => apply_full(cs, m, Scope::All, fault),
            DiffKind::SectorFull(s) => apply_full(cs, m, Scope::Sector(s), fault),
            DiffKind::Total => apply_total(cs, m, fault),
        }
    }
}

/// Integer matrix of a differential between two ordered marking bases.
/// Rows index the target basis, columns the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferentialMatrix {
    pub rows: Vec<Marking>,
    pub cols: Vec<Marking>,
    pub entries: Vec<(usize, usize, i64)>,
}

impl DifferentialMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Coordinate-list text: one `row col value` line per entry.
    pub fn to_coordinate_text(&self) -> String {
        let mut s = String::new();
        for &(r, c, v) in &self.entries {
            s.push_str(&format!("{r} {c} {v}\n"));
        }
        s
    }

    /// The two basis manifests, one marking encoding per line.
    pub fn basis_manifests(&self) -> (String, String) {
        let rows = self.rows.iter().map(|m| m.value_string() + "\n").collect();
        let cols = self.cols.iter().map(|m| m.value_string() + "\n").collect();
        (rows, cols)
    }
}

/// A conflict system together with its full list of admissible markings and
/// the gradings used to slice them.
#[derive(Debug, Clone)]
pub struct Complex {
    system: ConflictSystem,
    fault: SignFault,
    markings: Vec<Marking>,
    by_twos: Vec<Vec<usize>>,
    by_ones: Vec<Vec<usize>>,
}

impl Complex {
    pub fn new(system: ConflictSystem) -> Result<Complex, ComplexError> {
        Complex::with_fault(system, SignFault::None)
    }

    pub fn with_fault(system: ConflictSystem, fault: SignFault) -> Result<Complex, ComplexError> {
        Complex::with_fault_and_bound(system, fault, DEFAULT_MAX_GRADE_DIM)
    }

    pub fn with_fault_and_bound(
        system: ConflictSystem,
        fault: SignFault,
        max_grade_dim: usize,
    ) -> Result<Complex, ComplexError> {
        let mut markings = Vec::new();
        for set in system.independent_sets(None) {
            let k = set.len();
            for bits in 0u64..(1 << k) {
                let mut m = Marking::zero(system.len());
                for (pos, &p) in set.iter().enumerate() {
                    m = m.with_value(p, if bits >> pos & 1 == 1 { 2 } else { 1 });
                }
                markings.push(m);
            }
        }
        markings.sort();
        let max_twos = markings.iter().map(|m| m.count(2)).max().unwrap_or(0);
        let max_ones = markings.iter().map(|m| m.count(1)).max().unwrap_or(0);
        let mut by_twos = vec![Vec::new(); max_twos + 1];
        let mut by_ones = vec![Vec::new(); max_ones + 1];
        for (i, m) in markings.iter().enumerate() {
            by_twos[m.count(2)].push(i);
            by_ones[m.count(1)].push(i);
        }
        for (j, ids) in by_twos.iter().enumerate() {
            if ids.len() > max_grade_dim {
                return Err(ComplexError::GradeTooLarge {
                    twos: j,
                    dim: ids.len(),
                    bound: max_grade_dim,
                });
            }
        }
        Ok(Complex { system, fault, markings, by_twos, by_ones })
    }

    pub fn system(&self) -> &ConflictSystem {
        &self.system
    }

    pub fn fault(&self) -> SignFault {
        self.fault
    }

    pub fn n_markings(&self) -> usize {
        self.markings.len()
    }

    /// Top cochain degree: the maximum number of 2-marks.
    pub fn max_twos(&self) -> usize {
        self.by_twos.len() - 1
    }

    pub fn max_ones(&self) -> usize {
        self.by_ones.len() - 1
    }

    fn gather(&self, ids: &[usize]) -> Vec<Marking> {
        ids.iter().map(|&i| self.markings[i].clone()).collect()
    }

    /// All markings with `j` 2-marks, in lexicographic order.
    pub fn basis_by_twos(&self, j: usize) -> Vec<Marking> {
        self.by_twos.get(j).map(|ids| self.gather(ids)).unwrap_or_default()
    }

    /// All markings with `i` 1-marks.
    pub fn basis_by_ones(&self, i: usize) -> Vec<Marking> {
        self.by_ones.get(i).map(|ids| self.gather(ids)).unwrap_or_default()
    }

    /// All markings with `i` 1-marks and `j` 2-marks.
    pub fn basis_by_bigrade(&self, i: usize, j: usize) -> Vec<Marking> {
        self.by_twos
            .get(j)
            .map(|ids| {
                ids.iter()
                    .map(|&id| self.markings[id].clone())
                    .filter(|m| m.count(1) == i)
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn dims_by_twos(&self) -> Vec<usize> {
        self.by_twos.iter().map(|ids| ids.len()).collect()
    }

    pub fn dims_by_ones(&self) -> Vec<usize> {
        self.by_ones.iter().map(|ids| ids.len()).collect()
    }

    /// Matrix of `kind` between two explicit marking bases. The bases must
    /// be closed under the operator in the sense that every output term of a
    /// column lies in `rows`.
    pub fn matrix_between_markings(
        &self,
        kind: DiffKind,
        cols: Vec<Marking>,
        rows: Vec<Marking>,
    ) -> Result<DifferentialMatrix, ComplexError> {
        let row_index: BTreeMap<&Marking, usize> =
            rows.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut entries = Vec::new();
        for (c, m) in cols.iter().enumerate() {
            let chain = kind.apply(&self.system, m, self.fault)?;
            for (target, coeff) in chain.iter() {
                let r = *row_index
                    .get(target)
                    .ok_or_else(|| ComplexError::TargetNotInBasis(target.value_string()))?;
                entries.push((r, c, coeff));
            }
        }
        entries.sort_unstable();
        Ok(DifferentialMatrix { rows, cols, entries })
    }

    /// Matrix of `kind` from cochain degree `j` to `j + 1`.
    pub fn matrix_by_twos(
        &self,
        kind: DiffKind,
        j: usize,
    ) -> Result<DifferentialMatrix, ComplexError> {
        if j > self.max_twos() {
            return Err(ComplexError::GradeOutOfRange(j, self.max_twos()));
        }
        self.matrix_between_markings(kind, self.basis_by_twos(j), self.basis_by_twos(j + 1))
    }

    /// The whole cochain: matrices for degrees `0 .. max_twos`.
    pub fn cochain_matrices(&self, kind: DiffKind) -> Result<Vec<DifferentialMatrix>, ComplexError> {
        (0..self.max_twos()).map(|j| self.matrix_by_twos(kind, j)).collect()
    }

    /// Bigraded matrix; only the exchange and promotion parts are
    /// bigrade-homogeneous.
    pub fn matrix_by_bigrade(
        &self,
        kind: DiffKind,
        i: usize,
        j: usize,
    ) -> Result<DifferentialMatrix, ComplexError> {
        let (ti, tj) = match kind {
            DiffKind::Delta => {
                if i == 0 {
                    (0, j + 1) // empty source makes the target irrelevant
                } else {
                    (i - 1, j + 1)
                }
            }
            DiffKind::Dee => (i, j + 1),
            other => return Err(ComplexError::NotBigraded(other)),
        };
        let cols = self.basis_by_bigrade(i, j);
        let rows = if kind == DiffKind::Delta && i == 0 {
            Vec::new()
        } else {
            self.basis_by_bigrade(ti, tj)
        };
        self.matrix_between_markings(kind, cols, rows)
    }

    /// Boundary matrices of the exchange operator graded by 1-marks:
    /// element `k` maps the `k+1`-ones piece to the `k`-ones piece.
    pub fn exchange_boundaries(&self) -> Result<Vec<DifferentialMatrix>, ComplexError> {
        (0..self.max_ones())
            .map(|k| {
                self.matrix_between_markings(
                    DiffKind::Delta,
                    self.basis_by_ones(k + 1),
                    self.basis_by_ones(k),
                )
            })
            .collect()
    }
}

/// The vertex-marking system of a conflict graph: one vertex per element,
/// adjacency given by the conflicts, order inherited.
pub fn vertex_model(cs: &ConflictSystem) -> Result<ConflictSystem, ConflictError> {
    let (n, edges) = cs.conflict_graph();
    crate::conflict::vertex_system(n, &edges, &format!("{}#vertexmodel", cs.key()))
}

/// The transport bijection between a system and its vertex model is the
/// identity on value vectors.
pub fn transport_marking(m: &Marking) -> Marking {
    m.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conflict::{edge_system, vertex_system};
    use crate::graph::Graph;

    fn dumbbell_edges() -> ConflictSystem {
        let g =
            Graph::new(4, vec![(0, 1), (0, 1), (1, 2), (2, 3), (2, 3)], vec![0, 3], None).unwrap();
        edge_system(&g, "dumbbell").unwrap()
    }

    #[test]
    fn basis_sizes_sum_to_marking_count() {
        let cs = dumbbell_edges();
        let complex = Complex::new(cs.clone()).unwrap();
        let total: usize = complex.dims_by_twos().iter().sum();
        assert_eq!(total as u64, cs.admissible_marking_count());
        assert_eq!(total, complex.n_markings());
        let by_ones: usize = complex.dims_by_ones().iter().sum();
        assert_eq!(by_ones, total);
    }

    #[test]
    fn two_conflicting_elements_grades() {
        let cs = vertex_system(2, &[(0, 1)], "k2").unwrap();
        let complex = Complex::new(cs).unwrap();
        assert_eq!(complex.basis_by_bigrade(1, 0).len(), 2);
        assert!(complex.basis_by_bigrade(1, 1).is_empty());
    }

    #[test]
    fn dumbbell_edge_two_twos_grade() {
        let complex = Complex::new(dumbbell_edges()).unwrap();
        let basis = complex.basis_by_bigrade(0, 2);
        let strings: Vec<String> = basis.iter().map(|m| m.value_string()).collect();
        assert_eq!(strings, vec!["02002", "02020", "20002", "20020"]);
    }

    #[test]
    fn single_element_full_matrix() {
        let cs = vertex_system(1, &[], "pt").unwrap();
        let complex = Complex::new(cs).unwrap();
        let m = complex.matrix_by_twos(DiffKind::Full, 0).unwrap();
        // columns are the markings "0" and "1"; the target is "2"
        assert_eq!(m.n_rows(), 1);
        assert_eq!(m.n_cols(), 2);
        assert_eq!(m.entries, vec![(0, 0, 1), (0, 1, -1)]);
    }

    #[test]
    fn empty_system_has_single_marking() {
        let cs = vertex_system(0, &[], "empty").unwrap();
        let complex = Complex::new(cs).unwrap();
        assert_eq!(complex.n_markings(), 1);
        assert_eq!(complex.max_twos(), 0);
        assert!(complex.cochain_matrices(DiffKind::Full).unwrap().is_empty());
    }

    #[test]
    fn grade_out_of_range_is_an_error() {
        let cs = vertex_system(1, &[], "pt").unwrap();
        let complex = Complex::new(cs).unwrap();
        assert!(matches!(
            complex.matrix_by_twos(DiffKind::Full, 5),
            Err(ComplexError::GradeOutOfRange(5, 1))
        ));
    }

    #[test]
    fn vertex_model_preserves_conflicts_and_order() {
        let cs = dumbbell_edges();
        let model = vertex_model(&cs).unwrap();
        assert_eq!(model.len(), cs.len());
        for a in 0..cs.len() {
            assert_eq!(model.sector(a), crate::conflict::Sector::Vertex);
            for b in 0..cs.len() {
                assert_eq!(model.conflicts(a, b), cs.conflicts(a, b));
            }
        }
    }

    #[test]
    fn coordinate_text_round_trip_shape() {
        let complex = Complex::new(dumbbell_edges()).unwrap();
        let m = complex.matrix_by_twos(DiffKind::Full, 0).unwrap();
        let text = m.to_coordinate_text();
        assert_eq!(text.lines().count(), m.entries.len());
        let (rows, cols) = m.basis_manifests();
        assert_eq!(rows.lines().count(), m.n_rows());
        assert_eq!(cols.lines().count(), m.n_cols());
    }
}
