//! Markings, integer chains, and the differential operators acting on them.
//!
//! A marking assigns 0, 1 or 2 to every element of a conflict system; it is
//! admissible when the marked elements are pairwise conflict-free. Two
//! families of operators act on markings:
//!
//! * the exchange family turns one 1-mark into a 2-mark, with a global sign
//!   `(-1)^{#marked}` and a per-term sign counting the 1-marked elements
//!   *after* the changed one;
//! * the promotion family turns an unmarked, unblocked element directly
//!   into a 2-mark, with a per-term sign counting the marked elements
//!   *before* it.
//!
//! When an operator is restricted to one sector of a mixed system, its sign
//! counts are restricted to that sector as well, while blocking always
//! consults every marked element (outputs must stay admissible).

use crate::conflict::{ConflictSystem, Sector};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MarkingError {
    #[error("marking has {got} values, system has {expected} elements")]
    LengthMismatch { got: usize, expected: usize },
    #[error("marking value {value} at element {element} not in 0..=2")]
    BadValue { element: usize, value: u8 },
    #[error("marking {0:?} is not admissible: elements {1} and {2} conflict")]
    Inadmissible(String, usize, usize),
    #[error("unexpected character {0:?} in marking string")]
    BadChar(char),
}

/// A total assignment element -> {0,1,2}, ordered lexicographically by its
/// value vector.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Marking(Vec<u8>);

impl std::fmt::Debug for Marking {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "m[{}]", self.value_string())
    }
}

impl Marking {
    pub fn zero(n: usize) -> Self {
        Marking(vec![0; n])
    }

    pub fn from_values(values: Vec<u8>) -> Result<Self, MarkingError> {
        for (i, &v) in values.iter().enumerate() {
            if v > 2 {
                return Err(MarkingError::BadValue { element: i, value: v });
            }
        }
        Ok(Marking(values))
    }

    pub fn parse(s: &str) -> Result<Self, MarkingError> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                '2' => Ok(2),
                other => Err(MarkingError::BadChar(other)),
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(Marking)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[u8] {
        &self.0
    }

    pub fn value(&self, p: usize) -> u8 {
        self.0[p]
    }

    /// Canonical encoding, e.g. `"01200"`.
    pub fn value_string(&self) -> String {
        self.0.iter().map(|v| char::from(b'0' + v)).collect()
    }

    pub fn with_value(&self, p: usize, v: u8) -> Marking {
        let mut values = self.0.clone();
        values[p] = v;
        Marking(values)
    }

    fn mask_of(&self, value: u8) -> u128 {
        self.0
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v == value)
            .fold(0u128, |m, (i, _)| m | 1 << i)
    }

    pub fn ones_mask(&self) -> u128 {
        self.mask_of(1)
    }

    pub fn twos_mask(&self) -> u128 {
        self.mask_of(2)
    }

    pub fn marked_mask(&self) -> u128 {
        self.ones_mask() | self.twos_mask()
    }

    pub fn count(&self, value: u8) -> usize {
        self.0.iter().filter(|&&v| v == value).count()
    }

    pub fn is_admissible(&self, cs: &ConflictSystem) -> bool {
        self.len() == cs.len() && cs.is_independent(self.marked_mask())
    }

    fn check(&self, cs: &ConflictSystem) -> Result<(), MarkingError> {
        if self.len() != cs.len() {
            return Err(MarkingError::LengthMismatch { got: self.len(), expected: cs.len() });
        }
        let marked = self.marked_mask();
        let mut rest = marked;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let clash = cs.conflict_mask(i) & marked;
            if clash != 0 {
                let j = clash.trailing_zeros() as usize;
                return Err(MarkingError::Inadmissible(self.value_string(), i, j));
            }
        }
        Ok(())
    }
}

/// Restricts an operator to one sector of a mixed system, or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    All,
    Sector(Sector),
}

/// Fault-injection hook: flips exactly one sign or blocking rule so the
/// verification suite can demonstrate that it would notice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignFault {
    #[default]
    None,
    /// Drop the global `(-1)^{#marked}` sign of the exchange operator.
    DeltaGlobal,
    /// Count earlier instead of later 1-marks in the exchange operator.
    DeltaOrder,
    /// Count later instead of earlier marked elements in the promotion
    /// operator.
    PromoteOrder,
    /// Sector-restricted operators count marked elements of every sector in
    /// their signs.
    SectorGlobal,
    /// The total differential uses `S + T` in every degree instead of
    /// alternating.
    TotalAlternation,
}

impl SignFault {
    pub const ALL: [SignFault; 5] = [
        SignFault::DeltaGlobal,
        SignFault::DeltaOrder,
        SignFault::PromoteOrder,
        SignFault::SectorGlobal,
        SignFault::TotalAlternation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SignFault::None => "none",
            SignFault::DeltaGlobal => "delta-global",
            SignFault::DeltaOrder => "delta-order",
            SignFault::PromoteOrder => "promote-order",
            SignFault::SectorGlobal => "sector-global",
            SignFault::TotalAlternation => "total-alternation",
        }
    }

    pub fn from_name(name: &str) -> Option<SignFault> {
        SignFault::ALL.iter().copied().find(|f| f.name() == name)
    }
}

/// Integer linear combination of markings, keyed canonically.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Chain {
    terms: BTreeMap<Marking, i64>,
}

impl Chain {
    pub fn zero() -> Chain {
        Chain::default()
    }

    pub fn from_term(m: Marking, coeff: i64) -> Chain {
        let mut c = Chain::zero();
        c.add_term(m, coeff);
        c
    }

    pub fn add_term(&mut self, m: Marking, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let entry = self.terms.entry(m).or_insert(0);
        *entry = entry.checked_add(coeff).expect("chain coefficient overflow");
        if *entry == 0 {
            let key = self
                .terms
                .iter()
                .find(|(_, &c)| c == 0)
                .map(|(m, _)| m.clone())
                .unwrap();
            self.terms.remove(&key);
        }
    }

    pub fn plus(&self, other: &Chain) -> Chain {
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn scaled(&self, k: i64) -> Chain {
        let mut out = Chain::zero();
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), c.checked_mul(k).expect("chain coefficient overflow"));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Marking) -> i64 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Marking, i64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    /// Extends `f` linearly over the chain.
    pub fn map_linear<E>(
        &self,
        mut f: impl FnMut(&Marking) -> Result<Chain, E>,
    ) -> Result<Chain, E> {
        let mut out = Chain::zero();
        for (m, c) in self.iter() {
            for (m2, c2) in f(m)?.iter() {
                out.add_term(m2.clone(), c2.checked_mul(c).expect("chain coefficient overflow"));
            }
        }
        Ok(out)
    }
}

/// Serialized form of a chain over a named system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainRecord {
    pub system: String,
    pub terms: Vec<ChainTerm>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainTerm {
    pub marking: String,
    pub coeff: i64,
}

impl Chain {
    pub fn to_record(&self, system: &str) -> ChainRecord {
        ChainRecord {
            system: system.to_string(),
            terms: self
                .iter()
                .map(|(m, c)| ChainTerm { marking: m.value_string(), coeff: c })
                .collect(),
        }
    }
}

fn full_mask(n: usize) -> u128 {
    if n == 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

fn scope_mask(cs: &ConflictSystem, scope: Scope) -> u128 {
    match scope {
        Scope::All => full_mask(cs.len()),
        Scope::Sector(s) => cs.sector_mask(s),
    }
}

fn below(p: usize) -> u128 {
    (1u128 << p) - 1
}

fn above(p: usize, n: usize) -> u128 {
    full_mask(n) & !below(p) & !(1u128 << p)
}

fn parity_sign(mask: u128) -> i64 {
    if mask.count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Exchange operator: each 1-mark in scope becomes a 2-mark in turn.
pub fn apply_delta(
    cs: &ConflictSystem,
    m: &Marking,
    scope: Scope,
    fault: SignFault,
) -> Result<Chain, MarkingError> {
    m.check(cs)?;
    let act = scope_mask(cs, scope);
    let count = if fault == SignFault::SectorGlobal { full_mask(cs.len()) } else { act };
    let ones = m.ones_mask();
    let global = if fault == SignFault::DeltaGlobal {
        1
    } else {
        parity_sign(m.marked_mask() & count)
    };
    let mut out = Chain::zero();
    let mut rest = ones & act;
    while rest != 0 {
        let p = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let local_mask = if fault == SignFault::DeltaOrder {
            ones & count & below(p)
        } else {
            ones & count & above(p, cs.len())
        };
        out.add_term(m.with_value(p, 2), global * parity_sign(local_mask));
    }
    Ok(out)
}

/// Promotion operator: each unmarked element in scope that conflicts with no
/// marked element becomes a 2-mark.
pub fn apply_d(
    cs: &ConflictSystem,
    m: &Marking,
    scope: Scope,
    fault: SignFault,
) -> Result<Chain, MarkingError> {
    m.check(cs)?;
    let act = scope_mask(cs, scope);
    let count = if fault == SignFault::SectorGlobal { full_mask(cs.len()) } else { act };
    let marked = m.marked_mask();
    let mut out = Chain::zero();
    let mut rest = !marked & full_mask(cs.len()) & act;
    while rest != 0 {
        let p = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        // blocking is by admissibility, across all sectors
        if cs.conflict_mask(p) & marked != 0 {
            continue;
        }
        let local_mask = if fault == SignFault::PromoteOrder {
            marked & count & above(p, cs.len())
        } else {
            marked & count & below(p)
        };
        out.add_term(m.with_value(p, 2), parity_sign(local_mask));
    }
    Ok(out)
}

/// The full differential on a scope: exchange plus promotion.
pub fn apply_full(
    cs: &ConflictSystem,
    m: &Marking,
    scope: Scope,
    fault: SignFault,
) -> Result<Chain, MarkingError> {
    Ok(apply_delta(cs, m, scope, fault)?.plus(&apply_d(cs, m, scope, fault)?))
}

/// Total differential of a mixed system in degree `n` (number of 2-marks):
/// edge part plus `(-1)^n` times the cycle part.
pub fn apply_total(
    cs: &ConflictSystem,
    m: &Marking,
    fault: SignFault,
) -> Result<Chain, MarkingError> {
    let s_part = apply_full(cs, m, Scope::Sector(Sector::Edge), fault)?;
    let t_part = apply_full(cs, m, Scope::Sector(Sector::Cycle), fault)?;
    let sign = if fault == SignFault::TotalAlternation {
        1
    } else if m.count(2) % 2 == 0 {
        1
    } else {
        -1
    };
    Ok(s_part.plus(&t_part.scaled(sign)))
}

/// One-mark generator: every unmarked, unblocked element of the scope gets a
/// 1-mark, all coefficients +1.
pub fn one_mark(cs: &ConflictSystem, m: &Marking, scope: Scope) -> Result<Chain, MarkingError> {
    m.check(cs)?;
    let act = scope_mask(cs, scope);
    let marked = m.marked_mask();
    let mut out = Chain::zero();
    let mut rest = !marked & full_mask(cs.len()) & act;
    while rest != 0 {
        let p = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if cs.conflict_mask(p) & marked != 0 {
            continue;
        }
        out.add_term(m.with_value(p, 1), 1);
    }
    Ok(out)
}

/// Exponential of the one-mark generators over `scope`, applied to the
/// all-zero marking: the sum of all admissible {0,1}-markings supported on
/// the scope, each with coefficient +1. Computed by independent-set
/// enumeration; the factorials of the iterated operator cancel exactly.
pub fn exp_one_mark(cs: &ConflictSystem, scope: Scope) -> Chain {
    let act = scope_mask(cs, scope);
    let mut out = Chain::zero();
    for set in cs.independent_sets(None) {
        if set.iter().any(|&p| act >> p & 1 == 0) {
            continue;
        }
        let mut m = Marking::zero(cs.len());
        for &p in &set {
            m = m.with_value(p, 1);
        }
        out.add_term(m, 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conflict::{cycle_system, edge_system, vertex_system};
    use crate::graph::Graph;

    fn dumbbell() -> Graph {
        Graph::new(4, vec![(0, 1), (0, 1), (1, 2), (2, 3), (2, 3)], vec![0, 3], None).unwrap()
    }

    fn dumbbell_edges() -> ConflictSystem {
        edge_system(&dumbbell(), "dumbbell").unwrap()
    }

    fn dumbbell_cycles() -> ConflictSystem {
        cycle_system(&dumbbell(), "dumbbell").unwrap()
    }

    /// Five vertices: a triangle 0-1-2 with pendants 3 and 4 on vertex 2.
    fn five_vertex_system() -> ConflictSystem {
        vertex_system(5, &[(0, 1), (0, 2), (1, 2), (2, 3), (2, 4)], "w5").unwrap()
    }

    fn m(s: &str) -> Marking {
        Marking::parse(s).unwrap()
    }

    #[test]
    fn exchange_on_first_marked_edge() {
        // one 1-mark on the first edge of the dumbbell: exchange flips it to
        // a 2-mark with an overall minus
        let cs = dumbbell_edges();
        let out = apply_delta(&cs, &m("10000"), Scope::All, SignFault::None).unwrap();
        assert_eq!(out, Chain::from_term(m("20000"), -1));
    }

    #[test]
    fn exchange_of_zero_marking_is_zero() {
        let cs = dumbbell_edges();
        assert!(apply_delta(&cs, &m("00000"), Scope::All, SignFault::None)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn promotion_skips_blocked_edges() {
        // edges 1 and 2 touch the marked edge 0; edges 3 and 4 promote with
        // sign -1 (one marked element before each)
        let cs = dumbbell_edges();
        let out = apply_d(&cs, &m("10000"), Scope::All, SignFault::None).unwrap();
        let mut expected = Chain::from_term(m("10020"), -1);
        expected.add_term(m("10002"), -1);
        assert_eq!(out, expected);
    }

    #[test]
    fn five_vertex_promotion_and_exchange() {
        let cs = five_vertex_system();
        let marked = m("00010");
        let u = apply_d(&cs, &marked, Scope::All, SignFault::None).unwrap();
        let mut expected = Chain::from_term(m("20010"), 1);
        expected.add_term(m("02010"), 1);
        expected.add_term(m("00012"), -1);
        assert_eq!(u, expected);
        let mu = apply_delta(&cs, &marked, Scope::All, SignFault::None).unwrap();
        assert_eq!(mu, Chain::from_term(m("00020"), -1));
    }

    #[test]
    fn five_vertex_anticommutation_instance() {
        let cs = five_vertex_system();
        let marked = m("00010");
        let u = apply_d(&cs, &marked, Scope::All, SignFault::None).unwrap();
        let mu_u = u
            .map_linear(|x| apply_delta(&cs, x, Scope::All, SignFault::None))
            .unwrap();
        let mut expected = Chain::from_term(m("20020"), 1);
        expected.add_term(m("02020"), 1);
        expected.add_term(m("00022"), -1);
        assert_eq!(mu_u, expected);
        let mu = apply_delta(&cs, &marked, Scope::All, SignFault::None).unwrap();
        let u_mu = mu
            .map_linear(|x| apply_d(&cs, x, Scope::All, SignFault::None))
            .unwrap();
        assert_eq!(u_mu, expected.scaled(-1));
    }

    #[test]
    fn cycle_promotion_signs() {
        let cs = dumbbell_cycles();
        // second cycle 1-marked: the first cycle promotes with sign +1
        let t = apply_d(&cs, &m("01"), Scope::All, SignFault::None).unwrap();
        assert_eq!(t, Chain::from_term(m("21"), 1));
        // first cycle 1-marked: the second promotes with sign -1
        let t = apply_d(&cs, &m("10"), Scope::All, SignFault::None).unwrap();
        assert_eq!(t, Chain::from_term(m("12"), -1));
        // nothing left to promote
        let t = apply_d(&cs, &m("12"), Scope::All, SignFault::None).unwrap();
        assert!(t.is_zero());
        let tau = apply_delta(&cs, &m("01"), Scope::All, SignFault::None).unwrap();
        assert_eq!(tau, Chain::from_term(m("02"), -1));
        // anticommutation on this instance
        let tau_t = apply_d(&cs, &m("01"), Scope::All, SignFault::None)
            .unwrap()
            .map_linear(|x| apply_delta(&cs, x, Scope::All, SignFault::None))
            .unwrap();
        assert_eq!(tau_t, Chain::from_term(m("22"), 1));
        let t_tau = apply_delta(&cs, &m("01"), Scope::All, SignFault::None)
            .unwrap()
            .map_linear(|x| apply_d(&cs, x, Scope::All, SignFault::None))
            .unwrap();
        assert_eq!(t_tau, Chain::from_term(m("22"), -1));
    }

    #[test]
    fn edge_exchange_promotion_anticommute() {
        // the worked edge-marking example: promotion then exchange
        let cs = dumbbell_edges();
        let s = apply_d(&cs, &m("10000"), Scope::All, SignFault::None).unwrap();
        let sigma_s = s
            .map_linear(|x| apply_delta(&cs, x, Scope::All, SignFault::None))
            .unwrap();
        let mut expected = Chain::from_term(m("20020"), -1);
        expected.add_term(m("20002"), -1);
        assert_eq!(sigma_s, expected);
        let sigma = apply_delta(&cs, &m("10000"), Scope::All, SignFault::None).unwrap();
        let s_sigma = sigma
            .map_linear(|x| apply_d(&cs, x, Scope::All, SignFault::None))
            .unwrap();
        assert_eq!(s_sigma, expected.scaled(-1));
    }

    #[test]
    fn rejects_inadmissible_marking() {
        let cs = dumbbell_edges();
        let err = apply_delta(&cs, &m("11000"), Scope::All, SignFault::None).unwrap_err();
        assert!(matches!(err, MarkingError::Inadmissible(_, 0, 1)));
    }

    #[test]
    fn full_differential_on_single_element() {
        let cs = vertex_system(1, &[], "pt").unwrap();
        let d0 = apply_full(&cs, &m("0"), Scope::All, SignFault::None).unwrap();
        assert_eq!(d0, Chain::from_term(m("2"), 1));
        let d1 = apply_full(&cs, &m("1"), Scope::All, SignFault::None).unwrap();
        assert_eq!(d1, Chain::from_term(m("2"), -1));
        let d2 = apply_full(&cs, &m("2"), Scope::All, SignFault::None).unwrap();
        assert!(d2.is_zero());
    }

    #[test]
    fn full_differential_on_zero_marking_has_plus_signs() {
        let cs = vertex_system(3, &[], "i3").unwrap();
        let out = apply_full(&cs, &m("000"), Scope::All, SignFault::None).unwrap();
        let mut expected = Chain::from_term(m("200"), 1);
        expected.add_term(m("020"), 1);
        expected.add_term(m("002"), 1);
        assert_eq!(out, expected);
    }

    #[test]
    fn one_mark_generator_examples() {
        let free = vertex_system(2, &[], "i2").unwrap();
        let out = one_mark(&free, &m("00"), Scope::All).unwrap();
        let mut expected = Chain::from_term(m("10"), 1);
        expected.add_term(m("01"), 1);
        assert_eq!(out, expected);

        let cs = dumbbell_edges();
        let out = one_mark(&cs, &Marking::zero(5), Scope::All).unwrap();
        assert_eq!(out.n_terms(), 5);
        assert!(out.iter().all(|(mk, c)| c == 1 && mk.count(1) == 1));

        let k3 = vertex_system(3, &[(0, 1), (0, 2), (1, 2)], "k3").unwrap();
        let out = one_mark(&k3, &m("100"), Scope::All).unwrap();
        assert!(out.is_zero());
    }

    #[test]
    fn exponential_is_independent_set_sum() {
        let k2 = vertex_system(2, &[(0, 1)], "k2").unwrap();
        let e = exp_one_mark(&k2, Scope::All);
        assert_eq!(e.n_terms(), 3);
        let free = vertex_system(2, &[], "i2").unwrap();
        let e = exp_one_mark(&free, Scope::All);
        assert_eq!(e.n_terms(), 4);
        assert_eq!(e.coeff(&m("11")), 1);
        let cs = dumbbell_edges();
        assert_eq!(exp_one_mark(&cs, Scope::All).n_terms(), 10);
    }

    #[test]
    fn iterated_one_mark_matches_exponential_term_by_term() {
        // applying the one-mark generator k times produces every independent
        // k-set with coefficient k!
        let cs = dumbbell_edges();
        let mut layer = Chain::from_term(Marking::zero(5), 1);
        let mut factorial = 1i64;
        for k in 1..=2 {
            layer = layer.map_linear(|x| one_mark(&cs, x, Scope::All)).unwrap();
            factorial *= k;
            for (mk, c) in layer.iter() {
                assert_eq!(c, factorial);
                assert_eq!(mk.count(1), k as usize);
            }
        }
        // one more application dies: no independent 3-sets of edges here
        assert!(layer.map_linear(|x| one_mark(&cs, x, Scope::All)).unwrap().is_zero());
    }

    #[test]
    fn marking_round_trip_and_masks() {
        let mk = m("0120");
        assert_eq!(mk.value_string(), "0120");
        assert_eq!(mk.ones_mask(), 0b0010);
        assert_eq!(mk.twos_mask(), 0b0100);
        assert_eq!(Marking::from_values(vec![0, 1, 2, 0]).unwrap(), mk);
        assert!(Marking::from_values(vec![3]).is_err());
        assert!(Marking::parse("012x").is_err());
    }
}
