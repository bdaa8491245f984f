//! Exact integer matrices and Smith normal form.
//!
//! Elimination runs in `i128` and restarts in arbitrary precision if any
//! intermediate would overflow. The row and column transforms are kept, the
//! sign of their determinants is tracked through the elementary operations,
//! and `verify` replays `U * M * V` against the diagonal.

use crate::complex::DifferentialMatrix;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixError {
    #[error("entry ({0}, {1}) out of range for a {2}x{3} matrix")]
    OutOfRange(usize, usize, usize, usize),
    #[error("duplicate entry at ({0}, {1})")]
    Duplicate(usize, usize),
    #[error("explicit zero stored at ({0}, {1})")]
    StoredZero(usize, usize),
    #[error("cannot multiply {0}x{1} by {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("integer overflow in matrix product")]
    Overflow,
    #[error("{0} is not prime")]
    NotPrime(u64),
}

/// Sparse integer matrix in coordinate form; entries are sorted, unique and
/// nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseIntMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    entries: Vec<(u32, u32, i64)>,
}

impl SparseIntMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        mut entries: Vec<(usize, usize, i64)>,
    ) -> Result<Self, MatrixError> {
        entries.sort_unstable();
        let mut out = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if r >= n_rows || c >= n_cols {
                return Err(MatrixError::OutOfRange(r, c, n_rows, n_cols));
            }
            if v == 0 {
                return Err(MatrixError::StoredZero(r, c));
            }
            if last == Some((r, c)) {
                return Err(MatrixError::Duplicate(r, c));
            }
            last = Some((r, c));
            out.push((r as u32, c as u32, v));
        }
        Ok(SparseIntMatrix { n_rows, n_cols, entries: out })
    }

    pub fn zero(n_rows: usize, n_cols: usize) -> Self {
        SparseIntMatrix { n_rows, n_cols, entries: Vec::new() }
    }

    pub fn entries(&self) -> &[(u32, u32, i64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn from_differential(m: &DifferentialMatrix) -> Self {
        SparseIntMatrix::new(m.n_rows(), m.n_cols(), m.entries.clone())
            .expect("differential matrices are valid coordinate lists")
    }

    /// `self * other`, exact.
    pub fn multiply(&self, other: &SparseIntMatrix) -> Result<SparseIntMatrix, MatrixError> {
        if self.n_cols != other.n_rows {
            return Err(MatrixError::ShapeMismatch(
                self.n_rows,
                self.n_cols,
                other.n_rows,
                other.n_cols,
            ));
        }
        let mut by_row: Vec<Vec<(u32, i64)>> = vec![Vec::new(); other.n_rows];
        for &(r, c, v) in &other.entries {
            by_row[r as usize].push((c, v));
        }
        let mut acc: std::collections::BTreeMap<(u32, u32), i64> = std::collections::BTreeMap::new();
        for &(i, k, v) in &self.entries {
            for &(j, w) in &by_row[k as usize] {
                let prod = v.checked_mul(w).ok_or(MatrixError::Overflow)?;
                let slot = acc.entry((i, j)).or_insert(0);
                *slot = slot.checked_add(prod).ok_or(MatrixError::Overflow)?;
            }
        }
        let entries = acc
            .into_iter()
            .filter(|&(_, v)| v != 0)
            .map(|((r, c), v)| (r, c, v))
            .collect();
        Ok(SparseIntMatrix { n_rows: self.n_rows, n_cols: other.n_cols, entries })
    }

    /// Rows and columns permuted: entry (r, c) moves to
    /// (row_perm[r], col_perm[c]).
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> SparseIntMatrix {
        assert_eq!(row_perm.len(), self.n_rows);
        assert_eq!(col_perm.len(), self.n_cols);
        let mut entries: Vec<(u32, u32, i64)> = self
            .entries
            .iter()
            .map(|&(r, c, v)| (row_perm[r as usize] as u32, col_perm[c as usize] as u32, v))
            .collect();
        entries.sort_unstable();
        SparseIntMatrix { n_rows: self.n_rows, n_cols: self.n_cols, entries }
    }
}

/// Elimination core, kept in its own module so the `Scalar` trait's
/// method names do not collide with `num_traits` in the outer scope.
mod elim {
    use super::SparseIntMatrix;
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::{One, Signed, Zero};

    /// Arithmetic shared by the `i128` fast path and the `BigInt` fallback.
    /// Fallible operations return `None` on overflow, which aborts the fast
    /// path.
    pub(super) trait Scalar: Clone + Ord + std::fmt::Debug {
        fn zero() -> Self;
        fn one() -> Self;
        fn from_i64(v: i64) -> Self;
        fn is_zero(&self) -> bool;
        fn abs_val(&self) -> Option<Self>;
        fn checked_neg(&self) -> Option<Self>;
        fn checked_add(&self, other: &Self) -> Option<Self>;
        fn checked_sub(&self, other: &Self) -> Option<Self>;
        fn checked_mul(&self, other: &Self) -> Option<Self>;
        /// Truncated division with remainder; `other` is nonzero.
        fn checked_div_rem(&self, other: &Self) -> Option<(Self, Self)>;
        fn is_negative(&self) -> bool;
    }

    impl Scalar for i128 {
        fn zero() -> Self {
            0
        }
        fn one() -> Self {
            1
        }
        fn from_i64(v: i64) -> Self {
            v as i128
        }
        fn is_zero(&self) -> bool {
            *self == 0
        }
        fn abs_val(&self) -> Option<Self> {
            self.checked_abs()
        }
        fn checked_neg(&self) -> Option<Self> {
            i128::checked_neg(*self)
        }
        fn checked_add(&self, other: &Self) -> Option<Self> {
            i128::checked_add(*self, *other)
        }
        fn checked_sub(&self, other: &Self) -> Option<Self> {
            i128::checked_sub(*self, *other)
        }
        fn checked_mul(&self, other: &Self) -> Option<Self> {
            i128::checked_mul(*self, *other)
        }
        fn checked_div_rem(&self, other: &Self) -> Option<(Self, Self)> {
            let q = i128::checked_div(*self, *other)?;
            let r = i128::checked_rem(*self, *other)?;
            Some((q, r))
        }
        fn is_negative(&self) -> bool {
            *self < 0
        }
    }

    impl Scalar for BigInt {
        fn zero() -> Self {
            <BigInt as Zero>::zero()
        }
        fn one() -> Self {
            <BigInt as One>::one()
        }
        fn from_i64(v: i64) -> Self {
            BigInt::from(v)
        }
        fn is_zero(&self) -> bool {
            Zero::is_zero(self)
        }
        fn abs_val(&self) -> Option<Self> {
            Some(Signed::abs(self))
        }
        fn checked_neg(&self) -> Option<Self> {
            Some(-self)
        }
        fn checked_add(&self, other: &Self) -> Option<Self> {
            Some(self + other)
        }
        fn checked_sub(&self, other: &Self) -> Option<Self> {
            Some(self - other)
        }
        fn checked_mul(&self, other: &Self) -> Option<Self> {
            Some(self * other)
        }
        fn checked_div_rem(&self, other: &Self) -> Option<(Self, Self)> {
            Some(self.div_rem(other))
        }
        fn is_negative(&self) -> bool {
            Signed::is_negative(self)
        }
    }

    pub(super) struct SnfData<T> {
        pub(super) diag: Vec<T>,
        pub(super) u: Vec<Vec<T>>,
        pub(super) v: Vec<Vec<T>>,
        pub(super) det_u: i8,
        pub(super) det_v: i8,
    }

    fn identity<T: Scalar>(n: usize) -> Vec<Vec<T>> {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
            .collect()
    }

    fn dense_from_sparse<T: Scalar>(m: &SparseIntMatrix) -> Vec<Vec<T>> {
        let mut a = vec![vec![T::zero(); m.n_cols]; m.n_rows];
        for &(r, c, v) in m.entries() {
            a[r as usize][c as usize] = T::from_i64(v);
        }
        a
    }

    pub(super) fn snf_dense<T: Scalar>(m: &SparseIntMatrix) -> Option<SnfData<T>> {
        let rows = m.n_rows;
        let cols = m.n_cols;
        let mut a: Vec<Vec<T>> = dense_from_sparse(m);
        let mut u = identity::<T>(rows);
        let mut v = identity::<T>(cols);
        let mut det_u = 1i8;
        let mut det_v = 1i8;

        let swap_rows = |a: &mut Vec<Vec<T>>, u: &mut Vec<Vec<T>>, det: &mut i8, i: usize, j: usize| {
            if i != j {
                a.swap(i, j);
                u.swap(i, j);
                *det = -*det;
            }
        };
        let swap_cols = |a: &mut Vec<Vec<T>>, v: &mut Vec<Vec<T>>, det: &mut i8, i: usize, j: usize| {
            if i != j {
                for row in a.iter_mut() {
                    row.swap(i, j);
                }
                for row in v.iter_mut() {
                    row.swap(i, j);
                }
                *det = -*det;
            }
        };

        let mut t = 0;
        let lim = rows.min(cols);
        'pivot: while t < lim {
            // smallest nonzero magnitude in the trailing submatrix
            let mut best: Option<(T, usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !a[i][j].is_zero() {
                        let mag = a[i][j].abs_val()?;
                        if best.as_ref().map_or(true, |(b, _, _)| mag < *b) {
                            best = Some((mag, i, j));
                        }
                    }
                }
            }
            let Some((_, pi, pj)) = best else {
                break;
            };
            swap_rows(&mut a, &mut u, &mut det_u, t, pi);
            swap_cols(&mut a, &mut v, &mut det_v, t, pj);

            'reduce: loop {
                // clear column t with row operations
                for i in 0..rows {
                    if i == t || a[i][t].is_zero() {
                        continue;
                    }
                    let (q, r) = a[i][t].checked_div_rem(&a[t][t])?;
                    if !q.is_zero() {
                        for j in 0..cols {
                            a[i][j] = a[i][j].checked_sub(&q.checked_mul(&a[t][j])?)?;
                        }
                        for j in 0..rows {
                            u[i][j] = u[i][j].checked_sub(&q.checked_mul(&u[t][j])?)?;
                        }
                    }
                    if !r.is_zero() {
                        // the remainder has smaller magnitude; make it the pivot
                        swap_rows(&mut a, &mut u, &mut det_u, i, t);
                        continue 'reduce;
                    }
                }
                // clear row t with column operations
                for j in 0..cols {
                    if j == t || a[t][j].is_zero() {
                        continue;
                    }
                    let (q, r) = a[t][j].checked_div_rem(&a[t][t])?;
                    if !q.is_zero() {
                        for i in 0..rows {
                            a[i][j] = a[i][j].checked_sub(&q.checked_mul(&a[i][t])?)?;
                        }
                        for i in 0..cols {
                            v[i][j] = v[i][j].checked_sub(&q.checked_mul(&v[i][t])?)?;
                        }
                    }
                    if !r.is_zero() {
                        swap_cols(&mut a, &mut v, &mut det_v, j, t);
                        continue 'reduce;
                    }
                }
                // make the pivot divide the rest of the submatrix
                for i in t + 1..rows {
                    for j in t + 1..cols {
                        if a[i][j].is_zero() {
                            continue;
                        }
                        let (_, r) = a[i][j].checked_div_rem(&a[t][t])?;
                        if !r.is_zero() {
                            for jj in 0..cols {
                                a[t][jj] = a[t][jj].checked_add(&a[i][jj])?;
                            }
                            for jj in 0..rows {
                                u[t][jj] = u[t][jj].checked_add(&u[i][jj])?;
                            }
                            continue 'reduce;
                        }
                    }
                }
                break;
            }

            if a[t][t].is_negative() {
                for j in 0..cols {
                    a[t][j] = a[t][j].checked_neg()?;
                }
                for j in 0..rows {
                    u[t][j] = u[t][j].checked_neg()?;
                }
                det_u = -det_u;
            }
            t += 1;
            if t == lim {
                break 'pivot;
            }
        }

        let diag = (0..t).map(|k| a[k][k].clone()).collect();
        Some(SnfData { diag, u, v, det_u, det_v })
    }
}

use elim::{snf_dense, SnfData};

enum SnfInner {
    Word(SnfData<i128>),
    Big(SnfData<BigInt>),
}

/// Invariant factors of an integer matrix together with the unimodular
/// transforms that produced them.
pub struct SmithNormalForm {
    inner: SnfInner,
    n_rows: usize,
    n_cols: usize,
}

/// Diagonalizes `m` over the integers. The result carries the transforms;
/// `verify` checks them against `m`.
pub fn smith_normal_form(m: &SparseIntMatrix) -> SmithNormalForm {
    let inner = match snf_dense::<i128>(m) {
        Some(data) => SnfInner::Word(data),
        None => SnfInner::Big(
            snf_dense::<BigInt>(m).expect("big-integer elimination cannot overflow"),
        ),
    };
    SmithNormalForm { inner, n_rows: m.n_rows, n_cols: m.n_cols }
}

impl SmithNormalForm {
    pub fn rank(&self) -> usize {
        match &self.inner {
            SnfInner::Word(d) => d.diag.len(),
            SnfInner::Big(d) => d.diag.len(),
        }
    }

    /// The positive diagonal, each entry dividing the next.
    pub fn invariant_factors(&self) -> Vec<BigUint> {
        match &self.inner {
            SnfInner::Word(d) => d.diag.iter().map(|x| BigUint::from(*x as u128)).collect(),
            SnfInner::Big(d) => d.diag.iter().map(|x| x.magnitude().clone()).collect(),
        }
    }

    /// Invariant factors greater than one, as machine words.
    pub fn torsion(&self) -> Vec<u64> {
        self.invariant_factors()
            .into_iter()
            .filter(|f| *f > BigUint::one())
            .map(|f| u64::try_from(&f).expect("torsion factor exceeds u64"))
            .collect()
    }

    /// Determinant signs of U and V as tracked through the elementary
    /// operations; always +1 or -1.
    pub fn tracked_det_signs(&self) -> (i8, i8) {
        match &self.inner {
            SnfInner::Word(d) => (d.det_u, d.det_v),
            SnfInner::Big(d) => (d.det_u, d.det_v),
        }
    }

    fn u_big(&self) -> Vec<Vec<BigInt>> {
        match &self.inner {
            SnfInner::Word(d) => {
                d.u.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
            }
            SnfInner::Big(d) => d.u.clone(),
        }
    }

    fn v_big(&self) -> Vec<Vec<BigInt>> {
        match &self.inner {
            SnfInner::Word(d) => {
                d.v.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
            }
            SnfInner::Big(d) => d.v.clone(),
        }
    }

    /// Replays `U * M * V` and compares it with the recorded diagonal.
    pub fn verify(&self, m: &SparseIntMatrix) -> bool {
        if m.n_rows != self.n_rows || m.n_cols != self.n_cols {
            return false;
        }
        let u = self.u_big();
        let v = self.v_big();
        // U * M through the sparse entries
        let mut um = vec![vec![BigInt::zero(); self.n_cols]; self.n_rows];
        for &(r, c, val) in m.entries() {
            let val = BigInt::from(val);
            for i in 0..self.n_rows {
                let add = &u[i][r as usize] * &val;
                um[i][c as usize] += add;
            }
        }
        let factors = self.invariant_factors();
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                let mut acc = BigInt::zero();
                for k in 0..self.n_cols {
                    if !um[i][k].is_zero() && !v[k][j].is_zero() {
                        acc += &um[i][k] * &v[k][j];
                    }
                }
                let expected = if i == j && i < factors.len() {
                    BigInt::from(factors[i].clone())
                } else {
                    BigInt::zero()
                };
                if acc != expected {
                    return false;
                }
            }
        }
        true
    }

    /// Exact determinant of U by fraction-free elimination.
    pub fn det_u(&self) -> BigInt {
        bareiss_det(self.u_big())
    }

    /// Exact determinant of V.
    pub fn det_v(&self) -> BigInt {
        bareiss_det(self.v_big())
    }
}

fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = 1i8;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Rank of `m` over the field with `p` elements.
pub fn rank_mod_p(m: &SparseIntMatrix, p: u64) -> Result<usize, MatrixError> {
    if !is_prime(p) {
        return Err(MatrixError::NotPrime(p));
    }
    let mut rows = vec![vec![0u64; m.n_cols]; m.n_rows];
    for &(r, c, v) in m.entries() {
        rows[r as usize][c as usize] = v.rem_euclid(p as i64) as u64;
    }
    let mut rank = 0usize;
    let mut row = 0usize;
    for col in 0..m.n_cols {
        let Some(pivot) = (row..m.n_rows).find(|&i| rows[i][col] % p != 0) else {
            continue;
        };
        rows.swap(row, pivot);
        let inv = mod_inverse(rows[row][col] % p, p);
        for j in col..m.n_cols {
            rows[row][j] = rows[row][j] % p * inv % p;
        }
        for i in 0..m.n_rows {
            if i != row && rows[i][col] % p != 0 {
                let f = rows[i][col] % p;
                for j in col..m.n_cols {
                    let sub = f * rows[row][j] % p;
                    rows[i][j] = (rows[i][j] % p + p - sub) % p;
                }
            }
        }
        rank += 1;
        row += 1;
        if row == m.n_rows {
            break;
        }
    }
    Ok(rank)
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // Fermat: a^(p-2) mod p
    let mut base = a % p;
    let mut exp = p - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(n_rows: usize, n_cols: usize, entries: &[(usize, usize, i64)]) -> SparseIntMatrix {
        SparseIntMatrix::new(n_rows, n_cols, entries.to_vec()).unwrap()
    }

    fn factors_u64(snf: &SmithNormalForm) -> Vec<u64> {
        snf.invariant_factors()
            .iter()
            .map(|f| u64::try_from(f).unwrap())
            .collect()
    }

    #[test]
    fn permutation_matrix() {
        let m = mat(2, 2, &[(0, 1, 1), (1, 0, 1)]);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.rank(), 2);
        assert_eq!(factors_u64(&snf), vec![1, 1]);
        assert!(snf.verify(&m));
    }

    #[test]
    fn rank_one_with_content_two() {
        let m = mat(2, 2, &[(0, 0, 2), (0, 1, 4), (1, 0, 2), (1, 1, 4)]);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.rank(), 1);
        assert_eq!(factors_u64(&snf), vec![2]);
        assert!(snf.verify(&m));
    }

    #[test]
    fn zero_matrix() {
        let m = SparseIntMatrix::zero(3, 2);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.rank(), 0);
        assert!(factors_u64(&snf).is_empty());
        assert!(snf.verify(&m));
    }

    #[test]
    fn divisibility_chain_example() {
        // diag(2, 6) after reduction: factors 2 | 6
        let m = mat(2, 2, &[(0, 0, 2), (1, 1, 6)]);
        let snf = smith_normal_form(&m);
        assert_eq!(factors_u64(&snf), vec![2, 6]);
        // and a non-diagonal case with torsion 3
        let m = mat(2, 2, &[(0, 0, 1), (0, 1, 2), (1, 0, 2), (1, 1, 1)]);
        let snf = smith_normal_form(&m);
        assert_eq!(factors_u64(&snf), vec![1, 3]);
        assert!(snf.verify(&m));
    }

    #[test]
    fn determinants_match_tracked_signs() {
        let m = mat(3, 3, &[(0, 1, 1), (1, 0, -1), (1, 2, 3), (2, 2, 2), (2, 0, 5)]);
        let snf = smith_normal_form(&m);
        assert!(snf.verify(&m));
        let (su, sv) = snf.tracked_det_signs();
        assert_eq!(snf.det_u(), BigInt::from(su));
        assert_eq!(snf.det_v(), BigInt::from(sv));
    }

    #[test]
    fn rank_mod_p_examples() {
        let m = mat(2, 2, &[(0, 0, 2)]);
        assert_eq!(rank_mod_p(&m, 2).unwrap(), 0);
        assert_eq!(rank_mod_p(&m, 3).unwrap(), 1);
        let perm = mat(3, 3, &[(0, 2, 1), (1, 0, 1), (2, 1, 1)]);
        for p in [2, 3, 5, 32003] {
            assert_eq!(rank_mod_p(&perm, p).unwrap(), 3);
        }
        assert_eq!(rank_mod_p(&perm, 4), Err(MatrixError::NotPrime(4)));
    }

    #[test]
    fn multiply_and_shapes() {
        let a = mat(2, 3, &[(0, 0, 1), (0, 2, -1), (1, 1, 2)]);
        let b = mat(3, 2, &[(0, 0, 3), (2, 0, 3), (1, 1, 1)]);
        let ab = a.multiply(&b).unwrap();
        assert_eq!(ab.entries(), &[(1, 1, 2)]);
        assert!(a.multiply(&a).is_err());
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(SparseIntMatrix::new(1, 1, vec![(0, 1, 1)]).is_err());
        assert!(SparseIntMatrix::new(2, 2, vec![(0, 0, 1), (0, 0, 2)]).is_err());
        assert!(SparseIntMatrix::new(2, 2, vec![(0, 0, 0)]).is_err());
    }

    #[test]
    fn negative_determinant_input_still_unimodular() {
        // a matrix whose reduction needs sign normalization
        let m = mat(2, 2, &[(0, 0, -3), (1, 1, -5), (0, 1, 1)]);
        let snf = smith_normal_form(&m);
        assert!(snf.verify(&m));
        let (su, sv) = snf.tracked_det_signs();
        assert_eq!(snf.det_u(), BigInt::from(su));
        assert_eq!(snf.det_v(), BigInt::from(sv));
        assert_eq!(factors_u64(&snf), vec![1, 15]);
    }
}
