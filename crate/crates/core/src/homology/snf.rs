use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{CheckedMul, CheckedSub, One, Signed, Zero};

/// Integer matrix in column-sparse form: `columns[c]` lists `(row, value)`
/// with nonzero values and distinct rows.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseIntMatrix {
    pub rows: usize,
    pub cols: usize,
    pub columns: Vec<Vec<(u32, i64)>>,
}

impl SparseIntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseIntMatrix { rows, cols, columns: vec![Vec::new(); cols] }
    }

    pub fn from_dense(data: &[Vec<i64>]) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows, cols);
        for (r, row) in data.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged matrix");
            for (c, &v) in row.iter().enumerate() {
                if v != 0 {
                    m.columns[c].push((r as u32, v));
                }
            }
        }
        m
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut out = vec![vec![0; self.cols]; self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                out[r as usize][c] = v;
            }
        }
        out
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }
}

/// Smith normal form data: the nonzero invariant factors
/// `d_1 | d_2 | ... | d_rank`, all positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub rank: usize,
    pub invariant_factors: Vec<BigInt>,
}

impl SmithForm {
    /// Invariant factors greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.invariant_factors.iter().filter(|d| !d.is_one()).cloned().collect()
    }
}

/// Ring of exact integers the elimination runs over.
pub trait SnfInt: Clone + Debug + Ord + Signed + Integer + CheckedMul + CheckedSub + From<i64> + Into<BigInt> {}
impl SnfInt for i64 {}
impl SnfInt for BigInt {}

/// Entry growth beyond the machine word.
#[derive(Debug)]
pub struct Overflow;

/// Smith normal form over the integers. Elimination first runs on `i64`
/// with checked arithmetic and restarts on `BigInt` if any step overflows.
pub fn smith_normal_form(m: &SparseIntMatrix) -> SmithForm {
    match eliminate::<i64>(m) {
        Ok(diag) => normalize(diag.into_iter().map(BigInt::from).collect()),
        Err(Overflow) => {
            normalize(eliminate::<BigInt>(m).unwrap_or_else(|_| unreachable!("BigInt arithmetic cannot overflow")))
        }
    }
}

/// Same as [`smith_normal_form`] but forcing arbitrary precision throughout.
pub fn smith_normal_form_bigint(m: &SparseIntMatrix) -> SmithForm {
    normalize(eliminate::<BigInt>(m).unwrap_or_else(|_| unreachable!("BigInt arithmetic cannot overflow")))
}

struct Elim<T> {
    rows: Vec<BTreeMap<u32, T>>,
    cols: Vec<BTreeSet<u32>>,
    // (entries in column, column) for every nonempty column
    by_len: BTreeSet<(u32, u32)>,
}

impl<T: SnfInt> Elim<T> {
    fn new(m: &SparseIntMatrix) -> Self {
        let mut rows = vec![BTreeMap::new(); m.rows];
        let mut cols = vec![BTreeSet::new(); m.cols];
        for (c, col) in m.columns.iter().enumerate() {
            for &(r, v) in col {
                if v != 0 {
                    rows[r as usize].insert(c as u32, T::from(v));
                    cols[c].insert(r);
                }
            }
        }
        let by_len =
            cols.iter().enumerate().filter(|(_, s)| !s.is_empty()).map(|(c, s)| (s.len() as u32, c as u32)).collect();
        Elim { rows, cols, by_len }
    }

    fn set(&mut self, r: u32, c: u32, v: T) {
        let before = self.cols[c as usize].len() as u32;
        if v.is_zero() {
            self.rows[r as usize].remove(&c);
            self.cols[c as usize].remove(&r);
        } else {
            self.rows[r as usize].insert(c, v);
            self.cols[c as usize].insert(r);
        }
        let after = self.cols[c as usize].len() as u32;
        if before != after {
            if before > 0 {
                self.by_len.remove(&(before, c));
            }
            if after > 0 {
                self.by_len.insert((after, c));
            }
        }
    }

    fn get(&self, r: u32, c: u32) -> &T {
        &self.rows[r as usize][&c]
    }

    // Entry of least absolute value; ties broken by Markowitz cost, then
    // column and row index. A unit in the sparsest column is taken at once.
    fn pivot(&self) -> Option<(u32, u32)> {
        let &(_, c0) = self.by_len.first()?;
        let unit = self.cols[c0 as usize]
            .iter()
            .filter(|&&r| self.get(r, c0).abs().is_one())
            .min_by_key(|&&r| (self.rows[r as usize].len(), r));
        if let Some(&r) = unit {
            return Some((r, c0));
        }
        let mut best: Option<(T, usize, u32, u32)> = None;
        for &(len, c) in &self.by_len {
            for &r in &self.cols[c as usize] {
                let key = (self.get(r, c).abs(), (self.rows[r as usize].len() - 1) * (len as usize - 1), c, r);
                if best.as_ref().is_none_or(|b| key < *b) {
                    best = Some(key);
                }
            }
        }
        best.map(|(_, _, c, r)| (r, c))
    }

    // row[target] -= q * row[source]
    fn row_axpy(&mut self, target: u32, source: u32, q: &T) -> Result<(), Overflow> {
        let src: Vec<(u32, T)> = self.rows[source as usize].iter().map(|(&c, v)| (c, v.clone())).collect();
        for (c, v) in src {
            let prod = q.checked_mul(&v).ok_or(Overflow)?;
            let cur = self.rows[target as usize].get(&c).cloned().unwrap_or_else(T::zero);
            let next = cur.checked_sub(&prod).ok_or(Overflow)?;
            self.set(target, c, next);
        }
        Ok(())
    }
}

fn eliminate<T: SnfInt>(m: &SparseIntMatrix) -> Result<Vec<T>, Overflow> {
    let mut e = Elim::<T>::new(m);
    let mut diag = Vec::new();
    while let Some((r, c)) = e.pivot() {
        let a = e.get(r, c).clone();
        let others: Vec<u32> = e.cols[c as usize].iter().copied().filter(|&x| x != r).collect();
        let mut column_clear = true;
        for r2 in others {
            let q = e.get(r2, c).clone() / a.clone();
            if !q.is_zero() {
                e.row_axpy(r2, r, &q)?;
            }
            column_clear &= !e.cols[c as usize].contains(&r2);
        }
        if !column_clear {
            continue;
        }
        // column c now holds only the pivot, so column operations against it
        // touch row r alone
        let rest: Vec<(u32, T)> =
            e.rows[r as usize].iter().filter(|(&c2, _)| c2 != c).map(|(&c2, v)| (c2, v.clone())).collect();
        let mut row_clear = true;
        for (c2, v) in rest {
            let rem = v.clone() - (v / a.clone()) * a.clone();
            row_clear &= rem.is_zero();
            e.set(r, c2, rem);
        }
        if row_clear {
            e.set(r, c, T::zero());
            diag.push(a.abs());
        }
    }
    Ok(diag)
}

// Diagonal to invariant factors. Units are already in normal position; the
// rest are brought into a divisibility chain by gcd/lcm replacement.
fn normalize(diag: Vec<BigInt>) -> SmithForm {
    let rank = diag.len();
    let (units, mut rest): (Vec<BigInt>, Vec<BigInt>) = diag.into_iter().partition(|d| d.is_one());
    rest.sort();
    for i in 0..rest.len() {
        for j in i + 1..rest.len() {
            if !(&rest[j] % &rest[i]).is_zero() {
                let g = rest[i].gcd(&rest[j]);
                let l = rest[i].lcm(&rest[j]);
                rest[i] = g;
                rest[j] = l;
            }
        }
    }
    let mut factors = units;
    factors.extend(rest);
    // a gcd step can produce new units; keep them in front
    factors.sort();
    SmithForm { rank, invariant_factors: factors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn factors(m: &[Vec<i64>]) -> Vec<i64> {
        smith_normal_form(&SparseIntMatrix::from_dense(m))
            .invariant_factors
            .iter()
            .map(|d| i64::try_from(d).unwrap())
            .collect()
    }

    #[test]
    fn small_examples() {
        assert_eq!(factors(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]), vec![1, 1, 1]);
        assert_eq!(factors(&[vec![2, 0], vec![0, 3]]), vec![1, 6]);
        assert_eq!(smith_normal_form(&SparseIntMatrix::from_dense(&[vec![0, 0], vec![0, 0]])).rank, 0);
        assert_eq!(factors(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]), vec![2, 6, 12]);
        assert_eq!(factors(&[vec![4, 0], vec![0, 6]]), vec![2, 12]);
        assert_eq!(factors(&[vec![2], vec![2]]), vec![2]);
    }

    #[test]
    fn overflow_falls_back_to_bigint() {
        let big = 1i64 << 40;
        let m = SparseIntMatrix::from_dense(&[vec![big, big + 1], vec![big - 1, big]]);
        // det = big^2 - (big^2 - 1) = 1
        assert_eq!(smith_normal_form(&m), smith_normal_form_bigint(&m));
        assert_eq!(smith_normal_form(&m).invariant_factors, vec![BigInt::from(1), BigInt::from(1)]);
        let huge = SparseIntMatrix::from_dense(&[vec![i64::MAX, 3], vec![5, i64::MAX - 7]]);
        assert_eq!(smith_normal_form(&huge), smith_normal_form_bigint(&huge));
    }

    // independent oracle: Gaussian elimination over the rationals
    fn rational_rank(m: &[Vec<i64>]) -> usize {
        let mut a: Vec<Vec<BigRational>> =
            m.iter().map(|r| r.iter().map(|&v| BigRational::from_integer(v.into())).collect()).collect();
        let (rows, cols) = (a.len(), a.first().map_or(0, Vec::len));
        let mut rank = 0;
        for c in 0..cols {
            let Some(p) = (rank..rows).find(|&r| !a[r][c].is_zero()) else { continue };
            a.swap(rank, p);
            for r in 0..rows {
                if r != rank && !a[r][c].is_zero() {
                    let f = &a[r][c] / &a[rank][c];
                    for k in 0..cols {
                        let d = &f * &a[rank][k];
                        a[r][k] -= d;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    // product of invariant factors equals the gcd of maximal minors; for
    // square full-rank matrices that is |det|
    fn det(m: &[Vec<i64>]) -> BigInt {
        let n = m.len();
        if n == 0 {
            return BigInt::one();
        }
        (0..n)
            .map(|c| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(k, _)| k != c).map(|(_, &v)| v).collect())
                    .collect();
                let s = if c % 2 == 0 { 1 } else { -1 };
                BigInt::from(s * m[0][c]) * det(&minor)
            })
            .sum()
    }

    #[test]
    fn rank_agrees_with_rational_elimination_on_random_sparse_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let rows = rng.gen_range(1..=40);
            let cols = rng.gen_range(1..=40);
            let density = rng.gen_range(0.02..0.3);
            let m: Vec<Vec<i64>> = (0..rows)
                .map(|_| (0..cols).map(|_| if rng.gen_bool(density) { rng.gen_range(-3..=3) } else { 0 }).collect())
                .collect();
            let snf = smith_normal_form(&SparseIntMatrix::from_dense(&m));
            assert_eq!(snf.rank, rational_rank(&m));
            assert!(snf.invariant_factors.windows(2).all(|w| (&w[1] % &w[0]).is_zero()));
        }
    }

    proptest! {
        #[test]
        fn determinant_matches_factor_product(m in prop::collection::vec(prop::collection::vec(-4i64..=4, 4), 4)) {
            let snf = smith_normal_form(&SparseIntMatrix::from_dense(&m));
            let d = det(&m).abs();
            if snf.rank == 4 {
                prop_assert_eq!(snf.invariant_factors.iter().product::<BigInt>(), d);
            } else {
                prop_assert!(d.is_zero());
            }
        }
    }
}
