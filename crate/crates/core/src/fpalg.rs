//! Linear algebra over prime fields: vectors, matrices, the standard
//! alternating form on `F_p^{2m}`, and the order-`p` symplectic map used to
//! build the semidirect-product examples.
//!
//! Matrices act on row vectors from the right (`v -> vM`), so row `i` of a
//! matrix is the image of the `i`-th basis vector. Basis order for the
//! symplectic space is always `x_1..x_m, y_1..y_m`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{QkError, Result};

/// Largest admissible modulus. Keeps every product of two residues well inside `u64`.
pub const MAX_PRIME: u32 = u16::MAX as u32;

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Validates an odd prime modulus for field arithmetic.
pub fn check_odd_prime(p: u32) -> Result<u32> {
    if p > MAX_PRIME {
        return Err(QkError::invalid("p", format!("{p} exceeds the 16-bit modulus bound")));
    }
    if p == 2 {
        return Err(QkError::invalid("p", "characteristic 2 is not supported"));
    }
    if !is_prime(p as u64) {
        return Err(QkError::invalid("p", format!("{p} is not prime")));
    }
    Ok(p)
}

/// Inverse of `a` modulo the prime `p` (Fermat).
pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p - 2, p)
}

pub(crate) fn pow_mod(a: u32, mut e: u32, p: u32) -> u32 {
    let (mut base, mut acc) = (a as u64 % p as u64, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    acc as u32
}

/// A residue modulo an odd prime, stored in canonical form `0 <= value < p`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FpScalar {
    value: u32,
    p: u32,
}

impl FpScalar {
    /// Reduces a signed integer into `F_p`. `p` is assumed validated.
    pub fn new(value: i64, p: u32) -> Self {
        FpScalar { value: value.rem_euclid(p as i64) as u32, p }
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> u32 {
        self.p
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(self) -> Option<Self> {
        (self.value != 0).then(|| FpScalar { value: inv_mod(self.value, self.p), p: self.p })
    }
}

impl fmt::Debug for FpScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.p)
    }
}

impl Add for FpScalar {
    type Output = FpScalar;
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.p, rhs.p);
        FpScalar { value: (self.value + rhs.value) % self.p, p: self.p }
    }
}

impl Sub for FpScalar {
    type Output = FpScalar;
    fn sub(self, rhs: Self) -> Self {
        debug_assert_eq!(self.p, rhs.p);
        FpScalar { value: (self.value + self.p - rhs.value) % self.p, p: self.p }
    }
}

impl Mul for FpScalar {
    type Output = FpScalar;
    fn mul(self, rhs: Self) -> Self {
        debug_assert_eq!(self.p, rhs.p);
        FpScalar { value: ((self.value as u64 * rhs.value as u64) % self.p as u64) as u32, p: self.p }
    }
}

impl Neg for FpScalar {
    type Output = FpScalar;
    fn neg(self) -> Self {
        FpScalar { value: (self.p - self.value) % self.p, p: self.p }
    }
}

/// Dense matrix over `F_p`, row major, entries kept reduced.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FpMatrix {}x{} over F_{}", self.rows, self.cols, self.p)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        FpMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from signed rows, reducing every entry mod `p`.
    pub fn from_rows(p: u32, rows: &[Vec<i64>]) -> Result<Self> {
        check_odd_prime(p)?;
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(QkError::DimensionMismatch("ragged row list".into()));
        }
        let data = rows.iter().flatten().map(|&v| v.rem_euclid(p as i64) as u32).collect();
        Ok(FpMatrix { p, rows: rows.len(), cols, data })
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn entry(&self, r: usize, c: usize) -> FpScalar {
        FpScalar { value: self.get(r, c), p: self.p }
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.cols + c] = v.rem_euclid(self.p as i64) as u32;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.p, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul(&self, rhs: &FpMatrix) -> Result<FpMatrix> {
        if self.cols != rhs.rows || self.p != rhs.p {
            return Err(QkError::DimensionMismatch(format!("{}x{} * {}x{}", self.rows, self.cols, rhs.rows, rhs.cols)));
        }
        let p = self.p as u64;
        let mut out = Self::zeros(self.p, self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k) as u64;
                if a == 0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    let idx = r * rhs.cols + c;
                    out.data[idx] = ((out.data[idx] as u64 + a * rhs.get(k, c) as u64) % p) as u32;
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &FpMatrix) -> Result<FpMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols || self.p != rhs.p {
            return Err(QkError::DimensionMismatch("matrix difference".into()));
        }
        let p = self.p;
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| (a + p - b) % p).collect();
        Ok(FpMatrix { p, rows: self.rows, cols: self.cols, data })
    }

    pub fn pow(&self, mut e: u64) -> Result<FpMatrix> {
        if !self.is_square() {
            return Err(QkError::DimensionMismatch("power of a non-square matrix".into()));
        }
        let mut acc = Self::identity(self.p, self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            base = base.mul(&base)?;
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Self::identity(self.p, self.rows)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// Row vector times matrix.
    pub fn apply_row(&self, v: &[u32]) -> Vec<u32> {
        debug_assert_eq!(v.len(), self.rows);
        let p = self.p as u64;
        let mut out = vec![0u64; self.cols];
        for (r, &coef) in v.iter().enumerate() {
            if coef == 0 {
                continue;
            }
            for (c, slot) in out.iter_mut().enumerate() {
                *slot = (*slot + coef as u64 * self.get(r, c) as u64) % p;
            }
        }
        out.into_iter().map(|x| x as u32).collect()
    }
}

/// Reduced row-echelon form together with rank and pivot columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowEchelon {
    pub reduced: FpMatrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

/// Gauss-Jordan elimination over `F_p`.
pub fn row_reduce(m: &FpMatrix) -> RowEchelon {
    let p = m.p as u64;
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut lead = 0;
    for c in 0..a.cols {
        if lead == a.rows {
            break;
        }
        let Some(piv) = (lead..a.rows).find(|&r| a.get(r, c) != 0) else { continue };
        if piv != lead {
            for k in 0..a.cols {
                a.data.swap(piv * a.cols + k, lead * a.cols + k);
            }
        }
        let inv = inv_mod(a.get(lead, c), m.p) as u64;
        for k in 0..a.cols {
            let idx = lead * a.cols + k;
            a.data[idx] = (a.data[idx] as u64 * inv % p) as u32;
        }
        for r in 0..a.rows {
            let f = a.get(r, c) as u64;
            if r == lead || f == 0 {
                continue;
            }
            for k in 0..a.cols {
                let sub = f * a.get(lead, k) as u64 % p;
                let idx = r * a.cols + k;
                a.data[idx] = ((a.data[idx] as u64 + p - sub) % p) as u32;
            }
        }
        pivots.push(c);
        lead += 1;
    }
    RowEchelon { reduced: a, rank: pivots.len(), pivots }
}

/// `F_p^{2m}` with the standard alternating form: `<x_i, y_j> = delta_ij`,
/// `<y_j, x_i> = -delta_ij`, all other basis pairings zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticSpace {
    p: u32,
    m: usize,
    gram: FpMatrix,
}

impl SymplecticSpace {
    pub fn modulus(&self) -> u32 {
        self.p
    }

    /// Half the dimension.
    pub fn half_dim(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        2 * self.m
    }

    pub fn gram(&self) -> &FpMatrix {
        &self.gram
    }

    /// Human-readable basis labels in canonical order.
    pub fn basis_labels(&self) -> Vec<String> {
        (1..=self.m).map(|i| format!("x{i}")).chain((1..=self.m).map(|i| format!("y{i}"))).collect()
    }

    /// Evaluates the form on two coordinate vectors.
    pub fn pair(&self, v: &[u32], w: &[u32]) -> u32 {
        let p = self.p as u64;
        let mut acc = 0u64;
        for i in 0..self.dim() {
            if v[i] == 0 {
                continue;
            }
            for j in 0..self.dim() {
                acc = (acc + v[i] as u64 * self.gram.get(i, j) as u64 % p * w[j] as u64) % p;
            }
        }
        acc as u32
    }

    pub fn basis_vector(&self, i: usize) -> Vec<u32> {
        let mut v = vec![0; self.dim()];
        v[i] = 1;
        v
    }
}

/// The standard alternating form of rank `2m` over `F_p`.
pub fn standard_symplectic_form(p: u32, m: usize) -> Result<SymplecticSpace> {
    check_odd_prime(p)?;
    if m == 0 {
        return Err(QkError::invalid("m", "must be positive"));
    }
    let mut gram = FpMatrix::zeros(p, 2 * m, 2 * m);
    for i in 0..m {
        gram.set(i, m + i, 1);
        gram.set(m + i, i, -1);
    }
    Ok(SymplecticSpace { p, m, gram })
}

/// Matrix of the unipotent symplectic map
///
/// ```text
/// x_i -> (-1)^(m+1-i) y_m + sum_{j=i..m} (-1)^(j-i) x_j
/// y_i -> y_i + y_(i-1)   (i >= 2),    y_1 -> y_1
/// ```
///
/// whose fixed space is spanned by `y_1`.
pub fn phi_matrix(p: u32, m: usize) -> Result<FpMatrix> {
    check_odd_prime(p)?;
    if m == 0 {
        return Err(QkError::invalid("m", "must be positive"));
    }
    let sign = |e: usize| if e.is_multiple_of(2) { 1i64 } else { -1 };
    let mut phi = FpMatrix::zeros(p, 2 * m, 2 * m);
    for i in 0..m {
        // 1-based index i+1
        phi.set(i, 2 * m - 1, sign(m - i));
        for j in i..m {
            phi.set(i, j, sign(j - i));
        }
    }
    for i in 0..m {
        phi.set(m + i, m + i, 1);
        if i > 0 {
            phi.set(m + i, m + i - 1, 1);
        }
    }
    Ok(phi)
}

/// True iff `<vM, wM> = <v, w>` on every pair of basis vectors.
pub fn is_symplectic(m: &FpMatrix, space: &SymplecticSpace) -> Result<bool> {
    let n = space.dim();
    if m.rows() != n || m.cols() != n || m.modulus() != space.modulus() {
        return Err(QkError::DimensionMismatch(format!(
            "{}x{} matrix against a {n}-dimensional form",
            m.rows(),
            m.cols()
        )));
    }
    // M G M^T = G
    let lhs = m.mul(space.gram())?.mul(&m.transpose())?;
    Ok(lhs == *space.gram())
}

/// Result of searching for the multiplicative order of a matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixOrder {
    Finite(u64),
    /// No power up to the cap is the identity.
    ExceedsCap,
}

/// Least `k <= cap` with `M^k = I`.
pub fn matrix_order(m: &FpMatrix, cap: u64) -> Result<MatrixOrder> {
    if !m.is_square() {
        return Err(QkError::DimensionMismatch("order of a non-square matrix".into()));
    }
    if row_reduce(m).rank < m.rows() {
        return Err(QkError::Precondition("matrix is singular".into()));
    }
    let mut power = m.clone();
    for k in 1..=cap {
        if power.is_identity() {
            return Ok(MatrixOrder::Finite(k));
        }
        power = power.mul(m)?;
    }
    Ok(MatrixOrder::ExceedsCap)
}

/// Row-reduced basis of `{v : vM = v}`.
pub fn fixed_space(m: &FpMatrix) -> Result<Vec<Vec<u32>>> {
    if !m.is_square() {
        return Err(QkError::DimensionMismatch("fixed space of a non-square matrix".into()));
    }
    let n = m.rows();
    let shifted = m.sub(&FpMatrix::identity(m.p, n))?;
    Ok(left_kernel(&shifted))
}

/// Row-reduced basis of `{v : vA = 0}`.
pub fn left_kernel(a: &FpMatrix) -> Vec<Vec<u32>> {
    let p = a.p;
    // vA = 0  <=>  A^T v^T = 0
    let ech = row_reduce(&a.transpose());
    let n = a.rows();
    let free: Vec<usize> = (0..n).filter(|c| !ech.pivots.contains(c)).collect();
    let mut basis = FpMatrix::zeros(p, free.len(), n);
    for (b, &f) in free.iter().enumerate() {
        basis.set(b, f, 1);
        for (r, &pc) in ech.pivots.iter().enumerate() {
            basis.set(b, pc, -(ech.reduced.get(r, f) as i64));
        }
    }
    let red = row_reduce(&basis);
    (0..red.rank).map(|r| red.reduced.row(r).to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank_by_minors(m: &FpMatrix) -> usize {
        // largest k with a nonzero k x k minor
        let p = m.p as i64;
        fn det(a: &[Vec<i64>], p: i64) -> i64 {
            let n = a.len();
            if n == 1 {
                return a[0][0].rem_euclid(p);
            }
            let mut acc = 0;
            for c in 0..n {
                let minor: Vec<Vec<i64>> = a[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &v)| v).collect())
                    .collect();
                let s = if c % 2 == 0 { 1 } else { -1 };
                acc = (acc + s * a[0][c] * det(&minor, p)).rem_euclid(p);
            }
            acc
        }
        fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            if n < k {
                return vec![];
            }
            let mut out = subsets(n - 1, k);
            for mut s in subsets(n - 1, k - 1) {
                s.push(n - 1);
                out.push(s);
            }
            out
        }
        for k in (1..=m.rows.min(m.cols)).rev() {
            for rs in subsets(m.rows, k) {
                for cs in subsets(m.cols, k) {
                    let a: Vec<Vec<i64>> =
                        rs.iter().map(|&r| cs.iter().map(|&c| m.get(r, c) as i64).collect()).collect();
                    if det(&a, p) != 0 {
                        return k;
                    }
                }
            }
        }
        0
    }

    #[test]
    fn gram_for_p3_m1() {
        let s = standard_symplectic_form(3, 1).unwrap();
        assert_eq!(*s.gram(), FpMatrix::from_rows(3, &[vec![0, 1], vec![-1, 0]]).unwrap());
        let x1 = s.basis_vector(0);
        assert_eq!(s.pair(&x1, &x1), 0);
    }

    #[test]
    fn gram_p5_m2_has_full_rank() {
        let s = standard_symplectic_form(5, 2).unwrap();
        assert_eq!(row_reduce(s.gram()).rank, 4);
    }

    #[test]
    fn form_rejects_bad_parameters() {
        assert!(standard_symplectic_form(2, 1).is_err());
        assert!(standard_symplectic_form(9, 1).is_err());
        assert!(standard_symplectic_form(3, 0).is_err());
        assert!(phi_matrix(4, 2).is_err());
    }

    #[test]
    fn phi_small_cases() {
        let phi = phi_matrix(3, 1).unwrap();
        assert_eq!(phi, FpMatrix::from_rows(3, &[vec![1, 2], vec![0, 1]]).unwrap());

        let phi = phi_matrix(5, 2).unwrap();
        // y2 -> y2 + y1, y1 -> y1
        assert_eq!(phi.row(3), &[0, 0, 1, 1]);
        assert_eq!(phi.row(2), &[0, 0, 1, 0]);
        // x1 -> (-1)^2 y2 + x1 - x2 ; x2 -> -y2 + x2
        assert_eq!(phi.row(0), &[1, 4, 0, 1]);
        assert_eq!(phi.row(1), &[0, 1, 0, 4]);
    }

    #[test]
    fn symplectic_checks() {
        let s = standard_symplectic_form(3, 1).unwrap();
        assert!(is_symplectic(&FpMatrix::identity(3, 2), &s).unwrap());
        assert!(is_symplectic(&phi_matrix(3, 1).unwrap(), &s).unwrap());
        let d = FpMatrix::from_rows(3, &[vec![2, 0], vec![0, 1]]).unwrap();
        assert!(!is_symplectic(&d, &s).unwrap());
        assert!(is_symplectic(&FpMatrix::identity(3, 4), &s).is_err());
    }

    #[test]
    fn orders() {
        assert_eq!(matrix_order(&FpMatrix::identity(5, 3), 10).unwrap(), MatrixOrder::Finite(1));
        assert_eq!(matrix_order(&phi_matrix(3, 1).unwrap(), 10).unwrap(), MatrixOrder::Finite(3));
        assert_eq!(matrix_order(&phi_matrix(7, 2).unwrap(), 7).unwrap(), MatrixOrder::Finite(7));
        assert_eq!(matrix_order(&phi_matrix(7, 2).unwrap(), 6).unwrap(), MatrixOrder::ExceedsCap);
        let singular = FpMatrix::from_rows(3, &[vec![1, 1], vec![2, 2]]).unwrap();
        assert!(matrix_order(&singular, 10).is_err());
    }

    #[test]
    fn fixed_spaces() {
        assert_eq!(fixed_space(&FpMatrix::identity(3, 2)).unwrap().len(), 2);
        assert_eq!(fixed_space(&phi_matrix(3, 1).unwrap()).unwrap(), vec![vec![0, 1]]);
        assert_eq!(fixed_space(&phi_matrix(7, 3).unwrap()).unwrap(), vec![vec![0, 0, 0, 1, 0, 0]]);
    }

    #[test]
    fn row_reduce_examples() {
        assert_eq!(row_reduce(&FpMatrix::zeros(3, 3, 3)).rank, 0);
        assert_eq!(row_reduce(standard_symplectic_form(3, 1).unwrap().gram()).rank, 2);
        let m = FpMatrix::from_rows(3, &[vec![1, 1], vec![2, 2]]).unwrap();
        let e = row_reduce(&m);
        assert_eq!((e.rank, e.pivots.clone()), (1, vec![0]));
    }

    #[test]
    fn scalar_arithmetic() {
        let a = FpScalar::new(-1, 7);
        assert_eq!(a.value(), 6);
        assert_eq!((a * a).value(), 1);
        assert_eq!((a + FpScalar::new(2, 7)).value(), 1);
        assert_eq!(a.inverse().unwrap().value(), 6);
        assert!(FpScalar::new(14, 7).inverse().is_none());
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn rank_matches_minor_expansion(
            p in prop::sample::select(vec![3u32, 5, 7]),
            rows in 1usize..=4,
            cols in 1usize..=4,
            seed in prop::collection::vec(0i64..7, 16),
        ) {
            let data: Vec<Vec<i64>> = (0..rows).map(|r| (0..cols).map(|c| seed[r * 4 + c]).collect()).collect();
            let m = FpMatrix::from_rows(p, &data).unwrap();
            prop_assert_eq!(row_reduce(&m).rank, rank_by_minors(&m));
        }
    }
}
