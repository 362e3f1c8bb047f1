use crate::error::{QkError, Result};
use crate::fpalg::{
    check_odd_prime, inv_mod, is_symplectic, matrix_order, phi_matrix, standard_symplectic_form, FpMatrix, MatrixOrder,
};
use crate::groups::{Elem, FiniteGroup, GroupOracle};

use super::central::central_product;
use super::checked_power;
use super::extraspecial::{dot, Extraspecial, ExtraspecialElement, HeisenbergArith};

/// Automorphism of the extraspecial group `X` of exponent `p` lifting a
/// symplectic matrix `M` on `X/Z`:
///
/// ```text
/// (v, c) -> (vM, c + q(v) + <u, vM>),   q(v) = (B(vM,vM) - B(v,v)) / 2
/// ```
///
/// where `B((a,b),(a',b')) = a.b'` is the cocycle of the group law and `u`
/// is an inner correction chosen so that the lift has the same order as `M`.
#[derive(Clone, Debug)]
pub struct LiftedAutomorphism {
    p: u32,
    m: usize,
    matrix: FpMatrix,
    correction: Vec<u32>,
    attempts: usize,
}

impl LiftedAutomorphism {
    fn with_correction(p: u32, m: usize, matrix: FpMatrix, correction: Vec<u32>) -> Self {
        LiftedAutomorphism { p, m, matrix, correction, attempts: 0 }
    }

    pub fn matrix(&self) -> &FpMatrix {
        &self.matrix
    }

    /// The inner-correction vector `u`.
    pub fn correction(&self) -> &[u32] {
        &self.correction
    }

    /// Number of correction vectors tried before one gave the right order
    /// (1 means the uncorrected lift already worked).
    pub fn attempts(&self) -> usize {
        self.attempts
    }

    pub fn apply(&self, e: &ExtraspecialElement) -> ExtraspecialElement {
        let p = self.p;
        let v = e.vector();
        let w = self.matrix.apply_row(&v);
        let (wa, wb) = w.split_at(self.m);
        let (ua, ub) = self.correction.split_at(self.m);
        let b_vv = dot(&e.a, &e.b, p);
        let b_ww = dot(wa, wb, p);
        let half = inv_mod(2, p) as u64;
        let q = ((b_ww + p - b_vv) % p) as u64 * half % p as u64;
        // <u, w> = u_a . w_b - u_b . w_a
        let lin = (dot(ua, wb, p) + p - dot(ub, wa, p)) % p;
        let c = ((e.c as u64 + q + lin as u64) % p as u64) as u32;
        ExtraspecialElement::from_vector(&w, c)
    }

    pub fn apply_power(&self, e: &ExtraspecialElement, k: u64) -> ExtraspecialElement {
        (0..k).fold(e.clone(), |acc, _| self.apply(&acc))
    }

    /// True iff the map on `X/Z` induced by the lift is the given matrix,
    /// checked on all `2m` basis cosets.
    pub fn induces(&self, matrix: &FpMatrix) -> bool {
        (0..2 * self.m).all(|i| {
            let mut v = vec![0; 2 * self.m];
            v[i] = 1;
            self.apply(&ExtraspecialElement::from_vector(&v, 0)).vector() == matrix.row(i)
        })
    }

    /// Image of every element index of `x`.
    pub fn index_table(&self, x: &Extraspecial) -> Vec<Elem> {
        let arith = x.arith();
        (0..x.group().size() as Elem).map(|g| arith.encode(&self.apply(&arith.decode(g)))).collect()
    }

    /// Least `k >= 1` with `alpha^k` the identity on every element of `x`.
    pub fn order_on_elements(&self, x: &Extraspecial) -> u64 {
        let table = self.index_table(x);
        let mut current = table.clone();
        let mut k = 1;
        while current.iter().enumerate().any(|(i, &v)| v as usize != i) {
            current = current.iter().map(|&v| table[v as usize]).collect();
            k += 1;
        }
        k
    }

    /// Order of the lift computed from generator images only; valid because
    /// the lift is a homomorphism.
    pub fn order_on_generators(&self) -> u64 {
        let gens = self.generator_elements();
        let mut images = gens.clone();
        let mut k = 1;
        loop {
            images = images.iter().map(|e| self.apply(e)).collect();
            if images == gens {
                return k;
            }
            k += 1;
        }
    }

    fn generator_elements(&self) -> Vec<ExtraspecialElement> {
        (0..2 * self.m)
            .map(|i| {
                let mut v = vec![0; 2 * self.m];
                v[i] = 1;
                ExtraspecialElement::from_vector(&v, 0)
            })
            .collect()
    }

    /// Bijectivity, and `alpha(gh) = alpha(g) alpha(h)` on the given index
    /// pairs or on every pair when `pairs` is `None`.
    pub fn is_automorphism_on(&self, x: &Extraspecial, pairs: Option<&[(Elem, Elem)]>) -> bool {
        let g = x.group();
        let table = self.index_table(x);
        let mut seen = vec![false; table.len()];
        for &t in &table {
            if std::mem::replace(&mut seen[t as usize], true) {
                return false;
            }
        }
        let check = |a: Elem, b: Elem| table[g.mul(a, b) as usize] == g.mul(table[a as usize], table[b as usize]);
        match pairs {
            Some(list) => list.iter().all(|&(a, b)| check(a, b)),
            None => (0..g.size() as Elem).all(|a| (0..g.size() as Elem).all(|b| check(a, b))),
        }
    }
}

/// Lifts a symplectic matrix of order `p` (or the identity) to an
/// automorphism of the extraspecial group of order `p^(2m+1)` having the
/// same order and inducing the matrix on `X/Z`. The uncorrected quadratic
/// lift is tried first; after that correction vectors are searched in
/// lexicographic order.
pub fn lift_symplectic(p: u32, m: usize, matrix: &FpMatrix) -> Result<LiftedAutomorphism> {
    let space = standard_symplectic_form(p, m)?;
    if !is_symplectic(matrix, &space)? {
        return Err(QkError::Precondition("matrix does not preserve the alternating form".into()));
    }
    let target = match matrix_order(matrix, p as u64)? {
        MatrixOrder::Finite(k) if k == 1 || k == p as u64 => k,
        other => return Err(QkError::Precondition(format!("matrix order {other:?} is neither 1 nor p"))),
    };
    let n = 2 * m;
    let total = (p as u64).pow(n as u32);
    for (attempt, code) in (0..total).enumerate() {
        let mut u = vec![0; n];
        let mut c = code;
        for slot in u.iter_mut().rev() {
            *slot = (c % p as u64) as u32;
            c /= p as u64;
        }
        let mut lift = LiftedAutomorphism::with_correction(p, m, matrix.clone(), u);
        let gens = lift.generator_elements();
        if gens.iter().all(|e| lift.apply_power(e, target) == *e) {
            lift.attempts = attempt + 1;
            return Ok(lift);
        }
    }
    Err(QkError::Precondition("no inner correction yields a lift of the matrix order".into()))
}

struct SemidirectOracle {
    p: u32,
    xsize: u32,
    arith: HeisenbergArith,
    // act[k * xsize + x] = alpha^k(x)
    act: Vec<Elem>,
}

impl GroupOracle for SemidirectOracle {
    fn size(&self) -> usize {
        self.xsize as usize * self.p as usize
    }

    // (j, x)(j', x') = (j + j', alpha^j'(x) x')
    #[inline]
    fn mul(&self, a: Elem, b: Elem) -> Elem {
        let (j, x) = (a / self.xsize, a % self.xsize);
        let (j2, x2) = (b / self.xsize, b % self.xsize);
        let moved = self.act[(j2 * self.xsize + x) as usize];
        ((j + j2) % self.p) * self.xsize + self.arith.mul(moved, x2)
    }

    fn inv(&self, a: Elem) -> Elem {
        let (j, x) = (a / self.xsize, a % self.xsize);
        let back = (self.p - j) % self.p;
        back * self.xsize + self.act[(back * self.xsize + self.arith.inv(x)) as usize]
    }

    fn decode(&self, a: Elem) -> Vec<u32> {
        let e = self.arith.decode(a % self.xsize);
        std::iter::once(a / self.xsize).chain(e.a).chain(e.b).chain([e.c]).collect()
    }
}

/// The split extension `<g> X` of the extraspecial group `X` of order
/// `p^(2m+1)` by an order-`p` lift of [`phi_matrix`]. Elements are pairs
/// `(j, x)` standing for `g^j x`; conjugation by `g` acts on `X` as the lift.
#[derive(Clone, Debug)]
pub struct SemidirectExample {
    p: u32,
    m: usize,
    x: Extraspecial,
    lift: LiftedAutomorphism,
    group: FiniteGroup,
    j: u32,
}

impl SemidirectExample {
    /// Requires `p > 2m + 1` so that the result has exponent `p`.
    pub fn new(p: u32, m: usize) -> Result<Self> {
        check_odd_prime(p)?;
        if m == 0 {
            return Err(QkError::invalid("m", "must be positive"));
        }
        if p as usize <= 2 * m + 1 {
            return Err(QkError::invalid("p", format!("need p > 2m+1 = {}, got {p}", 2 * m + 1)));
        }
        checked_power(p, 2 * m as u32 + 2, "m")?;
        let x = Extraspecial::new(p, m)?;
        let lift = lift_symplectic(p, m, &phi_matrix(p, m)?)?;
        let xsize = x.group().size() as u32;
        let base = lift.index_table(&x);
        let mut act: Vec<Elem> = (0..xsize).collect();
        for k in 1..p as usize {
            let prev = &act[(k - 1) * xsize as usize..k * xsize as usize];
            let next: Vec<Elem> = prev.iter().map(|&v| base[v as usize]).collect();
            act.extend(next);
        }
        let oracle = SemidirectOracle { p, xsize, arith: x.arith().clone(), act };
        let gens: Vec<Elem> = std::iter::once(xsize).chain(x.group().generators().iter().copied()).collect();
        let group = FiniteGroup::from_oracle(format!("semidirect_example({p},{m})"), p, Box::new(oracle), Some(gens))?;
        let mut ex = SemidirectExample { p, m, x, lift, group, j: 0 };
        let c = ex.group.commutator(ex.g(), ex.y(0));
        let coords = ex.x.element(c);
        if c >= xsize || coords.vector().iter().any(|&v| v != 0) {
            return Err(QkError::InvariantViolated("[g, y1] is not central".into()));
        }
        ex.j = coords.c;
        Ok(ex)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn into_group(self) -> FiniteGroup {
        self.group
    }

    pub fn extraspecial(&self) -> &Extraspecial {
        &self.x
    }

    pub fn lift(&self) -> &LiftedAutomorphism {
        &self.lift
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn half_rank(&self) -> usize {
        self.m
    }

    /// The adjoined automorphism `g`.
    pub fn g(&self) -> Elem {
        self.x.group().size() as Elem
    }

    /// Image of an element of `X`.
    pub fn embed(&self, x: Elem) -> Elem {
        x
    }

    pub fn x(&self, i: usize) -> Elem {
        self.x.x(i)
    }

    pub fn y(&self, i: usize) -> Elem {
        self.x.y(i)
    }

    pub fn z(&self) -> Elem {
        self.x.z()
    }

    /// Exponent `j` with `[g, y_1] = z^j`.
    pub fn j(&self) -> u32 {
        self.j
    }

    /// Generators `g x_1^(1-j)` and `y_1` of the order-`p^3` subgroup outside `X`.
    pub fn small_extraspecial_generators(&self) -> [Elem; 2] {
        let e = ((1 + self.p as i64 - self.j as i64) % self.p as i64) as u64;
        let h = &self.group;
        [h.mul(self.g(), h.pow(self.x(0), e)), self.y(0)]
    }

    /// Subgroup `X` inside the extension.
    pub fn x_subgroup_generators(&self) -> Vec<Elem> {
        self.x.group().generators().to_vec()
    }
}

/// Group of order `p^(2m+2)` and exponent `p` whose truncated complex has
/// homology exactly in degrees `0` and `m - 1`.
pub fn semidirect_example(p: u32, m: usize) -> Result<FiniteGroup> {
    Ok(SemidirectExample::new(p, m)?.into_group())
}

/// Order `p^(2(t+k+2))` of [`corollary3_group`], without building it.
pub fn corollary3_order(p: u32, t: u32, k: u32) -> Option<u128> {
    (p as u128).checked_pow(2 * (t + k + 2))
}

pub(crate) fn check_corollary3_parameters(p: u32, k: u32) -> Result<()> {
    check_odd_prime(p)?;
    if k == 0 {
        return Err(QkError::invalid("k", "must be positive"));
    }
    if p <= 2 * k + 3 {
        return Err(QkError::invalid("p", format!("need p > 2k+3 = {}, got {p}", 2 * k + 3)));
    }
    Ok(())
}

/// Group of order `p^(2(t+k+2))` with truncated homology in degrees `t` and
/// `t + k` only: the split extension for `m = k + 1`, centrally multiplied
/// with an extraspecial group of order `p^(2t+1)` when `t > 0`.
pub fn corollary3_group(p: u32, t: u32, k: u32) -> Result<FiniteGroup> {
    check_corollary3_parameters(p, k)?;
    let base = semidirect_example(p, k as usize + 1)?;
    if t == 0 {
        return Ok(base);
    }
    let factor = super::extraspecial_exponent_p(p, t as usize)?;
    Ok(central_product(&base, &factor)?.into_group())
}
