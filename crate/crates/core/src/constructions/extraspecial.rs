use crate::error::{QkError, Result};
use crate::fpalg::check_odd_prime;
use crate::groups::{Elem, FiniteGroup, GroupOracle};

use super::checked_power;

/// Element `(a, b, c)` of the extraspecial group of exponent `p` and order
/// `p^(2m+1)`, with product
/// `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+a.b')`.
///
/// In this model `x_i = (e_i,0,0)`, `y_i = (0,e_i,0)`, `z = (0,0,1)` and
/// `[x_i, y_j] = z^delta_ij`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtraspecialElement {
    pub a: Vec<u32>,
    pub b: Vec<u32>,
    pub c: u32,
}

impl ExtraspecialElement {
    pub fn identity(m: usize) -> Self {
        ExtraspecialElement { a: vec![0; m], b: vec![0; m], c: 0 }
    }

    /// The `X/Z` coordinates `(a | b)` as one row vector.
    pub fn vector(&self) -> Vec<u32> {
        self.a.iter().chain(&self.b).copied().collect()
    }

    pub fn from_vector(v: &[u32], c: u32) -> Self {
        let m = v.len() / 2;
        ExtraspecialElement { a: v[..m].to_vec(), b: v[m..].to_vec(), c }
    }

    pub fn mul(&self, rhs: &Self, p: u32) -> Self {
        let add = |x: &[u32], y: &[u32]| x.iter().zip(y).map(|(&s, &t)| (s + t) % p).collect::<Vec<_>>();
        ExtraspecialElement {
            a: add(&self.a, &rhs.a),
            b: add(&self.b, &rhs.b),
            c: ((self.c as u64 + rhs.c as u64 + dot(&self.a, &rhs.b, p) as u64) % p as u64) as u32,
        }
    }

    pub fn inverse(&self, p: u32) -> Self {
        let neg = |x: &[u32]| x.iter().map(|&s| (p - s) % p).collect::<Vec<_>>();
        // (a,b,c)^-1 = (-a, -b, -c + a.b)
        ExtraspecialElement { a: neg(&self.a), b: neg(&self.b), c: ((p - self.c) % p + dot(&self.a, &self.b, p)) % p }
    }
}

pub(crate) fn dot(x: &[u32], y: &[u32], p: u32) -> u32 {
    (x.iter().zip(y).map(|(&s, &t)| s as u64 * t as u64).sum::<u64>() % p as u64) as u32
}

/// Index arithmetic for the extraspecial group. An index packs
/// `a + P*b + P^2*c` where `P = p^m` and `a`, `b` are base-`p` digit strings.
#[derive(Clone)]
pub(crate) struct HeisenbergArith {
    p: u32,
    m: usize,
    half: u32,
    add: Vec<u32>,
    neg: Vec<u32>,
    dot: Vec<u16>,
}

impl HeisenbergArith {
    fn new(p: u32, m: usize) -> Self {
        let half = p.pow(m as u32);
        let digits = |mut v: u32| {
            (0..m)
                .map(|_| {
                    let d = v % p;
                    v /= p;
                    d
                })
                .collect::<Vec<_>>()
        };
        let pack = |d: &[u32]| d.iter().rev().fold(0, |acc, &x| acc * p + x);
        let all: Vec<Vec<u32>> = (0..half).map(digits).collect();
        let h = half as usize;
        let mut add = vec![0; h * h];
        let mut dotv = vec![0u16; h * h];
        for (i, di) in all.iter().enumerate() {
            for (j, dj) in all.iter().enumerate() {
                let s: Vec<u32> = di.iter().zip(dj).map(|(&x, &y)| (x + y) % p).collect();
                add[i * h + j] = pack(&s);
                dotv[i * h + j] = dot(di, dj, p) as u16;
            }
        }
        let neg = all.iter().map(|d| pack(&d.iter().map(|&x| (p - x) % p).collect::<Vec<_>>())).collect();
        HeisenbergArith { p, m, half, add, neg, dot: dotv }
    }

    pub(crate) fn size(&self) -> usize {
        (self.half as usize).pow(2) * self.p as usize
    }

    #[inline]
    fn split(&self, i: Elem) -> (u32, u32, u32) {
        (i % self.half, (i / self.half) % self.half, i / (self.half * self.half))
    }

    #[inline]
    fn join(&self, a: u32, b: u32, c: u32) -> Elem {
        a + self.half * (b + self.half * c)
    }

    #[inline]
    pub(crate) fn mul(&self, x: Elem, y: Elem) -> Elem {
        let h = self.half as usize;
        let (a, b, c) = self.split(x);
        let (a2, b2, c2) = self.split(y);
        let cc = (c + c2 + self.dot[a as usize * h + b2 as usize] as u32) % self.p;
        self.join(self.add[a as usize * h + a2 as usize], self.add[b as usize * h + b2 as usize], cc)
    }

    #[inline]
    pub(crate) fn inv(&self, x: Elem) -> Elem {
        let h = self.half as usize;
        let (a, b, c) = self.split(x);
        let cc = ((self.p - c) % self.p + self.dot[a as usize * h + b as usize] as u32) % self.p;
        self.join(self.neg[a as usize], self.neg[b as usize], cc)
    }

    fn digits(&self, mut v: u32) -> Vec<u32> {
        (0..self.m)
            .map(|_| {
                let d = v % self.p;
                v /= self.p;
                d
            })
            .collect()
    }

    pub(crate) fn decode(&self, x: Elem) -> ExtraspecialElement {
        let (a, b, c) = self.split(x);
        ExtraspecialElement { a: self.digits(a), b: self.digits(b), c }
    }

    pub(crate) fn encode(&self, e: &ExtraspecialElement) -> Elem {
        let pack = |d: &[u32]| d.iter().rev().fold(0, |acc, &x| acc * self.p + x);
        self.join(pack(&e.a), pack(&e.b), e.c)
    }
}

struct HeisenbergOracle(HeisenbergArith);

impl GroupOracle for HeisenbergOracle {
    fn size(&self) -> usize {
        self.0.size()
    }
    fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.0.mul(a, b)
    }
    fn inv(&self, a: Elem) -> Elem {
        self.0.inv(a)
    }
    fn decode(&self, a: Elem) -> Vec<u32> {
        let e = self.0.decode(a);
        e.a.into_iter().chain(e.b).chain([e.c]).collect()
    }
}

/// The extraspecial group of exponent `p` and order `p^(2m+1)` together with
/// its standard generators.
#[derive(Clone, Debug)]
pub struct Extraspecial {
    p: u32,
    m: usize,
    arith: HeisenbergArith,
    group: FiniteGroup,
}

impl std::fmt::Debug for HeisenbergArith {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "HeisenbergArith(p={}, m={})", self.p, self.m)
    }
}

impl Extraspecial {
    pub fn new(p: u32, m: usize) -> Result<Self> {
        check_odd_prime(p)?;
        if m == 0 {
            return Err(QkError::invalid("m", "must be positive"));
        }
        let size = checked_power(p, 2 * m as u32 + 1, "m")?;
        if (p as u64).pow(m as u32) > 4096 {
            return Err(QkError::invalid("m", format!("p^m = {p}^{m} exceeds the coordinate table bound")));
        }
        let arith = HeisenbergArith::new(p, m);
        debug_assert_eq!(arith.size(), size);
        let gens =
            (0..m).map(|i| Self::unit(&arith, i, false)).chain((0..m).map(|i| Self::unit(&arith, i, true))).collect();
        let group = FiniteGroup::from_oracle(
            format!("extraspecial({p},{m})"),
            p,
            Box::new(HeisenbergOracle(arith.clone())),
            Some(gens),
        )?;
        Ok(Extraspecial { p, m, arith, group })
    }

    fn unit(arith: &HeisenbergArith, i: usize, y: bool) -> Elem {
        let mut e = ExtraspecialElement::identity(arith.m);
        if y {
            e.b[i] = 1;
        } else {
            e.a[i] = 1;
        }
        arith.encode(&e)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn into_group(self) -> FiniteGroup {
        self.group
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn half_rank(&self) -> usize {
        self.m
    }

    /// `x_(i+1)`, zero-based.
    pub fn x(&self, i: usize) -> Elem {
        Self::unit(&self.arith, i, false)
    }

    /// `y_(i+1)`, zero-based.
    pub fn y(&self, i: usize) -> Elem {
        Self::unit(&self.arith, i, true)
    }

    pub fn z(&self) -> Elem {
        self.arith.encode(&ExtraspecialElement { a: vec![0; self.m], b: vec![0; self.m], c: 1 })
    }

    pub fn element(&self, g: Elem) -> ExtraspecialElement {
        self.arith.decode(g)
    }

    pub fn index(&self, e: &ExtraspecialElement) -> Elem {
        self.arith.encode(e)
    }

    pub(crate) fn arith(&self) -> &HeisenbergArith {
        &self.arith
    }
}

/// Extraspecial group of exponent `p` and order `p^(2m+1)`.
pub fn extraspecial_exponent_p(p: u32, m: usize) -> Result<FiniteGroup> {
    Ok(Extraspecial::new(p, m)?.into_group())
}
