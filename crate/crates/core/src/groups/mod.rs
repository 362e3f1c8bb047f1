//! Finite groups given by multiplication oracles over `0..size`, and the
//! generic subgroup queries everything else is built from.
//!
//! Index `0` is always the identity. Groups of order at most
//! [`TABLE_LIMIT`] cache a full Cayley table; larger groups call the oracle.

mod subgroup;

use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{QkError, Result};
pub use subgroup::Subgroup;

/// Element index inside a [`FiniteGroup`].
pub type Elem = u32;

/// Largest order for which the Cayley table is cached.
pub const TABLE_LIMIT: usize = 4096;

/// Exhaustive associativity check below this order; random triples above.
const EXHAUSTIVE_ASSOC_LIMIT: usize = 512;
const ASSOC_SAMPLES: usize = 1000;

/// Exhaustive cross-check of the generator-based commutator subgroup is
/// affordable below this many pairs.
pub const COMMUTATOR_CROSS_CHECK_LIMIT: usize = 1_000_000;

/// Multiplication oracle over element indices `0..size()`, with `0` the identity.
pub trait GroupOracle: Send + Sync {
    fn size(&self) -> usize;
    fn mul(&self, a: Elem, b: Elem) -> Elem;
    fn inv(&self, a: Elem) -> Elem;
    /// Construction-specific coordinates of an element.
    fn decode(&self, a: Elem) -> Vec<u32>;
}

/// Structural classification of a nontrivial subgroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupClass {
    ElementaryAbelian,
    Extraspecial,
    AbelianOther,
    Other,
}

struct Inner {
    label: String,
    prime: u32,
    size: usize,
    oracle: Box<dyn GroupOracle>,
    table: Option<Vec<u16>>,
    inverses: Vec<Elem>,
    generators: Vec<Elem>,
}

/// A finite group. Cheap to clone; immutable once built.
#[derive(Clone)]
pub struct FiniteGroup(Arc<Inner>);

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.0.label, self.0.size)
    }
}

impl FiniteGroup {
    /// Wraps an oracle, caching inverses (and the table for small orders) and
    /// spot-checking the group axioms. When `generators` is `None` a greedy
    /// generating set is computed; otherwise the given set must generate.
    pub fn from_oracle(
        label: impl Into<String>,
        prime: u32,
        oracle: Box<dyn GroupOracle>,
        generators: Option<Vec<Elem>>,
    ) -> Result<Self> {
        let label = label.into();
        let size = oracle.size();
        if size == 0 || size > u32::MAX as usize {
            return Err(QkError::invalid("size", format!("unsupported group order {size}")));
        }
        let table = (size <= TABLE_LIMIT).then(|| {
            let mut t = Vec::with_capacity(size * size);
            for a in 0..size as Elem {
                for b in 0..size as Elem {
                    t.push(oracle.mul(a, b) as u16);
                }
            }
            t
        });
        let inverses = (0..size as Elem).map(|a| oracle.inv(a)).collect();
        let mut inner = Inner { label, prime, size, oracle, table, inverses, generators: Vec::new() };
        let provisional = FiniteGroup(Arc::new(inner));
        provisional.check_axioms()?;
        let generators = match generators {
            Some(g) => {
                let closure = provisional.closure(&g);
                if closure.order() != size {
                    return Err(QkError::InvariantViolated(format!(
                        "{}: declared generators span {} of {size} elements",
                        provisional.label(),
                        closure.order()
                    )));
                }
                closure.generators().to_vec()
            }
            None => provisional.greedy_generators(),
        };
        inner = Arc::try_unwrap(provisional.0).unwrap_or_else(|_| unreachable!("sole owner"));
        inner.generators = generators;
        Ok(FiniteGroup(Arc::new(inner)))
    }

    fn check_axioms(&self) -> Result<()> {
        let n = self.size();
        let bad = |what: String| Err(QkError::InvariantViolated(format!("{}: {what}", self.label())));
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ n as u64);
        let probe: Vec<Elem> = if n <= ASSOC_SAMPLES {
            (0..n as Elem).collect()
        } else {
            (0..ASSOC_SAMPLES).map(|_| rng.gen_range(0..n as Elem)).collect()
        };
        for &a in &probe {
            if self.mul(0, a) != a || self.mul(a, 0) != a {
                return bad(format!("index 0 is not an identity for {a}"));
            }
            if self.mul(a, self.inv(a)) != 0 || self.mul(self.inv(a), a) != 0 {
                return bad(format!("inverse oracle wrong at {a}"));
            }
        }
        if n <= EXHAUSTIVE_ASSOC_LIMIT {
            for a in 0..n as Elem {
                for b in 0..n as Elem {
                    let ab = self.mul(a, b);
                    for c in 0..n as Elem {
                        if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                            return bad(format!("not associative at ({a},{b},{c})"));
                        }
                    }
                }
            }
        } else {
            for _ in 0..ASSOC_SAMPLES {
                let (a, b, c) = (rng.gen_range(0..n as Elem), rng.gen_range(0..n as Elem), rng.gen_range(0..n as Elem));
                if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                    return bad(format!("not associative at ({a},{b},{c})"));
                }
            }
        }
        Ok(())
    }

    fn greedy_generators(&self) -> Vec<Elem> {
        let mut gens = Vec::new();
        let mut current = self.trivial_subgroup();
        for g in 0..self.size() as Elem {
            if current.order() == self.size() {
                break;
            }
            if !current.contains(g) {
                gens.push(g);
                current = self.closure(&gens);
            }
        }
        gens
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    /// The prime this group was declared over.
    pub fn prime(&self) -> u32 {
        self.0.prime
    }

    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn identity(&self) -> Elem {
        0
    }

    pub fn generators(&self) -> &[Elem] {
        &self.0.generators
    }

    /// `k` with `size = p^k`, if the order is a power of the declared prime.
    pub fn prime_power_exponent(&self) -> Option<u32> {
        let p = self.prime() as usize;
        let (mut n, mut k) = (self.size(), 0);
        while n > 1 && p > 1 && n % p == 0 {
            n /= p;
            k += 1;
        }
        (n == 1).then_some(k)
    }

    pub fn is_p_group(&self) -> bool {
        self.prime_power_exponent().is_some()
    }

    fn require_p_group(&self) -> Result<()> {
        if self.is_p_group() {
            Ok(())
        } else {
            Err(QkError::NotPGroup(self.size()))
        }
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match &self.0.table {
            Some(t) => t[a as usize * self.0.size + b as usize] as Elem,
            None => self.0.oracle.mul(a, b),
        }
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        self.0.inverses[a as usize]
    }

    pub fn decode(&self, a: Elem) -> Vec<u32> {
        self.0.oracle.decode(a)
    }

    pub fn pow(&self, g: Elem, mut e: u64) -> Elem {
        let (mut base, mut acc) = (g, 0);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `[a, b] = a^-1 b^-1 a b`.
    #[inline]
    pub fn commutator(&self, a: Elem, b: Elem) -> Elem {
        let ab = self.mul(a, b);
        let ba = self.mul(b, a);
        // [a,b] = (ba)^-1 ab
        self.mul(self.inv(ba), ab)
    }

    /// `x^y = y^-1 x y`.
    #[inline]
    pub fn conj(&self, x: Elem, y: Elem) -> Elem {
        self.mul(self.inv(y), self.mul(x, y))
    }

    #[inline]
    pub fn commutes(&self, a: Elem, b: Elem) -> bool {
        self.mul(a, b) == self.mul(b, a)
    }

    /// Least `k >= 1` with `g^k = 1`.
    pub fn element_order(&self, g: Elem) -> u64 {
        let mut k = 1;
        let mut x = g;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// True iff `g^p = 1` for the group's prime.
    pub fn has_order_dividing_p(&self, g: Elem) -> bool {
        self.pow(g, self.prime() as u64) == 0
    }

    pub fn is_cyclic(&self) -> bool {
        (0..self.size() as Elem).any(|g| self.element_order(g) == self.size() as u64)
    }

    pub fn trivial_subgroup(&self) -> Subgroup {
        let mut bits = FixedBitSet::with_capacity(self.size());
        bits.insert(0);
        Subgroup::from_parts(bits, Vec::new())
    }

    pub fn whole(&self) -> Subgroup {
        let mut bits = FixedBitSet::with_capacity(self.size());
        bits.insert_range(..);
        Subgroup::from_parts(bits, self.generators().to_vec())
    }

    /// Smallest subgroup containing `gens`, by breadth-first saturation.
    pub fn closure(&self, gens: &[Elem]) -> Subgroup {
        let mut gens: Vec<Elem> = gens.iter().copied().filter(|&g| g != 0).collect();
        gens.sort_unstable();
        gens.dedup();
        let mut bits = FixedBitSet::with_capacity(self.size());
        bits.insert(0);
        let mut queue = vec![0 as Elem];
        let mut i = 0;
        while i < queue.len() {
            let x = queue[i];
            for &s in &gens {
                let y = self.mul(x, s);
                if !bits.put(y as usize) {
                    queue.push(y);
                }
            }
            i += 1;
        }
        let order = queue.len();
        debug_assert_eq!(self.size() % order, 0, "Lagrange");
        Subgroup::from_parts(bits, gens)
    }

    /// Subgroup generated by `base` and `extra`.
    pub fn join(&self, base: &Subgroup, extra: &[Elem]) -> Subgroup {
        let mut gens = base.generators().to_vec();
        gens.extend(extra.iter().copied().filter(|&g| !base.contains(g)));
        self.closure(&gens)
    }

    /// Subgroup with the given member set; generators are recomputed.
    pub fn subgroup_from_members(&self, bits: FixedBitSet) -> Result<Subgroup> {
        let mut gens = Vec::new();
        let mut current = self.trivial_subgroup();
        for g in bits.ones() {
            if !current.contains(g as Elem) {
                gens.push(g as Elem);
                current = self.closure(&gens);
            }
        }
        if current.member_bits() != &bits {
            return Err(QkError::InvariantViolated("member set is not a subgroup".into()));
        }
        Ok(current)
    }

    pub fn intersection(&self, a: &Subgroup, b: &Subgroup) -> Subgroup {
        let mut bits = a.member_bits().clone();
        bits.intersect_with(b.member_bits());
        self.subgroup_from_members(bits).expect("intersection of subgroups is a subgroup")
    }

    /// Elements commuting with every generator of `s`.
    pub fn centralizer(&self, s: &Subgroup) -> Subgroup {
        let gens = s.generators();
        let mut bits = FixedBitSet::with_capacity(self.size());
        for g in 0..self.size() as Elem {
            if gens.iter().all(|&h| self.commutes(g, h)) {
                bits.insert(g as usize);
            }
        }
        self.subgroup_from_known_bits(bits)
    }

    /// Elements of `within` commuting with every generator of `s`.
    pub fn centralizer_in(&self, within: &Subgroup, s: &Subgroup) -> Subgroup {
        let gens = s.generators();
        let mut bits = FixedBitSet::with_capacity(self.size());
        for g in within.members() {
            if gens.iter().all(|&h| self.commutes(g, h)) {
                bits.insert(g as usize);
            }
        }
        self.subgroup_from_known_bits(bits)
    }

    /// Same as [`centralizer`](Self::centralizer) but testing every member
    /// of `s`; used to cross-check the generator shortcut.
    pub fn centralizer_exhaustive(&self, s: &Subgroup) -> Subgroup {
        let mut bits = FixedBitSet::with_capacity(self.size());
        for g in 0..self.size() as Elem {
            if s.members().all(|h| self.commutes(g, h)) {
                bits.insert(g as usize);
            }
        }
        self.subgroup_from_known_bits(bits)
    }

    // For bitsets already known to be subgroups: builds generators cheaply by
    // greedy selection with incremental closure.
    fn subgroup_from_known_bits(&self, bits: FixedBitSet) -> Subgroup {
        if bits.count_ones(..) == self.size() {
            return self.whole();
        }
        self.subgroup_from_members(bits).expect("centralizers are subgroups")
    }

    pub fn center(&self) -> Subgroup {
        self.centralizer(&self.whole())
    }

    /// `Z(S)` for a subgroup `S`.
    pub fn center_of(&self, s: &Subgroup) -> Subgroup {
        self.centralizer_in(s, s)
    }

    /// Subgroup of `s` generated by its elements of order `p`.
    pub fn omega1(&self, s: &Subgroup) -> Result<Subgroup> {
        self.require_p_group()?;
        let gens: Vec<Elem> = s.members().filter(|&g| g != 0 && self.has_order_dividing_p(g)).collect();
        Ok(self.closure_minimal(&gens))
    }

    // Closure of a possibly long element list, skipping redundant generators.
    fn closure_minimal(&self, candidates: &[Elem]) -> Subgroup {
        let mut current = self.trivial_subgroup();
        let mut gens = Vec::new();
        for &g in candidates {
            if !current.contains(g) {
                gens.push(g);
                current = self.closure(&gens);
            }
        }
        current
    }

    /// `[A, B]`: the normal closure in `<A, B>` of commutators of generators.
    pub fn commutator_subgroup(&self, a: &Subgroup, b: &Subgroup) -> Subgroup {
        let seeds: Vec<Elem> = a
            .generators()
            .iter()
            .flat_map(|&x| b.generators().iter().map(move |&y| (x, y)))
            .map(|(x, y)| self.commutator(x, y))
            .collect();
        let mut k = self.closure_minimal(&seeds);
        let conjugators: Vec<Elem> = a.generators().iter().chain(b.generators()).copied().collect();
        loop {
            let escaped: Vec<Elem> = k
                .generators()
                .iter()
                .flat_map(|&g| conjugators.iter().map(move |&h| (g, h)))
                .map(|(g, h)| self.conj(g, h))
                .filter(|&c| !k.contains(c))
                .collect();
            if escaped.is_empty() {
                return k;
            }
            k = self.join(&k, &escaped);
        }
    }

    /// `[A, B]` from all member pairs.
    pub fn commutator_subgroup_exhaustive(&self, a: &Subgroup, b: &Subgroup) -> Subgroup {
        let mut comms = FixedBitSet::with_capacity(self.size());
        for x in a.members() {
            for y in b.members() {
                comms.insert(self.commutator(x, y) as usize);
            }
        }
        let list: Vec<Elem> = comms.ones().map(|c| c as Elem).collect();
        self.closure_minimal(&list)
    }

    /// `gamma_1 = S`, `gamma_(i+1) = [S, gamma_i]`, ending at the trivial group.
    pub fn lower_central_series(&self, s: &Subgroup) -> Result<Vec<Subgroup>> {
        let mut series = vec![s.clone()];
        loop {
            let last = series.last().expect("nonempty");
            if last.is_trivial() {
                return Ok(series);
            }
            let next = self.commutator_subgroup(s, last);
            if next == *last {
                return Err(QkError::Precondition(format!(
                    "lower central series of a subgroup of {} stabilizes at order {}; not nilpotent",
                    self.label(),
                    next.order()
                )));
            }
            series.push(next);
        }
    }

    /// Smallest `c` with `gamma_(c+1)(S) = 1`.
    pub fn nilpotence_class(&self, s: &Subgroup) -> Result<usize> {
        Ok(self.lower_central_series(s)?.len() - 1)
    }

    pub fn exponent_is_p(&self, s: &Subgroup) -> bool {
        s.members().all(|g| self.has_order_dividing_p(g))
    }

    pub fn is_abelian(&self, s: &Subgroup) -> bool {
        let g = s.generators();
        g.iter().enumerate().all(|(i, &a)| g[i + 1..].iter().all(|&b| self.commutes(a, b)))
    }

    /// Normal in the whole group.
    pub fn is_normal(&self, s: &Subgroup) -> bool {
        s.generators().iter().all(|&x| self.generators().iter().all(|&g| s.contains(self.conj(x, g))))
    }

    pub fn classify(&self, s: &Subgroup) -> Result<GroupClass> {
        self.require_p_group()?;
        if s.is_trivial() {
            return Err(QkError::Precondition("the trivial group is not classified".into()));
        }
        if self.is_abelian(s) {
            return Ok(if self.exponent_is_p(s) { GroupClass::ElementaryAbelian } else { GroupClass::AbelianOther });
        }
        let z = self.center_of(s);
        if z.order() != self.prime() as usize {
            return Ok(GroupClass::Other);
        }
        let p = self.prime() as u64;
        let gens = s.generators();
        let quotient_abelian = gens.iter().all(|&a| gens.iter().all(|&b| z.contains(self.commutator(a, b))));
        let quotient_exponent_p = gens.iter().all(|&a| z.contains(self.pow(a, p)));
        Ok(if quotient_abelian && quotient_exponent_p { GroupClass::Extraspecial } else { GroupClass::Other })
    }

    /// Hall's criterion as a runtime check: class below `p` and generated by
    /// elements of order `p` forces exponent `p`.
    pub fn hall_check(&self, s: &Subgroup) -> Result<()> {
        let class = self.nilpotence_class(s)?;
        if class < self.prime() as usize && self.omega1(s)? == *s && !self.exponent_is_p(s) {
            return Err(QkError::InvariantViolated(format!(
                "subgroup of order {} has class {class} < p and is generated by elements of order p, \
                 yet has exponent above p",
                s.order()
            )));
        }
        Ok(())
    }

    /// Checks closure of the member set under multiplication and inverses.
    pub fn is_closed(&self, s: &Subgroup) -> bool {
        let members: Vec<Elem> = s.members().collect();
        s.contains(0)
            && members.iter().all(|&a| s.contains(self.inv(a)) && members.iter().all(|&b| s.contains(self.mul(a, b))))
    }
}
