use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use fixedbitset::FixedBitSet;

use super::Elem;

/// A subgroup of some [`FiniteGroup`](super::FiniteGroup), identified by its
/// member bitset. The generator list is kept for fast inclusion and
/// centralizer tests but is not canonical: equality, hashing and ordering
/// look at members only.
#[derive(Clone)]
pub struct Subgroup {
    members: FixedBitSet,
    generators: Vec<Elem>,
    order: usize,
}

impl Subgroup {
    /// Caller guarantees `members` is closed and generated by `generators`.
    pub(crate) fn from_parts(members: FixedBitSet, mut generators: Vec<Elem>) -> Self {
        generators.retain(|&g| g != 0);
        generators.sort_unstable();
        generators.dedup();
        let order = members.count_ones(..);
        debug_assert!(members.contains(0));
        Subgroup { members, generators, order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn generators(&self) -> &[Elem] {
        &self.generators
    }

    #[inline]
    pub fn contains(&self, g: Elem) -> bool {
        self.members.contains(g as usize)
    }

    pub fn members(&self) -> impl Iterator<Item = Elem> + '_ {
        self.members.ones().map(|i| i as Elem)
    }

    pub fn member_bits(&self) -> &FixedBitSet {
        &self.members
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    /// `self <= other`, decided from generators.
    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.order <= other.order && self.generators.iter().all(|&g| other.contains(g))
    }

    /// `self < other`.
    pub fn is_proper_subgroup_of(&self, other: &Subgroup) -> bool {
        self.order < other.order && self.is_subgroup_of(other)
    }

    /// Least non-identity member, if any.
    pub fn canonical_generator(&self) -> Option<Elem> {
        self.members.ones().find(|&i| i != 0).map(|i| i as Elem)
    }
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.members == other.members
    }
}

impl Eq for Subgroup {}

impl Hash for Subgroup {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.members.hash(state);
    }
}

/// Canonical order: by order, then lexicographically by sorted member list.
impl Ord for Subgroup {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order.cmp(&other.order).then_with(|| lex_cmp(&self.members, &other.members))
    }
}

impl PartialOrd for Subgroup {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Sorted member lists of equal-size sets compare at the least element of the
// symmetric difference: whichever set holds it is smaller.
fn lex_cmp(a: &FixedBitSet, b: &FixedBitSet) -> Ordering {
    for (&x, &y) in a.as_slice().iter().zip(b.as_slice()) {
        let diff = x ^ y;
        if diff != 0 {
            let bit = diff & diff.wrapping_neg();
            return if x & bit != 0 { Ordering::Less } else { Ordering::Greater };
        }
    }
    a.len().cmp(&b.len())
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subgroup(order {}, gens {:?})", self.order, self.generators)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sg(n: usize, elems: &[usize]) -> Subgroup {
        let mut bits = FixedBitSet::with_capacity(n);
        for &e in elems {
            bits.insert(e);
        }
        Subgroup::from_parts(bits, elems.iter().map(|&e| e as Elem).collect())
    }

    #[test]
    fn canonical_order_is_by_size_then_members() {
        let a = sg(200, &[0, 1, 150]);
        let b = sg(200, &[0, 2, 3]);
        let c = sg(200, &[0, 1]);
        assert!(a < b);
        assert!(c < a);
        let mut v = vec![b.clone(), a.clone(), c.clone()];
        v.sort();
        assert_eq!(v, vec![c, a, b]);
    }

    #[test]
    fn identity_is_never_a_generator() {
        let s = sg(10, &[0, 4, 4, 2]);
        assert_eq!(s.generators(), &[2, 4]);
        assert_eq!(s.order(), 3);
    }
}
