use crate::error::{QkError, Result};
use crate::groups::{Elem, FiniteGroup, GroupOracle};

/// Central product `G1 o G2` amalgamating `Omega_1(Z(G1))` and
/// `Omega_1(Z(G2))`, both of order `p`, by matching their least
/// non-identity elements `s0 <-> t0`.
///
/// An element is stored as `(g1, r)` where `r` is the least index in its
/// coset of `T = <t0>`; the index is `coset(r) * |G1| + g1`, so `G1` embeds
/// as the first `|G1|` indices.
#[derive(Clone, Debug)]
pub struct CentralProduct {
    group: FiniteGroup,
    left: FiniteGroup,
    right: FiniteGroup,
    left_size: u32,
    s0: Elem,
    coset: std::sync::Arc<Vec<(u32, u32)>>,
}

struct CentralOracle {
    left: FiniteGroup,
    right: FiniteGroup,
    left_size: u32,
    // s0^e for e in 0..p
    s_powers: Vec<Elem>,
    // for each element of G2: (coset id, e) with g2 = rep * t0^e
    coset: std::sync::Arc<Vec<(u32, u32)>>,
    reps: Vec<Elem>,
}

impl CentralOracle {
    #[inline]
    fn normalize(&self, g1: Elem, g2: Elem) -> Elem {
        let (cid, e) = self.coset[g2 as usize];
        let g1 = if e == 0 { g1 } else { self.left.mul(g1, self.s_powers[e as usize]) };
        cid * self.left_size + g1
    }

    #[inline]
    fn split(&self, a: Elem) -> (Elem, Elem) {
        (a % self.left_size, self.reps[(a / self.left_size) as usize])
    }
}

impl GroupOracle for CentralOracle {
    fn size(&self) -> usize {
        self.left_size as usize * self.reps.len()
    }

    fn mul(&self, a: Elem, b: Elem) -> Elem {
        let (a1, a2) = self.split(a);
        let (b1, b2) = self.split(b);
        self.normalize(self.left.mul(a1, b1), self.right.mul(a2, b2))
    }

    fn inv(&self, a: Elem) -> Elem {
        let (a1, a2) = self.split(a);
        self.normalize(self.left.inv(a1), self.right.inv(a2))
    }

    fn decode(&self, a: Elem) -> Vec<u32> {
        let (a1, a2) = self.split(a);
        let mut out = self.left.decode(a1);
        out.extend(self.right.decode(a2));
        out
    }
}

fn central_omega(g: &FiniteGroup, side: &str) -> Result<Elem> {
    if !g.is_p_group() {
        return Err(QkError::NotPGroup(g.size()));
    }
    let om = g.omega1(&g.center())?;
    if om.order() != g.prime() as usize {
        return Err(QkError::Precondition(format!(
            "{side} factor {} has Omega_1(Z) of order {}, expected {}",
            g.label(),
            om.order(),
            g.prime()
        )));
    }
    Ok(om.canonical_generator().expect("nontrivial"))
}

/// Builds `left o right`. Both factors must be `p`-groups for the same `p`
/// whose centres have `Omega_1` of order `p`.
pub fn central_product(left: &FiniteGroup, right: &FiniteGroup) -> Result<CentralProduct> {
    if left.prime() != right.prime() {
        return Err(QkError::invalid("prime", format!("factors use primes {} and {}", left.prime(), right.prime())));
    }
    let p = left.prime();
    let s0 = central_omega(left, "left")?;
    let t0 = central_omega(right, "right")?;
    let total = left.size() as u64 * right.size() as u64 / p as u64;
    if total > u32::MAX as u64 {
        return Err(QkError::invalid(
            "size",
            format!("central product of order {total} is beyond the supported index range"),
        ));
    }
    let s_powers: Vec<Elem> = (0..p as u64).map(|e| left.pow(s0, e)).collect();
    let t_powers: Vec<Elem> = (0..p as u64).map(|e| right.pow(t0, e)).collect();
    let mut coset = vec![(u32::MAX, 0); right.size()];
    let mut reps = Vec::new();
    // scanning in index order makes each representative the coset minimum
    for r in 0..right.size() as Elem {
        if coset[r as usize].0 != u32::MAX {
            continue;
        }
        let cid = reps.len() as u32;
        reps.push(r);
        for (e, &t) in t_powers.iter().enumerate() {
            coset[right.mul(r, t) as usize] = (cid, e as u32);
        }
    }
    let coset = std::sync::Arc::new(coset);
    let left_size = left.size() as u32;
    let oracle =
        CentralOracle { left: left.clone(), right: right.clone(), left_size, s_powers, coset: coset.clone(), reps };
    let gens: Vec<Elem> =
        left.generators().iter().copied().chain(right.generators().iter().map(|&g| oracle.normalize(0, g))).collect();
    let group = FiniteGroup::from_oracle(
        format!("central_product({}, {})", left.label(), right.label()),
        p,
        Box::new(oracle),
        Some(gens),
    )?;
    Ok(CentralProduct { group, left: left.clone(), right: right.clone(), left_size, s0, coset })
}

impl CentralProduct {
    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn into_group(self) -> FiniteGroup {
        self.group
    }

    pub fn left(&self) -> &FiniteGroup {
        &self.left
    }

    pub fn right(&self) -> &FiniteGroup {
        &self.right
    }

    pub fn embed_left(&self, g: Elem) -> Elem {
        g
    }

    pub fn embed_right(&self, g: Elem) -> Elem {
        let (cid, e) = self.coset[g as usize];
        cid * self.left_size + self.left.pow(self.s0, e as u64)
    }

    pub fn left_image_generators(&self) -> Vec<Elem> {
        self.left.generators().iter().map(|&g| self.embed_left(g)).collect()
    }

    pub fn right_image_generators(&self) -> Vec<Elem> {
        self.right.generators().iter().map(|&g| self.embed_right(g)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{cyclic, elementary_abelian, extraspecial_exponent_p};
    use crate::groups::GroupClass;

    #[test]
    fn product_of_two_extraspecials_is_extraspecial() {
        let h = extraspecial_exponent_p(3, 1).unwrap();
        let cp = central_product(&h, &h).unwrap();
        let g = cp.group();
        assert_eq!(g.size(), 243);
        assert_eq!(g.classify(&g.whole()).unwrap(), GroupClass::Extraspecial);
        assert!(g.exponent_is_p(&g.whole()));
        let left = g.closure(&cp.left_image_generators());
        let right = g.closure(&cp.right_image_generators());
        assert_eq!(left.order(), 27);
        assert_eq!(right.order(), 27);
        assert_eq!(g.intersection(&left, &right), g.center());
        assert_eq!(g.centralizer(&left), right);
    }

    #[test]
    fn embeddings_are_homomorphisms() {
        let a = extraspecial_exponent_p(3, 1).unwrap();
        let b = cyclic(3, 2).unwrap();
        let cp = central_product(&a, &b).unwrap();
        let g = cp.group();
        for x in 0..9 {
            for y in 0..9 {
                assert_eq!(cp.embed_right(b.mul(x, y)), g.mul(cp.embed_right(x), cp.embed_right(y)));
            }
        }
        for x in 0..27 {
            for y in 0..27 {
                assert_eq!(cp.embed_left(a.mul(x, y)), g.mul(cp.embed_left(x), cp.embed_left(y)));
            }
        }
    }

    #[test]
    fn factors_must_have_cyclic_omega_centre() {
        let e = elementary_abelian(3, 2).unwrap();
        let h = extraspecial_exponent_p(3, 1).unwrap();
        assert!(central_product(&e, &h).is_err());
        let h5 = extraspecial_exponent_p(5, 1).unwrap();
        assert!(central_product(&h5, &h).is_err());
    }
}
