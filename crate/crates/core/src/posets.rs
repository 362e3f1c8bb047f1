//! Subgroup posets: elementary abelian subgroups of rank at least two, the
//! part above `Z = Omega_1(Z(P))`, the extraspecial family `E(P)` and the
//! small-scale `M_Z` families.

use std::collections::{BTreeMap, HashSet};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::error::{QkError, Result};
use crate::groups::{Elem, FiniteGroup, Subgroup};

/// Order bound for the brute-force `M_Z` enumeration.
pub const MZ_BRUTEFORCE_LIMIT: usize = 243;

const NONE: u32 = u32::MAX;

/// A family of subgroups ordered by inclusion, stored in canonical order
/// (by order, then by sorted member list).
#[derive(Clone, Debug, Default)]
pub struct SubgroupPoset {
    members: Vec<Subgroup>,
}

impl SubgroupPoset {
    pub fn new(mut members: Vec<Subgroup>) -> Self {
        members.par_sort_unstable();
        members.dedup();
        SubgroupPoset { members }
    }

    pub fn members(&self) -> &[Subgroup] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, s: &Subgroup) -> bool {
        self.members.binary_search(s).is_ok()
    }

    /// For each member `i`, the indices `j` with `members[i] < members[j]`.
    pub fn strict_up_sets(&self) -> Vec<Vec<usize>> {
        let m = &self.members;
        (0..m.len())
            .into_par_iter()
            .map(|i| {
                let start = m.partition_point(|s| s.order() <= m[i].order());
                (start..m.len()).filter(|&j| m[i].is_subgroup_of(&m[j])).collect()
            })
            .collect()
    }

    /// Members satisfying `keep`, as a new poset.
    pub fn filter(&self, keep: impl Fn(&Subgroup) -> bool) -> SubgroupPoset {
        SubgroupPoset { members: self.members.iter().filter(|s| keep(s)).cloned().collect() }
    }

    /// Number of members of each order.
    pub fn order_counts(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for s in &self.members {
            *out.entry(s.order()).or_insert(0) += 1;
        }
        out
    }
}

/// The subgroups of order `p`, indexed: `reps[i]` is the least non-identity
/// element of the `i`-th one and `of_elem[g]` the index of `<g>` for `g` of
/// order `p`.
#[derive(Clone, Debug)]
pub struct Rank1Index {
    reps: Vec<Elem>,
    of_elem: Vec<u32>,
}

impl Rank1Index {
    pub fn new(g: &FiniteGroup) -> Result<Self> {
        if !g.is_p_group() {
            return Err(QkError::NotPGroup(g.size()));
        }
        let mut of_elem = vec![NONE; g.size()];
        let mut reps = Vec::new();
        for x in 1..g.size() as Elem {
            if of_elem[x as usize] != NONE || !g.has_order_dividing_p(x) {
                continue;
            }
            let idx = reps.len() as u32;
            reps.push(x);
            let mut y = x;
            while y != 0 {
                of_elem[y as usize] = idx;
                y = g.mul(y, x);
            }
        }
        Ok(Rank1Index { reps, of_elem })
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn reps(&self) -> &[Elem] {
        &self.reps
    }

    /// Index of `<g>` if `g` has order `p`.
    pub fn index_of(&self, g: Elem) -> Option<usize> {
        let i = self.of_elem[g as usize];
        (i != NONE).then_some(i as usize)
    }

    pub fn subgroup(&self, g: &FiniteGroup, i: usize) -> Subgroup {
        g.closure(&[self.reps[i]])
    }

    // Rank-1 indices of the order-p members of `s`.
    fn indices_in<'a>(&'a self, s: &'a Subgroup) -> impl Iterator<Item = usize> + 'a {
        s.members().filter_map(|x| self.index_of(x))
    }
}

/// All subgroups of order `p`, in canonical order.
pub fn rank1_subgroups(g: &FiniteGroup) -> Result<Vec<Subgroup>> {
    let idx = Rank1Index::new(g)?;
    let mut out: Vec<Subgroup> = (0..idx.len()).map(|i| idx.subgroup(g, i)).collect();
    out.sort_unstable();
    Ok(out)
}

/// `Omega_1(Z(G))`.
pub fn omega1_center(g: &FiniteGroup) -> Result<Subgroup> {
    g.omega1(&g.center())
}

/// `Omega_1(Z(G))`, required to have order `p`.
pub fn cyclic_omega_center(g: &FiniteGroup) -> Result<Subgroup> {
    let z = omega1_center(g)?;
    if z.order() != g.prime() as usize {
        return Err(QkError::Precondition(format!(
            "Omega_1(Z(G)) has order {}, not {}; the centre is not cyclic",
            z.order(),
            g.prime()
        )));
    }
    Ok(z)
}

// Per-seed stamps over rank-1 indices, reused across seeds of one worker.
struct Stamps {
    marks: Vec<u32>,
    current: u32,
}

impl Stamps {
    fn new(n: usize) -> Self {
        Stamps { marks: vec![0; n], current: 0 }
    }
    fn next(&mut self) {
        self.current += 1;
    }
    fn mark(&mut self, i: usize) {
        self.marks[i] = self.current;
    }
    fn is_marked(&self, i: usize) -> bool {
        self.marks[i] == self.current
    }
}

// One rank up: every <E, b> with b of order p centralizing E and outside it.
fn extend_elementary(g: &FiniteGroup, idx: &Rank1Index, layer: &[Subgroup]) -> Vec<Subgroup> {
    let mut next: Vec<Subgroup> = layer
        .par_iter()
        .map_init(
            || Stamps::new(idx.len()),
            |stamps, e| {
                stamps.next();
                for i in idx.indices_in(e) {
                    stamps.mark(i);
                }
                let mut found = Vec::new();
                for (j, &b) in idx.reps().iter().enumerate() {
                    if stamps.is_marked(j) || !e.generators().iter().all(|&h| g.commutes(b, h)) {
                        continue;
                    }
                    let bigger = g.join(e, &[b]);
                    for i in idx.indices_in(&bigger) {
                        stamps.mark(i);
                    }
                    found.push(bigger);
                }
                found
            },
        )
        .flatten()
        .collect();
    next.par_sort_unstable();
    next.dedup();
    next
}

fn grow_elementary(g: &FiniteGroup, idx: &Rank1Index, rank2: Vec<Subgroup>) -> SubgroupPoset {
    let mut all = Vec::new();
    let mut layer = rank2;
    while !layer.is_empty() {
        let next = extend_elementary(g, idx, &layer);
        all.append(&mut layer);
        layer = next;
    }
    SubgroupPoset::new(all)
}

/// `A>=2(G)`: elementary abelian subgroups of order at least `p^2`.
pub fn elem_abelian_poset(g: &FiniteGroup) -> Result<SubgroupPoset> {
    let idx = Rank1Index::new(g)?;
    let reps = idx.reps();
    let rank2: Vec<Subgroup> = (0..reps.len())
        .into_par_iter()
        .map_init(
            || Stamps::new(reps.len()),
            |stamps, i| {
                stamps.next();
                let mut found = Vec::new();
                for j in i + 1..reps.len() {
                    if stamps.is_marked(j) || !g.commutes(reps[i], reps[j]) {
                        continue;
                    }
                    let e = g.closure(&[reps[i], reps[j]]);
                    let mut owned = true;
                    for k in idx.indices_in(&e) {
                        stamps.mark(k);
                        owned &= k >= i;
                    }
                    // each E is reported by its least rank-1 subgroup
                    if owned {
                        found.push(e);
                    }
                }
                found
            },
        )
        .flatten()
        .collect();
    Ok(grow_elementary(g, &idx, rank2))
}

/// `A>Z(G)`: members of `A>=2(G)` strictly containing `Z = Omega_1(Z(G))`,
/// grown directly from the rank-2 subgroups `<Z, b>`.
pub fn above_z_poset(g: &FiniteGroup) -> Result<SubgroupPoset> {
    let z = cyclic_omega_center(g)?;
    let idx = Rank1Index::new(g)?;
    let (rank2, _) = rank2_above(g, &idx, &z);
    Ok(grow_elementary(g, &idx, rank2))
}

// The subgroups <Z, b>, with the map rank-1 index -> position (NONE for Z).
fn rank2_above(g: &FiniteGroup, idx: &Rank1Index, z: &Subgroup) -> (Vec<Subgroup>, Vec<u32>) {
    let zgen = z.canonical_generator().expect("Z is nontrivial");
    let mut owner = vec![NONE; idx.len()];
    let mut out = Vec::new();
    for (j, &b) in idx.reps().iter().enumerate() {
        if owner[j] != NONE || z.contains(b) {
            continue;
        }
        let e = g.closure(&[zgen, b]);
        for k in idx.indices_in(&e) {
            if !z.contains(idx.reps()[k]) {
                owner[k] = out.len() as u32;
            }
        }
        out.push(e);
    }
    (out, owner)
}

/// The extraspecial family `E(P)` with its counts by order.
#[derive(Clone, Debug)]
pub struct EspecReport {
    /// `Omega_1(Z(P))`.
    pub z: Subgroup,
    /// Members in canonical order.
    pub members: Vec<Subgroup>,
    /// `a_n`: number of members of order `p^(2n+1)`, for every `n` with a
    /// member.
    pub counts: BTreeMap<usize, u64>,
}

impl EspecReport {
    pub fn a(&self, n: usize) -> u64 {
        self.counts.get(&n).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn from_members(z: Subgroup, p: u32, members: Vec<Subgroup>) -> Self {
        let mut counts = BTreeMap::new();
        for x in &members {
            *counts.entry(half_rank_of(x.order(), p)).or_insert(0) += 1;
        }
        EspecReport { z, members, counts }
    }
}

// n with order = p^(2n+1).
pub(crate) fn half_rank_of(order: usize, p: u32) -> usize {
    let mut e = 0;
    let mut o = order;
    while o > 1 {
        o /= p as usize;
        e += 1;
    }
    (e - 1) / 2
}

/// Rank-1 indices (other than those of `Z`) whose representatives commute
/// with every generator of `x`.
fn centralizing_reps(g: &FiniteGroup, idx: &Rank1Index, z: &Subgroup, x: &Subgroup) -> Vec<usize> {
    idx.reps()
        .iter()
        .enumerate()
        .filter(|&(_, &b)| !z.contains(b) && x.generators().iter().all(|&h| g.commutes(b, h)))
        .map(|(j, _)| j)
        .collect()
}

/// `E(P)`: extraspecial subgroups `X` of exponent `p` with
/// `Omega_1(C_P(X)) = Z(X)`. Empty when `Omega_1(Z(P))` is not of order `p`.
pub fn espec(g: &FiniteGroup) -> Result<EspecReport> {
    let z = omega1_center(g)?;
    let p = g.prime();
    if z.order() != p as usize {
        return Ok(EspecReport::from_members(z, p, Vec::new()));
    }
    let idx = Rank1Index::new(g)?;
    let (rank2, owner) = rank2_above(g, &idx, &z);
    let target3 = (p as usize).pow(3);

    // level 1: <x, y> of order p^3 with [x, y] in Z \ 1, x running over one
    // representative of each <Z, b>
    let mut level: Vec<Subgroup> = rank2
        .par_iter()
        .enumerate()
        .map_init(
            || Stamps::new(idx.len()),
            |stamps, (ei, e)| {
                stamps.next();
                let x = e.generators().iter().copied().find(|&h| !z.contains(h)).expect("E > Z");
                let mut found = Vec::new();
                for (j, &y) in idx.reps().iter().enumerate() {
                    if stamps.is_marked(j) {
                        continue;
                    }
                    let c = g.commutator(x, y);
                    if c == 0 || !z.contains(c) {
                        continue;
                    }
                    let s = g.closure(&[x, y]);
                    if s.order() != target3 {
                        continue;
                    }
                    let mut least = u32::MAX;
                    for k in idx.indices_in(&s) {
                        stamps.mark(k);
                        least = least.min(owner[k]);
                    }
                    // each X is reported from its least <Z, b>
                    if least as usize == ei {
                        found.push(s);
                    }
                }
                found
            },
        )
        .flatten()
        .collect();

    let mut members = Vec::new();
    while !level.is_empty() {
        let order = level[0].order();
        let outcomes: Vec<(Subgroup, bool, Vec<Subgroup>)> = level
            .into_par_iter()
            .map(|x| {
                let cands = centralizing_reps(g, &idx, &z, &x);
                let in_family = cands.is_empty();
                let mut grown: Vec<Subgroup> = Vec::new();
                for (a, &i) in cands.iter().enumerate() {
                    for &j in &cands[a + 1..] {
                        let (u, v) = (idx.reps()[i], idx.reps()[j]);
                        if grown.iter().any(|y| y.contains(u) && y.contains(v)) {
                            continue;
                        }
                        let c = g.commutator(u, v);
                        if c == 0 || !z.contains(c) {
                            continue;
                        }
                        let bigger = g.join(&x, &[u, v]);
                        if bigger.order() == order * (p as usize).pow(2) {
                            grown.push(bigger);
                        }
                    }
                }
                (x, in_family, grown)
            })
            .collect();
        let mut next = HashSet::new();
        for (x, in_family, grown) in outcomes {
            if in_family {
                members.push(x);
            }
            next.extend(grown);
        }
        level = next.into_iter().collect();
        level.par_sort_unstable();
    }
    members.sort_unstable();
    Ok(EspecReport::from_members(z, p, members))
}

/// `M_Z(G)` and its inclusion-maximal members `M*_Z(G)`.
#[derive(Clone, Debug)]
pub struct MzFamily {
    pub z: Subgroup,
    /// All `X` with `Z < X = Omega_1(X)` and `[X, X] <= Z`, canonical order.
    pub members: Vec<Subgroup>,
    /// The inclusion-maximal members.
    pub maximal: Vec<Subgroup>,
}

/// Every subgroup generated by elements of order `p`, by iterated joins of
/// subgroups of order `p` with bitset dedup.
pub fn omega_generated_subgroups(g: &FiniteGroup) -> Result<Vec<Subgroup>> {
    if g.size() > MZ_BRUTEFORCE_LIMIT {
        return Err(QkError::Infeasible(format!(
            "brute-force subgroup enumeration is limited to order {MZ_BRUTEFORCE_LIMIT}, got {}",
            g.size()
        )));
    }
    let idx = Rank1Index::new(g)?;
    let mut seen: HashSet<FixedBitSet> = HashSet::new();
    let mut frontier = vec![g.trivial_subgroup()];
    seen.insert(frontier[0].member_bits().clone());
    let mut all = frontier.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for s in &frontier {
            for &b in idx.reps() {
                if s.contains(b) {
                    continue;
                }
                let t = g.join(s, &[b]);
                if seen.insert(t.member_bits().clone()) {
                    next.push(t);
                }
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all.sort_unstable();
    Ok(all)
}

/// Brute-force `M_Z(G)` for an explicit `Z` of order `p`, or for
/// `Z = Omega_1(Z(G))` when `z` is `None`.
pub fn mz_bruteforce(g: &FiniteGroup, z: Option<&Subgroup>) -> Result<MzFamily> {
    let z = match z {
        Some(z) => z.clone(),
        None => cyclic_omega_center(g)?,
    };
    if z.order() != g.prime() as usize {
        return Err(QkError::Precondition(format!("Z must have order {}, got {}", g.prime(), z.order())));
    }
    if !z.members().all(|a| (0..g.size() as Elem).all(|b| g.commutes(a, b))) {
        return Err(QkError::Precondition("Z is not central".into()));
    }
    let members: Vec<Subgroup> = omega_generated_subgroups(g)?
        .into_iter()
        .filter(|x| z.is_proper_subgroup_of(x))
        .filter(|x| g.commutator_subgroup(x, x).is_subgroup_of(&z))
        .collect();
    let maximal = members.iter().filter(|x| !members.iter().any(|y| x.is_proper_subgroup_of(y))).cloned().collect();
    Ok(MzFamily { z, members, maximal })
}

/// `M*_Z(G)` with `Z = Omega_1(Z(G))`.
pub fn mz_star_bruteforce(g: &FiniteGroup) -> Result<Vec<Subgroup>> {
    Ok(mz_bruteforce(g, None)?.maximal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{
        central_product, cyclic, elementary_abelian, extraspecial_exponent_p, semidirect_example,
    };
    use crate::groups::GroupClass;

    // all subsets of elements closed under multiplication, for tiny groups
    fn elementary_abelian_by_scan(g: &FiniteGroup) -> Vec<Subgroup> {
        let mut out: Vec<Subgroup> = omega_generated_subgroups(g)
            .unwrap()
            .into_iter()
            .filter(|s| s.order() >= (g.prime() as usize).pow(2))
            .filter(|s| g.is_abelian(s) && g.exponent_is_p(s))
            .collect();
        out.sort();
        out
    }

    #[test]
    fn rank1_counts() {
        assert_eq!(rank1_subgroups(&extraspecial_exponent_p(3, 1).unwrap()).unwrap().len(), 13);
        assert_eq!(rank1_subgroups(&elementary_abelian(3, 2).unwrap()).unwrap().len(), 4);
        assert_eq!(rank1_subgroups(&cyclic(3, 2).unwrap()).unwrap().len(), 1);
        // (5^4 - 1) / 4
        assert_eq!(rank1_subgroups(&elementary_abelian(5, 4).unwrap()).unwrap().len(), 156);
    }

    #[test]
    fn elementary_abelian_poset_examples() {
        let h = extraspecial_exponent_p(3, 1).unwrap();
        let poset = elem_abelian_poset(&h).unwrap();
        assert_eq!(poset.len(), 4);
        assert!(poset.members().iter().all(|s| s.order() == 9));
        assert_eq!(elem_abelian_poset(&elementary_abelian(3, 2).unwrap()).unwrap().len(), 1);
        assert!(elem_abelian_poset(&cyclic(3, 2).unwrap()).unwrap().is_empty());
        // Gaussian binomials for F_3^3: 13 planes and the whole space
        let e = elementary_abelian(3, 3).unwrap();
        assert_eq!(elem_abelian_poset(&e).unwrap().order_counts(), BTreeMap::from([(9, 13), (27, 1)]));
    }

    #[test]
    fn elementary_abelian_poset_matches_scan() {
        let groups = [
            extraspecial_exponent_p(3, 1).unwrap(),
            elementary_abelian(3, 3).unwrap(),
            central_product(&extraspecial_exponent_p(3, 1).unwrap(), &cyclic(3, 2).unwrap()).unwrap().into_group(),
            extraspecial_exponent_p(3, 2).unwrap(),
        ];
        for g in &groups {
            let fast = elem_abelian_poset(g).unwrap();
            assert_eq!(fast.members(), elementary_abelian_by_scan(g).as_slice(), "{}", g.label());
        }
    }

    #[test]
    fn above_z_matches_filtered_definition() {
        let groups = [
            extraspecial_exponent_p(3, 1).unwrap(),
            extraspecial_exponent_p(3, 2).unwrap(),
            central_product(&extraspecial_exponent_p(3, 1).unwrap(), &cyclic(3, 2).unwrap()).unwrap().into_group(),
            semidirect_example(5, 1).unwrap(),
        ];
        for g in &groups {
            let z = cyclic_omega_center(g).unwrap();
            let filtered = elem_abelian_poset(g).unwrap().filter(|s| z.is_proper_subgroup_of(s));
            assert_eq!(above_z_poset(g).unwrap().members(), filtered.members(), "{}", g.label());
        }
    }

    #[test]
    fn above_z_counts_for_extraspecial_81() {
        let g = extraspecial_exponent_p(3, 2).unwrap();
        let poset = above_z_poset(&g).unwrap();
        // isotropic lines and Lagrangian planes of the symplectic F_3^4
        assert_eq!(poset.order_counts(), BTreeMap::from([(9, 40), (27, 40)]));
        assert!(above_z_poset(&elementary_abelian(3, 2).unwrap()).is_err());
    }

    #[test]
    fn espec_examples() {
        let e = espec(&elementary_abelian(3, 2).unwrap()).unwrap();
        assert!(e.is_empty());
        let x = extraspecial_exponent_p(3, 2).unwrap();
        let r = espec(&x).unwrap();
        assert_eq!(r.members, vec![x.whole()]);
        assert_eq!((r.a(1), r.a(2)), (0, 1));
        let cp = central_product(&extraspecial_exponent_p(3, 1).unwrap(), &cyclic(3, 2).unwrap()).unwrap();
        let r = espec(cp.group()).unwrap();
        assert_eq!(r.a(1), 1);
        assert_eq!(r.members, vec![cp.group().closure(&cp.left_image_generators())]);
    }

    // E(P) straight from the definition over all Omega-generated subgroups
    fn espec_by_definition(g: &FiniteGroup) -> Vec<Subgroup> {
        omega_generated_subgroups(g)
            .unwrap()
            .into_iter()
            .filter(|x| !x.is_trivial() && g.classify(x).unwrap() == GroupClass::Extraspecial && g.exponent_is_p(x))
            .filter(|x| g.omega1(&g.centralizer(x)).unwrap() == g.center_of(x))
            .collect()
    }

    #[test]
    fn espec_matches_definition_on_small_groups() {
        let groups = [
            extraspecial_exponent_p(3, 1).unwrap(),
            extraspecial_exponent_p(3, 2).unwrap(),
            central_product(&extraspecial_exponent_p(3, 1).unwrap(), &cyclic(3, 2).unwrap()).unwrap().into_group(),
            elementary_abelian(3, 3).unwrap(),
            cyclic(3, 2).unwrap(),
        ];
        for g in &groups {
            assert_eq!(espec(g).unwrap().members, espec_by_definition(g), "{}", g.label());
        }
    }

    #[test]
    fn mz_examples() {
        let h = extraspecial_exponent_p(3, 1).unwrap();
        assert_eq!(mz_star_bruteforce(&h).unwrap(), vec![h.whole()]);
        let e = elementary_abelian(3, 2).unwrap();
        let z = e.closure(&[1]);
        let fam = mz_bruteforce(&e, Some(&z)).unwrap();
        assert_eq!(fam.members, vec![e.whole()]);
        let cp = central_product(&h, &h).unwrap();
        assert_eq!(mz_star_bruteforce(cp.group()).unwrap(), vec![cp.group().whole()]);
        assert!(mz_star_bruteforce(&extraspecial_exponent_p(3, 3).unwrap()).is_err());
    }

    #[test]
    fn omega_generated_subgroups_of_f3_squared() {
        // trivial, four lines, the plane
        assert_eq!(omega_generated_subgroups(&elementary_abelian(3, 2).unwrap()).unwrap().len(), 6);
    }
}
