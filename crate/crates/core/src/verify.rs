//! Executable checks of the structural results: predicted homology from
//! extraspecial-subgroup counts against direct homology, the `M_Z` lemmas at
//! brute-force scale, and the `Omega` set family.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::time::Instant;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::constructions::{
    central_product, corollary3_group, corollary3_order, extraspecial_exponent_p, semidirect_example,
};
use crate::error::{QkError, Result};
use crate::groups::{FiniteGroup, GroupClass, Subgroup};
use crate::homology::{reduced_homology_torsion_free, HomologyProfile, OrderComplex};
use crate::posets::{
    above_z_poset, cyclic_omega_center, elem_abelian_poset, espec, mz_bruteforce, omega1_center, EspecReport,
    Rank1Index, SubgroupPoset, MZ_BRUTEFORCE_LIMIT,
};

/// Largest extraspecial order accepted by [`verify_prop_extra`].
pub const PROP_EXTRA_LIMIT: u64 = 100_000;

/// Feasibility gates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_elements: usize,
    pub max_simplices: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_elements: 200_000, max_simplices: 1_000_000 }
    }
}

impl Limits {
    pub fn check_order(&self, order: u128, what: &str) -> Result<()> {
        if order > self.max_elements as u128 {
            return Err(QkError::Infeasible(format!(
                "{what} has {order} elements, above the limit of {}",
                self.max_elements
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    Main1,
    A2Equivalence,
    PropExtra,
    Techlem,
    Corollary3,
    Maxex,
    Nea,
    Mzsint,
}

/// Which poset the homology was computed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexKind {
    /// Elementary abelian subgroups of order at least `p^2`.
    AGe2,
    /// The members of `AGe2` strictly containing `Omega_1(Z(P))`.
    AGtZ,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

/// Outcome of one verification. `matched` is the conjunction of all checks.
/// Timings are kept out of the serialized body so that reports are
/// reproducible byte for byte.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub claim: Claim,
    pub group: String,
    pub order: u128,
    pub complex: Option<ComplexKind>,
    pub predicted: Option<HomologyProfile>,
    pub computed: Option<HomologyProfile>,
    pub espec_counts: BTreeMap<usize, u64>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub matched: bool,
    #[serde(skip)]
    pub timings: BTreeMap<String, f64>,
}

impl VerificationReport {
    fn new(claim: Claim, group: impl Into<String>, order: u128) -> Self {
        VerificationReport {
            claim,
            group: group.into(),
            order,
            complex: None,
            predicted: None,
            computed: None,
            espec_counts: BTreeMap::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            matched: false,
            timings: BTreeMap::new(),
        }
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    fn finish(mut self) -> Self {
        self.matched = !self.checks.is_empty() && self.checks.iter().all(|c| c.passed);
        self
    }

    fn timed<T>(&mut self, phase: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f();
        self.timings.insert(phase.into(), start.elapsed().as_secs_f64() * 1e3);
        out
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Homology predicted by the counts `a_n`: rank `a_(l+1) p^((l+1)^2)` in
/// degree `l >= 0`, and rank one in degree `-1` exactly when `A>=2(P)` is
/// empty. Degrees up to `max_degree` are filled with zeros.
pub fn predicted_profile(
    p: u32,
    counts: &BTreeMap<usize, u64>,
    a2_empty: bool,
    max_degree: i64,
) -> Result<HomologyProfile> {
    let mut ranks = BTreeMap::new();
    if a2_empty {
        ranks.insert(-1, 1);
    }
    for (&n, &a) in counts {
        if n == 0 || a == 0 {
            continue;
        }
        let spheres = (p as u64)
            .checked_pow((n * n) as u32)
            .and_then(|s| s.checked_mul(a))
            .ok_or_else(|| QkError::Infeasible(format!("predicted rank a_{n} * {p}^{} overflows", n * n)))?;
        ranks.insert(n as i64 - 1, spheres);
    }
    Ok(HomologyProfile::free(&ranks, max_degree))
}

/// [`predicted_profile`] for an [`EspecReport`].
pub fn predicted_from_report(p: u32, report: &EspecReport, a2_empty: bool, max_degree: i64) -> Result<HomologyProfile> {
    predicted_profile(p, &report.counts, a2_empty, max_degree)
}

/// `A>=2(G)` is empty exactly when `G` has a single subgroup of order `p`.
pub fn a2_is_empty(g: &FiniteGroup) -> Result<bool> {
    Ok(Rank1Index::new(g)?.len() <= 1)
}

/// The poset of the given kind.
pub fn poset_of(g: &FiniteGroup, kind: ComplexKind) -> Result<SubgroupPoset> {
    match kind {
        ComplexKind::AGe2 => elem_abelian_poset(g),
        ComplexKind::AGtZ => above_z_poset(g),
    }
}

/// Reduced homology of the order complex of `A>=2(G)` or `A>Z(G)`, which
/// must be torsion free.
pub fn complex_homology(g: &FiniteGroup, kind: ComplexKind, limits: &Limits) -> Result<HomologyProfile> {
    limits.check_order(g.size() as u128, g.label())?;
    let poset = poset_of(g, kind)?;
    let complex = OrderComplex::from_poset(&poset, Some(limits.max_simplices))?;
    reduced_homology_torsion_free(&complex)
}

fn homology_phase(
    report: &mut VerificationReport,
    g: &FiniteGroup,
    kind: ComplexKind,
    limits: &Limits,
) -> Result<HomologyProfile> {
    let poset = report.timed("poset", || poset_of(g, kind))?;
    let complex = report.timed("complex", || OrderComplex::from_poset(&poset, Some(limits.max_simplices)))?;
    let h = report.timed("homology", || reduced_homology_torsion_free(&complex))?;
    report.complex = Some(kind);
    Ok(h)
}

fn degrees_string(h: &HomologyProfile) -> String {
    let parts: Vec<String> = h
        .degrees
        .iter()
        .filter(|(_, d)| d.rank > 0 || !d.torsion.is_empty())
        .map(|(k, d)| format!("{k}:{}", d.rank))
        .collect();
    format!("{{{}}}", parts.join(", "))
}

fn compare(report: &mut VerificationReport, predicted: HomologyProfile, computed: HomologyProfile) {
    let ok = predicted.same_homology(&computed);
    report.check(
        "predicted_equals_computed",
        ok,
        format!("predicted {} computed {}", degrees_string(&predicted), degrees_string(&computed)),
    );
    report.check("torsion_free", computed.is_torsion_free(), "computed homology has no torsion");
    report.predicted = Some(predicted);
    report.computed = Some(computed);
}

/// Homology of `A>=2(G)` against the prediction from `E(G)`. When
/// `Omega_1(Z(G))` has order `p` the homology is taken on `A>Z(G)`, which
/// has the same homotopy type.
pub fn verify_main1(g: &FiniteGroup, limits: &Limits) -> Result<VerificationReport> {
    limits.check_order(g.size() as u128, g.label())?;
    if !g.is_p_group() {
        return Err(QkError::NotPGroup(g.size()));
    }
    if g.is_cyclic() {
        return Err(QkError::Precondition(format!("{} is cyclic", g.label())));
    }
    let mut report = VerificationReport::new(Claim::Main1, g.label(), g.size() as u128);
    let z = report.timed("center", || omega1_center(g))?;
    let kind = if z.order() == g.prime() as usize { ComplexKind::AGtZ } else { ComplexKind::AGe2 };
    let e = report.timed("espec", || espec(g))?;
    report.espec_counts = e.counts.clone();
    let computed = homology_phase(&mut report, g, kind, limits)?;
    let a2_empty = a2_is_empty(g)?;
    let predicted =
        predicted_from_report(g.prime(), &e, a2_empty, computed.degrees.keys().max().copied().unwrap_or(-1))?;
    if kind == ComplexKind::AGe2 {
        report.check("noncyclic_center_contractible", computed.is_zero(), degrees_string(&computed));
    }
    compare(&mut report, predicted, computed);
    report.notes.push("homotopy equivalence is checked at the level of integral homology".into());
    if g.prime() == 2 {
        report.notes.push("the prediction assumes an odd prime; p = 2 is outside its hypotheses".into());
    }
    Ok(report.finish())
}

/// Equal homology of `A>=2(G)` and `A>Z(G)`.
pub fn verify_equivalence_a2_az(g: &FiniteGroup, limits: &Limits) -> Result<VerificationReport> {
    limits.check_order(g.size() as u128, g.label())?;
    cyclic_omega_center(g)?;
    let mut report = VerificationReport::new(Claim::A2Equivalence, g.label(), g.size() as u128);
    let full = homology_phase(&mut report, g, ComplexKind::AGe2, limits)?;
    let above = homology_phase(&mut report, g, ComplexKind::AGtZ, limits)?;
    report.complex = None;
    report.check(
        "same_homology",
        full.same_homology(&above),
        format!("A>=2 {} A>Z {}", degrees_string(&full), degrees_string(&above)),
    );
    report.predicted = Some(full);
    report.computed = Some(above);
    Ok(report.finish())
}

/// `A>=2` of the extraspecial group of order `p^(2m+1)` has homology
/// `Z^(p^(m^2))` in degree `m - 1` and nowhere else.
pub fn verify_prop_extra(p: u32, m: usize, limits: &Limits) -> Result<VerificationReport> {
    crate::fpalg::check_odd_prime(p)?;
    if m == 0 {
        return Err(QkError::invalid("m", "must be positive"));
    }
    let order = (p as u64).checked_pow(2 * m as u32 + 1).filter(|&o| o <= PROP_EXTRA_LIMIT);
    let Some(order) = order else {
        return Err(QkError::Infeasible(format!("{p}^{} exceeds {PROP_EXTRA_LIMIT}", 2 * m + 1)));
    };
    limits.check_order(order as u128, "extraspecial group")?;
    let g = extraspecial_exponent_p(p, m)?;
    let mut report = VerificationReport::new(Claim::PropExtra, g.label(), order as u128);
    let computed = homology_phase(&mut report, &g, ComplexKind::AGe2, limits)?;
    let spheres = (p as u64).pow((m * m) as u32);
    let predicted = HomologyProfile::free(&BTreeMap::from([(m as i64 - 1, spheres)]), m as i64 - 1);
    let e = report.timed("espec", || espec(&g))?;
    report.espec_counts = e.counts.clone();
    report.check("espec_is_whole_group", e.members == vec![g.whole()], format!("E(X) has {} members", e.members.len()));
    compare(&mut report, predicted, computed);
    Ok(report.finish())
}

/// Members of `M*_Z(G)`, or `{Z}` when `M_Z(G)` is empty.
fn mz_star_or_z(g: &FiniteGroup) -> Result<Vec<Subgroup>> {
    let fam = mz_bruteforce(g, None)?;
    Ok(if fam.members.is_empty() { vec![fam.z] } else { fam.maximal })
}

/// `M*_Z(G1 o G2)` against the products `X1 X2` of members of `M*_Z(Gi)`,
/// by brute force.
pub fn verify_techlem(g1: &FiniteGroup, g2: &FiniteGroup) -> Result<VerificationReport> {
    for g in [g1, g2] {
        if g.size() <= g.prime() as usize {
            return Err(QkError::Precondition(format!(
                "factor {} must be a proper subgroup of the product",
                g.label()
            )));
        }
    }
    if !g1.exponent_is_p(&g1.whole()) && !g2.exponent_is_p(&g2.whole()) {
        return Err(QkError::Precondition("neither factor has exponent p".into()));
    }
    let product_order = g1.size() as u128 * g2.size() as u128 / g1.prime() as u128;
    if product_order > MZ_BRUTEFORCE_LIMIT as u128 {
        return Err(QkError::Infeasible(format!(
            "central product of order {product_order} exceeds the brute-force limit {MZ_BRUTEFORCE_LIMIT}"
        )));
    }
    let cp = central_product(g1, g2)?;
    let g = cp.group();
    let mut report = VerificationReport::new(Claim::Techlem, g.label(), g.size() as u128);
    let direct = report.timed("mz_product", || mz_bruteforce(g, None))?.maximal;
    let (left, right) = report.timed("mz_factors", || Ok((mz_star_or_z(g1)?, mz_star_or_z(g2)?)))?;
    let mut products: Vec<Subgroup> = left
        .iter()
        .flat_map(|x1| right.iter().map(move |x2| (x1, x2)))
        .map(|(x1, x2)| {
            let gens: Vec<_> = x1
                .generators()
                .iter()
                .map(|&a| cp.embed_left(a))
                .chain(x2.generators().iter().map(|&b| cp.embed_right(b)))
                .collect();
            g.closure(&gens)
        })
        .collect();
    products.sort();
    products.dedup();
    report.check(
        "mz_star_factorizes",
        direct == products,
        format!("{} maximal members, {} products", direct.len(), products.len()),
    );
    let left_z = mz_bruteforce(g1, None)?.members.is_empty();
    let right_z = mz_bruteforce(g2, None)?.members.is_empty();
    if left_z || right_z {
        report.notes.push("a factor with empty M_Z contributes Z itself".into());
    }
    Ok(report.finish())
}

/// `a_n(G1 o G2) = sum over n1 + n2 = n of a_n1(G1) a_n2(G2)`, where
/// `a_0(Gi)` is one for cyclic `Gi` (whose only `M*_Z` candidate is `Z`) and
/// zero otherwise.
pub fn factorized_espec_counts(g1: &FiniteGroup, g2: &FiniteGroup) -> Result<BTreeMap<usize, u64>> {
    let mut sides = Vec::new();
    for g in [g1, g2] {
        cyclic_omega_center(g)?;
        if g.size() <= g.prime() as usize {
            return Err(QkError::Precondition(format!("factor {} must be proper", g.label())));
        }
        let mut counts = espec(g)?.counts;
        if a2_is_empty(g)? {
            counts.insert(0, 1);
        }
        sides.push(counts);
    }
    if g1.prime() != g2.prime() {
        return Err(QkError::invalid("prime", "factors use different primes"));
    }
    let mut out = BTreeMap::new();
    for (&n1, &a1) in &sides[0] {
        for (&n2, &a2) in &sides[1] {
            if n1 + n2 > 0 && a1 * a2 > 0 {
                *out.entry(n1 + n2).or_insert(0) += a1 * a2;
            }
        }
    }
    Ok(out)
}

/// Homology of the group of order `p^(2(t+k+2))` is nonzero exactly in
/// degrees `t` and `t + k`. Above the element limit only the counting side
/// runs, with counts taken from the two central factors.
pub fn verify_corollary3(p: u32, t: u32, k: u32, limits: &Limits) -> Result<VerificationReport> {
    crate::constructions::check_corollary3_parameters(p, k)?;
    let order = corollary3_order(p, t, k).ok_or_else(|| QkError::invalid("t", "group order overflows"))?;
    let label = format!("corollary3({p},{t},{k})");
    let mut report = VerificationReport::new(Claim::Corollary3, label, order);
    let expected: Vec<i64> = vec![t as i64, (t + k) as i64];
    let top = (t + k) as i64;
    if order <= limits.max_elements as u128 {
        let g = report.timed("construct", || corollary3_group(p, t, k))?;
        let e = report.timed("espec", || espec(&g))?;
        report.espec_counts = e.counts.clone();
        let computed = homology_phase(&mut report, &g, ComplexKind::AGtZ, limits)?;
        let predicted = predicted_from_report(p, &e, false, top)?;
        report.check(
            "computed_degrees",
            computed.nonzero_degrees() == expected,
            format!("nonzero in {:?}", computed.nonzero_degrees()),
        );
        let top_rank = (p as u64).pow((top as u32 + 1).pow(2));
        report.check(
            "top_degree_rank",
            computed.rank(top) == top_rank,
            format!("rank {} in degree {top}, expected {top_rank}", computed.rank(top)),
        );
        let low = computed.rank(t as i64);
        let unit = (p as u64).pow((t + 1).pow(2));
        report.check(
            "low_degree_from_count",
            low % unit == 0 && low / unit == e.a(t as usize + 1),
            format!("rank {low} in degree {t}, a_{} = {}", t + 1, e.a(t as usize + 1)),
        );
        compare(&mut report, predicted.clone(), computed);
        report.check(
            "predicted_degrees",
            predicted.nonzero_degrees() == expected,
            format!("{:?}", predicted.nonzero_degrees()),
        );
    } else {
        limits.check_order((p as u128).pow(2 * k + 4), "semidirect factor")?;
        limits.check_order((p as u128).pow(2 * t + 1), "extraspecial factor")?;
        let left = report.timed("construct", || semidirect_example(p, k as usize + 1))?;
        let right = extraspecial_exponent_p(p, t as usize)?;
        let counts = report.timed("espec", || factorized_espec_counts(&left, &right))?;
        report.espec_counts = counts.clone();
        let predicted = predicted_profile(p, &counts, false, top)?;
        report.check(
            "predicted_degrees",
            predicted.nonzero_degrees() == expected,
            format!("{:?}", predicted.nonzero_degrees()),
        );
        report.predicted = Some(predicted);
        report.notes.push(format!(
            "order {order} exceeds the element limit; counts come from the central factors and homology is not computed"
        ));
    }
    let top_count = report.espec_counts.get(&(t as usize + k as usize + 1)).copied().unwrap_or(0);
    report.check("single_top_member", top_count == 1, format!("a_{} = {top_count}", t + k + 1));
    if t == 0 {
        report.notes.push("t = 0 uses the order-p^(2k+4) factor alone".into());
    }
    Ok(report.finish())
}

fn is_extraspecial(g: &FiniteGroup, x: &Subgroup) -> Result<bool> {
    Ok(!x.is_trivial() && g.classify(x)? == GroupClass::Extraspecial)
}

/// For extraspecial `X` in `M_Z(G)`: `X` is maximal iff
/// `Omega_1(C_G(X)) = Z`.
pub fn verify_maxex(g: &FiniteGroup) -> Result<VerificationReport> {
    let fam = mz_bruteforce(g, None)?;
    let mut report = VerificationReport::new(Claim::Maxex, g.label(), g.size() as u128);
    let mut tested = 0;
    let mut failures = Vec::new();
    for x in &fam.members {
        if !is_extraspecial(g, x)? {
            continue;
        }
        tested += 1;
        let maximal = fam.maximal.contains(x);
        let small_centralizer = g.omega1(&g.centralizer(x))? == fam.z;
        if maximal != small_centralizer {
            failures.push(format!("{x:?}"));
        }
    }
    report.check(
        "maximal_iff_small_centralizer",
        failures.is_empty(),
        format!("{tested} extraspecial members of M_Z; failures {failures:?}"),
    );
    Ok(report.finish())
}

/// Some normal elementary abelian `N` of order `p^2` lies in every member
/// of `M*_Z(G)`.
pub fn verify_nea(g: &FiniteGroup) -> Result<VerificationReport> {
    if g.is_cyclic() {
        return Err(QkError::Precondition(format!("{} is cyclic", g.label())));
    }
    let fam = mz_bruteforce(g, None)?;
    let mut report = VerificationReport::new(Claim::Nea, g.label(), g.size() as u128);
    let p2 = (g.prime() as usize).pow(2);
    let normal: Vec<Subgroup> =
        elem_abelian_poset(g)?.members().iter().filter(|n| n.order() == p2 && g.is_normal(n)).cloned().collect();
    let common = normal.iter().filter(|n| fam.maximal.iter().all(|s| n.is_subgroup_of(s))).count();
    report.check("normal_rank2_exists", !normal.is_empty(), format!("{} normal candidates", normal.len()));
    report.check(
        "common_to_all_maximal",
        common > 0,
        format!("{common} candidates lie in all {} members of M*_Z", fam.maximal.len()),
    );
    Ok(report.finish())
}

/// Every intersection of two or more members of `M*_Z(G)` lies in `M_Z(G)`
/// and is not extraspecial.
pub fn verify_mzsint(g: &FiniteGroup) -> Result<VerificationReport> {
    let fam = mz_bruteforce(g, None)?;
    let mut report = VerificationReport::new(Claim::Mzsint, g.label(), g.size() as u128);
    let star = &fam.maximal;
    let mut seen: HashSet<FixedBitSet> = HashSet::new();
    let mut frontier = Vec::new();
    for i in 0..star.len() {
        for j in i + 1..star.len() {
            let y = g.intersection(&star[i], &star[j]);
            if seen.insert(y.member_bits().clone()) {
                frontier.push(y);
            }
        }
    }
    let mut all = frontier.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for y in &frontier {
            for s in star {
                let w = g.intersection(y, s);
                if seen.insert(w.member_bits().clone()) {
                    next.push(w);
                }
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    let members: BTreeSet<&Subgroup> = fam.members.iter().collect();
    let mut bad = Vec::new();
    for y in &all {
        if !members.contains(y) || is_extraspecial(g, y)? {
            bad.push(format!("{y:?}"));
        }
    }
    if star.len() < 2 {
        report.notes.push("fewer than two maximal members; the statement is vacuous".into());
    }
    report.check(
        "intersections_in_mz_not_extraspecial",
        bad.is_empty(),
        format!("{} intersections from {} maximal members; failures {bad:?}", all.len(), star.len()),
    );
    Ok(report.finish())
}

/// A finite set of nonnegative integers.
pub type OmegaSet = BTreeSet<u32>;

fn bits_of(set: u64) -> OmegaSet {
    (0..64).filter(|&i| set & (1 << i) != 0).collect()
}

/// `1 + I + J`.
pub fn shifted_sum(i: &OmegaSet, j: &OmegaSet) -> OmegaSet {
    i.iter().flat_map(|&a| j.iter().map(move |&b| 1 + a + b)).collect()
}

/// The family generated from all subsets of `[0, max_element]` of size at
/// most two under `(I, J) -> 1 + I + J`, keeping only subsets of
/// `[0, max_element]`, iterated `depth` times or until stable.
pub fn omega_sets(max_element: u32, depth: usize) -> Result<Vec<OmegaSet>> {
    if max_element > 62 {
        return Err(QkError::invalid("max_element", "must be at most 62"));
    }
    let n = max_element as u64 + 1;
    let mut family: BTreeSet<u64> = BTreeSet::from([0]);
    for a in 0..n {
        family.insert(1 << a);
        for b in a + 1..n {
            family.insert((1 << a) | (1 << b));
        }
    }
    for _ in 0..depth {
        let current: Vec<u64> = family.iter().copied().collect();
        let mut added = false;
        for &i in &current {
            for &j in &current {
                let mut s = 0u64;
                let mut fits = true;
                for a in (0..n).filter(|&a| i & (1 << a) != 0) {
                    for b in (0..n).filter(|&b| j & (1 << b) != 0) {
                        let v = 1 + a + b;
                        if v < n {
                            s |= 1 << v;
                        } else {
                            fits = false;
                        }
                    }
                }
                if fits && family.insert(s) {
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }
    let mut out: Vec<OmegaSet> = family.into_iter().map(bits_of).collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}
