//! Order complexes, augmented integral chain complexes and reduced
//! homology via Smith normal form.

mod complex;
mod snf;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{QkError, Result};

pub use complex::{composes_to_zero, OrderComplex};
pub use snf::{smith_normal_form, smith_normal_form_bigint, SmithForm, SnfInt, SparseIntMatrix};

/// Reduced homology in one degree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DegreeHomology {
    pub rank: u64,
    #[serde(serialize_with = "decimal_list")]
    pub torsion: Vec<BigInt>,
}

fn decimal_list<S: Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|d| d.to_string()))
}

/// Reduced integral homology for degrees `-1..=dim`, with the simplex
/// counts it was computed from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct HomologyProfile {
    pub degrees: BTreeMap<i64, DegreeHomology>,
    pub simplex_counts: BTreeMap<i64, u64>,
}

impl HomologyProfile {
    /// A torsion-free profile from free ranks by degree; zero ranks are
    /// filled in for every degree from `-1` to `top`.
    pub fn free(ranks: &BTreeMap<i64, u64>, top: i64) -> Self {
        let top = ranks.keys().copied().max().unwrap_or(-1).max(top);
        let degrees = (-1..=top)
            .map(|d| (d, DegreeHomology { rank: ranks.get(&d).copied().unwrap_or(0), torsion: Vec::new() }))
            .collect();
        HomologyProfile { degrees, simplex_counts: BTreeMap::new() }
    }

    pub fn rank(&self, degree: i64) -> u64 {
        self.degrees.get(&degree).map_or(0, |h| h.rank)
    }

    pub fn ranks(&self) -> BTreeMap<i64, u64> {
        self.degrees.iter().map(|(&d, h)| (d, h.rank)).collect()
    }

    /// Degrees with nonzero homology (free or torsion).
    pub fn nonzero_degrees(&self) -> Vec<i64> {
        self.degrees.iter().filter(|(_, h)| h.rank > 0 || !h.torsion.is_empty()).map(|(&d, _)| d).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.nonzero_degrees().is_empty()
    }

    pub fn is_torsion_free(&self) -> bool {
        self.degrees.values().all(|h| h.torsion.is_empty())
    }

    /// Alternating sum of simplex counts against alternating sum of ranks.
    pub fn euler_holds(&self) -> bool {
        let sign = |d: i64| if d.rem_euclid(2) == 0 { 1i128 } else { -1 };
        let chains: i128 = self.simplex_counts.iter().map(|(&d, &n)| sign(d) * n as i128).sum();
        let homology: i128 = self.degrees.iter().map(|(&d, h)| sign(d) * h.rank as i128).sum();
        chains == homology
    }

    /// Equality of free ranks and torsion in every degree, treating missing
    /// degrees as zero.
    pub fn same_homology(&self, other: &HomologyProfile) -> bool {
        let degrees: std::collections::BTreeSet<i64> =
            self.degrees.keys().chain(other.degrees.keys()).copied().collect();
        let zero = DegreeHomology::default();
        degrees.into_iter().all(|d| self.degrees.get(&d).unwrap_or(&zero) == other.degrees.get(&d).unwrap_or(&zero))
    }
}

/// Reduced homology of an order complex:
/// `rank H_k = n_k - rank d_k - rank d_(k+1)`, torsion from the invariant
/// factors of `d_(k+1)`. The result is checked for `d d = 0` and the Euler
/// identity.
pub fn reduced_homology(c: &OrderComplex) -> Result<HomologyProfile> {
    let mats = c.boundary_matrices()?;
    let forms: Vec<SmithForm> = mats.par_iter().map(smith_normal_form).collect();
    // forms[k] belongs to d_k
    let rank_of = |k: isize| if k < 0 || k as usize >= forms.len() { 0 } else { forms[k as usize].rank };
    let mut degrees = BTreeMap::new();
    let mut simplex_counts = BTreeMap::new();
    for k in -1..=c.dim() {
        let n = c.count(k);
        let free = n
            .checked_sub(rank_of(k) + rank_of(k + 1))
            .ok_or_else(|| QkError::InvariantViolated(format!("boundary ranks exceed chain rank in degree {k}")))?;
        let torsion = if ((k + 1) as usize) < forms.len() { forms[(k + 1) as usize].torsion() } else { Vec::new() };
        degrees.insert(k as i64, DegreeHomology { rank: free as u64, torsion });
        simplex_counts.insert(k as i64, n as u64);
    }
    let profile = HomologyProfile { degrees, simplex_counts };
    if !profile.euler_holds() {
        return Err(QkError::InvariantViolated("Euler characteristic identity failed".into()));
    }
    Ok(profile)
}

/// Reduced homology of a complex that must be a wedge of spheres: any
/// torsion is reported as an error.
pub fn reduced_homology_torsion_free(c: &OrderComplex) -> Result<HomologyProfile> {
    let h = reduced_homology(c)?;
    if !h.is_torsion_free() {
        return Err(QkError::InvariantViolated(format!("torsion in degrees {:?}", h.nonzero_degrees())));
    }
    Ok(h)
}
