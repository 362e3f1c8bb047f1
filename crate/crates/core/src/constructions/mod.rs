//! Concrete p-groups: cyclic and elementary abelian groups, extraspecial
//! groups of exponent `p`, central products over `Omega_1` of the centres,
//! split extensions of an extraspecial group by an order-`p` automorphism,
//! and groups read from Cayley tables.

mod cayley;
mod central;
mod extraspecial;
mod semidirect;

pub use cayley::{cayley_table_from_str, read_cayley_table, write_cayley_table};
pub use central::{central_product, CentralProduct};
pub use extraspecial::{extraspecial_exponent_p, Extraspecial, ExtraspecialElement};
pub(crate) use semidirect::check_corollary3_parameters;
pub use semidirect::{
    corollary3_group, corollary3_order, lift_symplectic, semidirect_example, LiftedAutomorphism, SemidirectExample,
};

use crate::error::{QkError, Result};
use crate::fpalg::is_prime;
use crate::groups::{Elem, FiniteGroup, GroupOracle};

pub(crate) fn check_prime(p: u32) -> Result<u32> {
    if !is_prime(p as u64) {
        return Err(QkError::invalid("p", format!("{p} is not prime")));
    }
    Ok(p)
}

/// `p^n` as `usize`, failing if it does not fit an element index.
pub(crate) fn checked_power(p: u32, n: u32, field: &str) -> Result<usize> {
    (p as u64)
        .checked_pow(n)
        .filter(|&s| s <= u32::MAX as u64)
        .map(|s| s as usize)
        .ok_or_else(|| QkError::invalid(field, format!("{p}^{n} elements is beyond the supported index range")))
}

struct CyclicOracle {
    n: u32,
}

impl GroupOracle for CyclicOracle {
    fn size(&self) -> usize {
        self.n as usize
    }
    fn mul(&self, a: Elem, b: Elem) -> Elem {
        ((a as u64 + b as u64) % self.n as u64) as Elem
    }
    fn inv(&self, a: Elem) -> Elem {
        (self.n - a) % self.n
    }
    fn decode(&self, a: Elem) -> Vec<u32> {
        vec![a]
    }
}

/// Cyclic group of order `p^n`, written additively on residues.
pub fn cyclic(p: u32, n: u32) -> Result<FiniteGroup> {
    check_prime(p)?;
    if n == 0 {
        return Err(QkError::invalid("n", "must be positive"));
    }
    let size = checked_power(p, n, "n")?;
    let gens = if size > 1 { vec![1] } else { vec![] };
    FiniteGroup::from_oracle(format!("cyclic({p},{n})"), p, Box::new(CyclicOracle { n: size as u32 }), Some(gens))
}

struct ElementaryAbelianOracle {
    p: u32,
    n: u32,
    size: usize,
}

impl GroupOracle for ElementaryAbelianOracle {
    fn size(&self) -> usize {
        self.size
    }
    fn mul(&self, a: Elem, b: Elem) -> Elem {
        let (mut a, mut b, mut out, mut scale) = (a, b, 0, 1);
        for _ in 0..self.n {
            out += ((a % self.p + b % self.p) % self.p) * scale;
            a /= self.p;
            b /= self.p;
            scale *= self.p;
        }
        out
    }
    fn inv(&self, a: Elem) -> Elem {
        let (mut a, mut out, mut scale) = (a, 0, 1);
        for _ in 0..self.n {
            out += ((self.p - a % self.p) % self.p) * scale;
            a /= self.p;
            scale *= self.p;
        }
        out
    }
    fn decode(&self, a: Elem) -> Vec<u32> {
        let mut a = a;
        (0..self.n)
            .map(|_| {
                let d = a % self.p;
                a /= self.p;
                d
            })
            .collect()
    }
}

/// `F_p^n` under addition; element index is the base-`p` digit string.
pub fn elementary_abelian(p: u32, n: u32) -> Result<FiniteGroup> {
    check_prime(p)?;
    if n == 0 {
        return Err(QkError::invalid("n", "must be positive"));
    }
    let size = checked_power(p, n, "n")?;
    let gens = (0..n).map(|i| p.pow(i)).collect();
    FiniteGroup::from_oracle(
        format!("elementary_abelian({p},{n})"),
        p,
        Box::new(ElementaryAbelianOracle { p, n, size }),
        Some(gens),
    )
}
