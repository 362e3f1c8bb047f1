use rayon::prelude::*;

use crate::error::{QkError, Result};
use crate::posets::SubgroupPoset;

use super::snf::SparseIntMatrix;

/// Order complex of a finite poset: every chain `x_0 < ... < x_k` is a
/// `k`-simplex, stored as its vertex sequence in poset order. The empty
/// face is kept as the single simplex of dimension `-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderComplex {
    vertices: usize,
    // chains[k] holds the (k-1)-simplices flattened with stride k, sorted
    // lexicographically; chains[0] is the empty face
    chains: Vec<Vec<u32>>,
}

impl OrderComplex {
    pub fn from_poset(poset: &SubgroupPoset, max_simplices: Option<usize>) -> Result<Self> {
        Self::from_relation(poset.len(), &poset.strict_up_sets(), max_simplices)
    }

    /// Order complex of the strict order given by up-sets: `up[i]` lists the
    /// elements strictly above `i`. The relation must be irreflexive and
    /// transitive.
    pub fn from_relation(n: usize, up: &[Vec<usize>], max_simplices: Option<usize>) -> Result<Self> {
        if up.len() != n {
            return Err(QkError::DimensionMismatch(format!("{} up-sets for {n} elements", up.len())));
        }
        for (i, above) in up.iter().enumerate() {
            for &j in above {
                if j >= n || j == i {
                    return Err(QkError::InvariantViolated(format!("bad relation entry {i} < {j}")));
                }
                if !up[j].iter().all(|k| above.contains(k)) {
                    return Err(QkError::InvariantViolated(format!("relation not transitive through {i} < {j}")));
                }
            }
        }
        let cap = max_simplices.unwrap_or(usize::MAX);
        let per_start: Vec<Vec<Vec<u32>>> = (0..n)
            .into_par_iter()
            .map(|v| {
                let mut found: Vec<Vec<u32>> = Vec::new();
                let mut stack = vec![vec![v as u32]];
                while let Some(chain) = stack.pop() {
                    if found.len() > cap {
                        break;
                    }
                    let last = *chain.last().expect("nonempty") as usize;
                    for &w in &up[last] {
                        let mut longer = chain.clone();
                        longer.push(w as u32);
                        stack.push(longer);
                    }
                    found.push(chain);
                }
                found
            })
            .collect();
        let total: usize = per_start.iter().map(Vec::len).sum::<usize>() + 1;
        if total > cap {
            return Err(QkError::Infeasible(format!("order complex exceeds {cap} simplices")));
        }
        let mut by_dim: Vec<Vec<Vec<u32>>> = vec![vec![Vec::new()]];
        for chain in per_start.into_iter().flatten() {
            let k = chain.len();
            if by_dim.len() <= k {
                by_dim.resize(k + 1, Vec::new());
            }
            by_dim[k].push(chain);
        }
        let chains = by_dim
            .into_par_iter()
            .map(|mut list| {
                list.sort_unstable();
                list.concat()
            })
            .collect();
        Ok(OrderComplex { vertices: n, chains })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    /// Top dimension; `-1` for the complex consisting of the empty face.
    pub fn dim(&self) -> isize {
        self.chains.len() as isize - 2
    }

    /// Number of simplices of dimension `k >= -1`.
    pub fn count(&self, k: isize) -> usize {
        if k < -1 || k > self.dim() {
            return 0;
        }
        if k == -1 {
            return 1;
        }
        self.chains[(k + 1) as usize].len() / (k + 1) as usize
    }

    /// Simplex counts for dimensions `-1..=dim`.
    pub fn f_vector(&self) -> Vec<usize> {
        (-1..=self.dim()).map(|k| self.count(k)).collect()
    }

    pub fn total_simplices(&self) -> usize {
        self.f_vector().iter().sum()
    }

    /// Vertex sequences of the `k`-simplices in canonical order.
    pub fn simplices(&self, k: isize) -> Vec<&[u32]> {
        if k == -1 {
            return vec![&[]];
        }
        if k < -1 || k > self.dim() {
            return Vec::new();
        }
        self.chains[(k + 1) as usize].chunks_exact((k + 1) as usize).collect()
    }

    fn find(&self, face: &[u32]) -> Option<usize> {
        let k = face.len();
        if k == 0 {
            return Some(0);
        }
        let flat = self.chains.get(k)?;
        let (mut lo, mut hi) = (0, flat.len() / k);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match flat[mid * k..(mid + 1) * k].cmp(face) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// Augmented boundary `d_k : C_k -> C_(k-1)` for `0 <= k <= dim`, with
    /// `d_0` sending every vertex to the empty face.
    pub fn boundary(&self, k: isize) -> Result<SparseIntMatrix> {
        if k < 0 || k > self.dim() {
            return Err(QkError::DimensionMismatch(format!("no boundary in degree {k}")));
        }
        let faces = self.simplices(k);
        let columns: Vec<Vec<(u32, i64)>> = faces
            .par_iter()
            .map(|s| {
                let mut col = Vec::with_capacity(s.len());
                let mut face = Vec::with_capacity(s.len().saturating_sub(1));
                for i in 0..s.len() {
                    face.clear();
                    face.extend(s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v));
                    let row = self.find(&face).expect("order complexes are closed under faces");
                    col.push((row as u32, if i % 2 == 0 { 1 } else { -1 }));
                }
                col.sort_unstable();
                col
            })
            .collect();
        Ok(SparseIntMatrix { rows: self.count(k - 1), cols: faces.len(), columns })
    }

    /// All augmented boundaries `d_0 .. d_dim`, each checked against its
    /// predecessor for `d d = 0`.
    pub fn boundary_matrices(&self) -> Result<Vec<SparseIntMatrix>> {
        let mats: Vec<SparseIntMatrix> = (0..=self.dim()).map(|k| self.boundary(k)).collect::<Result<_>>()?;
        for k in 1..mats.len() {
            if !composes_to_zero(&mats[k - 1], &mats[k]) {
                return Err(QkError::InvariantViolated(format!("d_{} d_{k} != 0", k - 1)));
            }
        }
        Ok(mats)
    }
}

/// `a * b == 0` for column-sparse matrices.
pub fn composes_to_zero(a: &SparseIntMatrix, b: &SparseIntMatrix) -> bool {
    if a.cols != b.rows {
        return false;
    }
    b.columns.par_iter().all(|col| {
        let mut acc: std::collections::BTreeMap<u32, i64> = std::collections::BTreeMap::new();
        for &(mid, v) in col {
            for &(r, w) in &a.columns[mid as usize] {
                *acc.entry(r).or_insert(0) += v * w;
            }
        }
        acc.values().all(|&x| x == 0)
    })
}
