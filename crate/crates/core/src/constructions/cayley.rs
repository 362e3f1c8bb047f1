use std::io::Write;
use std::path::Path;

use crate::error::{QkError, Result};
use crate::groups::{Elem, FiniteGroup, GroupOracle};

use super::check_prime;

/// Largest order accepted from a table file.
pub const CAYLEY_LIMIT: usize = 4096;

struct TableOracle {
    n: usize,
    table: Vec<Elem>,
    inverses: Vec<Elem>,
}

impl GroupOracle for TableOracle {
    fn size(&self) -> usize {
        self.n
    }
    fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.table[a as usize * self.n + b as usize]
    }
    fn inv(&self, a: Elem) -> Elem {
        self.inverses[a as usize]
    }
    fn decode(&self, a: Elem) -> Vec<u32> {
        vec![a]
    }
}

fn table_err(msg: impl Into<String>) -> QkError {
    QkError::CayleyTable(msg.into())
}

/// Parses a Cayley table: a header `order p` followed by `order` rows of
/// `order` indices, row `a` column `b` holding `a * b`. Index `0` must be
/// the identity. Text after `#` on a line is ignored.
pub fn cayley_table_from_str(text: &str) -> Result<FiniteGroup> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
        .map(|t| t.parse::<u64>().map_err(|_| table_err(format!("not a nonnegative integer: {t:?}"))));
    let mut next = |what: &str| tokens.next().unwrap_or_else(|| Err(table_err(format!("missing {what}"))));
    let n = next("order")? as usize;
    let p = next("prime")?;
    if n == 0 || n > CAYLEY_LIMIT {
        return Err(table_err(format!("order {n} outside 1..={CAYLEY_LIMIT}")));
    }
    let p = check_prime(u32::try_from(p).map_err(|_| table_err("prime too large"))?)?;
    let mut table = Vec::with_capacity(n * n);
    for i in 0..n * n {
        let v = next(&format!("entry ({}, {})", i / n, i % n))?;
        if v as usize >= n {
            return Err(table_err(format!("entry {v} at ({}, {}) is not below {n}", i / n, i % n)));
        }
        table.push(v as Elem);
    }
    if let Some(extra) = tokens.next() {
        return Err(table_err(format!("trailing data after {n} rows: {:?}", extra.ok())));
    }
    for a in 0..n {
        if table[a] as usize != a || table[a * n] as usize != a {
            return Err(table_err(format!("index 0 is not the identity at {a}")));
        }
    }
    for a in 0..n {
        let mut row = vec![false; n];
        let mut col = vec![false; n];
        for b in 0..n {
            if std::mem::replace(&mut row[table[a * n + b] as usize], true) {
                return Err(table_err(format!("row {a} repeats an entry")));
            }
            if std::mem::replace(&mut col[table[b * n + a] as usize], true) {
                return Err(table_err(format!("column {a} repeats an entry")));
            }
        }
    }
    let inverses =
        (0..n).map(|a| (0..n).find(|&b| table[a * n + b] == 0).expect("latin square row contains 0") as Elem).collect();
    FiniteGroup::from_oracle(format!("cayley_table({n})"), p, Box::new(TableOracle { n, table, inverses }), None)
        .map_err(|e| table_err(e.to_string()))
}

pub fn read_cayley_table(path: impl AsRef<Path>) -> Result<FiniteGroup> {
    cayley_table_from_str(&std::fs::read_to_string(path)?)
}

/// Writes `g` in the format read by [`cayley_table_from_str`].
pub fn write_cayley_table(g: &FiniteGroup, mut out: impl Write) -> Result<()> {
    if g.size() > CAYLEY_LIMIT {
        return Err(QkError::invalid("size", format!("order {} exceeds {CAYLEY_LIMIT}", g.size())));
    }
    writeln!(out, "{} {}", g.size(), g.prime())?;
    for a in 0..g.size() as Elem {
        let row: Vec<String> = (0..g.size() as Elem).map(|b| g.mul(a, b).to_string()).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::extraspecial_exponent_p;

    #[test]
    fn round_trip() {
        let h = extraspecial_exponent_p(3, 1).unwrap();
        let mut buf = Vec::new();
        write_cayley_table(&h, &mut buf).unwrap();
        let back = cayley_table_from_str(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.size(), 27);
        for a in 0..27 {
            for b in 0..27 {
                assert_eq!(back.mul(a, b), h.mul(a, b));
            }
        }
    }

    #[test]
    fn rejects_malformed_tables() {
        assert!(cayley_table_from_str("").is_err());
        assert!(cayley_table_from_str("2 2\n0 1\n1").is_err());
        assert!(cayley_table_from_str("2 2\n0 1\n1 0\n5").is_err());
        assert!(cayley_table_from_str("2 4\n0 1\n1 0").is_err());
        assert!(cayley_table_from_str("2 2\n1 0\n0 1").is_err());
        assert!(cayley_table_from_str("3 3\n0 1 2\n1 1 0\n2 0 1").is_err());
        // latin square that is not associative
        let quasi = "5 5\n0 1 2 3 4\n1 0 3 4 2\n2 4 0 1 3\n3 2 4 0 1\n4 3 1 2 0\n";
        assert!(cayley_table_from_str(quasi).is_err());
        assert!(cayley_table_from_str("2 2 # comment\n0 1\n1 0\n").is_ok());
    }
}
