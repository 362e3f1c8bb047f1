//! JSON group specifications.

use std::path::{Path, PathBuf};

use qk_core::constructions::{
    central_product, corollary3_group, corollary3_order, cyclic, elementary_abelian, extraspecial_exponent_p,
    read_cayley_table, semidirect_example,
};
use qk_core::verify::Limits;
use qk_core::{FiniteGroup, QkError};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::Failure;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "construct", rename_all = "snake_case")]
pub enum GroupSpec {
    Cyclic { p: u32, n: u32 },
    ElementaryAbelian { p: u32, n: u32 },
    Extraspecial { p: u32, m: u32 },
    CentralProduct { left: Box<GroupSpec>, right: Box<GroupSpec> },
    SemidirectExample { p: u32, m: u32 },
    Corollary3 { p: u32, t: u32, k: u32 },
    CayleyTable { path: String },
}

/// A parsed spec with the directory that relative Cayley-table paths are
/// resolved against.
#[derive(Clone, Debug)]
pub struct LoadedSpec {
    pub spec: GroupSpec,
    pub base: PathBuf,
}

fn invalid(path: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::invalid(format!("spec field `{path}`: {msg}"))
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn check_keys(obj: &Map<String, Value>, prefix: &str, allowed: &[&str]) -> Result<(), Failure> {
    for key in obj.keys() {
        if key != "construct" && !allowed.contains(&key.as_str()) {
            return Err(invalid(&join(prefix, key), format!("unknown field, expected one of {allowed:?}")));
        }
    }
    for key in allowed {
        if !obj.contains_key(*key) {
            return Err(invalid(&join(prefix, key), "missing"));
        }
    }
    Ok(())
}

fn uint(obj: &Map<String, Value>, prefix: &str, key: &str) -> Result<u32, Failure> {
    obj[key]
        .as_u64()
        .and_then(|v| u32::try_from(v).ok())
        .ok_or_else(|| invalid(&join(prefix, key), format!("expected an integer in 0..=4294967295, got {}", obj[key])))
}

impl GroupSpec {
    pub fn from_value(v: &Value) -> Result<GroupSpec, Failure> {
        Self::parse(v, "")
    }

    fn parse(v: &Value, prefix: &str) -> Result<GroupSpec, Failure> {
        let obj =
            v.as_object().ok_or_else(|| invalid(if prefix.is_empty() { "." } else { prefix }, "expected an object"))?;
        let construct = obj
            .get("construct")
            .ok_or_else(|| invalid(&join(prefix, "construct"), "missing"))?
            .as_str()
            .ok_or_else(|| invalid(&join(prefix, "construct"), "expected a string"))?;
        let spec = match construct {
            "cyclic" => {
                check_keys(obj, prefix, &["p", "n"])?;
                GroupSpec::Cyclic { p: uint(obj, prefix, "p")?, n: uint(obj, prefix, "n")? }
            }
            "elementary_abelian" => {
                check_keys(obj, prefix, &["p", "n"])?;
                GroupSpec::ElementaryAbelian { p: uint(obj, prefix, "p")?, n: uint(obj, prefix, "n")? }
            }
            "extraspecial" => {
                check_keys(obj, prefix, &["p", "m"])?;
                GroupSpec::Extraspecial { p: uint(obj, prefix, "p")?, m: uint(obj, prefix, "m")? }
            }
            "semidirect_example" => {
                check_keys(obj, prefix, &["p", "m"])?;
                GroupSpec::SemidirectExample { p: uint(obj, prefix, "p")?, m: uint(obj, prefix, "m")? }
            }
            "corollary3" => {
                check_keys(obj, prefix, &["p", "t", "k"])?;
                GroupSpec::Corollary3 {
                    p: uint(obj, prefix, "p")?,
                    t: uint(obj, prefix, "t")?,
                    k: uint(obj, prefix, "k")?,
                }
            }
            "central_product" => {
                check_keys(obj, prefix, &["left", "right"])?;
                GroupSpec::CentralProduct {
                    left: Box::new(Self::parse(&obj["left"], &join(prefix, "left"))?),
                    right: Box::new(Self::parse(&obj["right"], &join(prefix, "right"))?),
                }
            }
            "cayley_table" => {
                check_keys(obj, prefix, &["path"])?;
                let path = obj["path"].as_str().ok_or_else(|| invalid(&join(prefix, "path"), "expected a string"))?;
                GroupSpec::CayleyTable { path: path.to_string() }
            }
            other => return Err(invalid(&join(prefix, "construct"), format!("unknown construction `{other}`"))),
        };
        Ok(spec)
    }

    /// Group order, when it is known without building the group.
    pub fn order(&self) -> Option<u128> {
        let pow = |p: u32, e: u32| (p as u128).checked_pow(e);
        match *self {
            GroupSpec::Cyclic { p, n } | GroupSpec::ElementaryAbelian { p, n } => pow(p, n),
            GroupSpec::Extraspecial { p, m } => pow(p, m.checked_mul(2)?.checked_add(1)?),
            GroupSpec::SemidirectExample { p, m } => pow(p, m.checked_mul(2)?.checked_add(2)?),
            GroupSpec::Corollary3 { p, t, k } => corollary3_order(p, t, k),
            GroupSpec::CentralProduct { ref left, ref right } => {
                let (GroupSpec::Cyclic { p, .. }
                | GroupSpec::ElementaryAbelian { p, .. }
                | GroupSpec::Extraspecial { p, .. }
                | GroupSpec::SemidirectExample { p, .. }
                | GroupSpec::Corollary3 { p, .. }) = **left
                else {
                    return None;
                };
                left.order()?.checked_mul(right.order()?)?.checked_div(p as u128)
            }
            GroupSpec::CayleyTable { .. } => None,
        }
    }

    /// Builds the group after checking its order against the element limit.
    pub fn build(&self, base: &Path, limits: &Limits) -> Result<FiniteGroup, QkError> {
        if let Some(order) = self.order() {
            limits.check_order(order, "specified group")?;
        }
        let usize_of = |m: u32| m as usize;
        let g = match self {
            GroupSpec::Cyclic { p, n } => cyclic(*p, *n)?,
            GroupSpec::ElementaryAbelian { p, n } => elementary_abelian(*p, *n)?,
            GroupSpec::Extraspecial { p, m } => extraspecial_exponent_p(*p, usize_of(*m))?,
            GroupSpec::SemidirectExample { p, m } => semidirect_example(*p, usize_of(*m))?,
            GroupSpec::Corollary3 { p, t, k } => corollary3_group(*p, *t, *k)?,
            GroupSpec::CentralProduct { left, right } => {
                let l = left.build(base, limits)?;
                let r = right.build(base, limits)?;
                central_product(&l, &r)?.into_group()
            }
            GroupSpec::CayleyTable { path } => read_cayley_table(base.join(path))?,
        };
        limits.check_order(g.size() as u128, g.label())?;
        Ok(g)
    }
}

impl LoadedSpec {
    /// Inline JSON when the argument starts with `{`, otherwise a file path.
    pub fn load(arg: &str) -> Result<LoadedSpec, Failure> {
        let (text, base) = if arg.trim_start().starts_with('{') {
            (arg.to_string(), PathBuf::from("."))
        } else {
            let path = Path::new(arg);
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::invalid(format!("cannot read spec file {arg}: {e}")))?;
            (text, path.parent().map(Path::to_path_buf).unwrap_or_default())
        };
        let value: Value =
            serde_json::from_str(&text).map_err(|e| Failure::invalid(format!("spec is not valid JSON: {e}")))?;
        Ok(LoadedSpec { spec: GroupSpec::from_value(&value)?, base })
    }

    pub fn build(&self, limits: &Limits) -> Result<FiniteGroup, Failure> {
        Ok(self.spec.build(&self.base, limits)?)
    }

    /// The spec with its order, for result documents.
    pub fn descriptor(&self, g: &FiniteGroup) -> Value {
        let mut v = serde_json::to_value(&self.spec).expect("specs serialize");
        v.as_object_mut().expect("specs are objects").insert("order".into(), Value::from(g.size() as u64));
        v
    }
}
