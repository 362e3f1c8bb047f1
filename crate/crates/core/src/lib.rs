//! Exact computations with truncated Quillen complexes of odd p-groups.
//!
//! The crate builds concrete p-groups ([`constructions`]), enumerates their
//! posets of elementary abelian subgroups of rank at least two and the
//! extraspecial subgroups controlling the homotopy type ([`posets`]),
//! computes integral reduced homology of order complexes via Smith normal
//! form ([`homology`]), and compares the two sides ([`verify`]).

pub mod constructions;
pub mod error;
pub mod fpalg;
pub mod groups;
pub mod homology;
pub mod posets;
pub mod verify;

pub use error::{QkError, Result};
pub use groups::{Elem, FiniteGroup, GroupClass, Subgroup};
