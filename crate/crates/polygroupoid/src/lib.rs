//! Finite n-ary polygroupoids with regular abelian group actions.
//!
//! The library constructs the canonical models `H_{G,n}`, checks the
//! quasigroupoid/polygroupoid axioms exhaustively at desk scale, runs the
//! horn-filling and defect calculus, builds star-based isomorphisms and
//! automorphisms, recovers the acting group from the composition relation
//! alone, and tests amalgamation uniqueness, including the canonical failure
//! in dimension n+1.

pub mod amalgamation;
pub mod axioms;
mod combo;
pub mod core;
pub mod error;
pub mod filling;
pub mod group;
pub mod perm;
pub mod pgx;
pub mod recovery;
pub mod standard;
pub mod star;

pub use crate::axioms::{AxiomFamily, AxiomReport, AxiomVerdict, CheckOptions};
pub use crate::core::{Cell, ClosedSet, LawKind, Polygroupoid, Vertex};
pub use crate::error::{Error, Result};
pub use crate::group::{GroupElement, GroupMap, GroupSpec};
pub use crate::perm::{Parity, Perm};
pub use crate::standard::build_standard;
