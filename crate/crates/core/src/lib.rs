//! Finite, checkable pieces of the theory of trees with acyclic levels on
//! Cantor space: codings of naturals and words, the canonical test and its
//! tree, the `ρ₀` hierarchy on eventually constant sequences, the reduction
//! built from a dense-open oracle, π-selectors and tree relations.
//!
//! Naturals are `u128` and every coding operation is checked. Infinite
//! sequences are eventually constant ([`EvConstSeq`]) or sparse
//! ([`hierarchy::SparseSeq`]).

pub mod codings;
pub mod graph;
pub mod hierarchy;
pub mod reduction;
pub mod selector;
pub mod testkit;
pub mod treerel;

pub use codings::{
    pair, pcode, phi, psi, psi_inv, CodingError, EvConstSeq, Nat, NatPair, Side, Word,
};
pub use graph::{BipartiteGraph, Vertex};
pub use hierarchy::{CertifiedSeq, HierarchyError, OrdinalExpr};
pub use reduction::{DenseOpenOracle, ReductionData, ReductionError, SeenOneOracle, TrivialOracle};
pub use selector::{PiSelector, SelectorError, SelectorInstance, SetMap};
pub use testkit::{NodePair, Test, TestError};
pub use treerel::{Relation, ResolutionFamily, TreeRelError, TruncTree};
