//! Universal algebraic geometry over finite multi-sorted models.
//!
//! A model `(G, Φ, f)` consists of a finite multi-sorted algebra `G` and an
//! interpretation `f` of relation symbols. Formulas over a variable context
//! `X` evaluate to subsets of the affine space `Hom(W(X), G)`, and the crate
//! builds the Galois correspondence between point sets and theories, the
//! automorphism-group side of that correspondence, and knowledge bases on top.

pub mod algebra;
pub mod autgalois;
pub mod cli;
pub mod config;
pub mod error;
pub mod formula;
pub mod galois;
pub mod geometry;
pub mod knowledge;

pub use error::{Error, Result, Violation};
