//! Reasoning over weighted description-logic knowledge bases under cost-based
//! semantics.
//!
//! The crate provides an exact bounded-domain solver for the bounded-cost and
//! optimal-cost semantics, a first-order rewriting compiler for fixed-cost
//! possible-CQ and certain-IQ answering over DL-Lite_bool^H, and generators for
//! the standard hardness reductions with known ground truth.

pub mod interp;
pub mod kb;
pub mod reductions;
pub mod rewriter;
pub mod solver;
pub mod textio;
pub mod weight;

pub use interp::{Interpretation, OneType};
pub use kb::{
    Assertion, Axiom, Concept, Dialect, DialectReport, Query, QueryAtom, Role, Signature, Term,
    WeightedKb,
};
pub use weight::{Cost, Weight};
