//! Finite combinatorics behind creature-forcing constructions.
//!
//! The crate provides exact norm values, subatomic families, Sacks columns,
//! atoms, compound creatures, finite condition prefixes with the parameter
//! cascade, and the counting norms, together with brute-force checkers for
//! the finite lemmas they satisfy.

pub mod atoms;
pub mod compound;
pub mod counting;
pub mod exactnum;
pub mod frame;
pub mod interval;
pub mod par;
pub mod sacks;
pub mod subatoms;

pub use exactnum::{BigNat, Comparison, NormValue, SizeDescriptor};
pub use interval::IndexInterval;
