//! Decision procedures for the four-valued non-deterministic modal logics
//! Tm, S4m and S5m and their first-order extensions Tm*, S4m* and S5m*.
//!
//! The crate provides two independent propositional decision routes — signed
//! analytic tableaux and brute-force enumeration of legal valuations — plus a
//! semi-decidable systematic tableau procedure for the first-order systems
//! with countermodel extraction from open branches, a bounded first-order
//! model searcher, and a checker for Hilbert-style derivations.

pub mod countermodel;
pub mod formula;
pub mod hilbert;
pub mod model;
pub mod oracle;
pub mod parser;
pub mod propdag;
pub mod tableau;
pub mod truth;

pub use formula::{Formula, Signature, Term};
pub use truth::{Logic, TruthValue, ValueSet};
