//! Sequent-calculus kernel and proof transformations for intuitionistic
//! modal logics.
//!
//! The crate provides: a checking kernel for single-conclusion sequent
//! calculi over the modal language and its fragments (`calculus`, `proof`),
//! a catalog of builtin calculi (`catalog`), recognizers for the
//! basic/almost-positive/constructive formula classes and the constructive
//! rule forms with the rule-to-axiom conversion (`classify`), one-node
//! Kripke evaluation and T-free/T-full classification (`semantics`), the
//! angled-atom translation with its commutation and Harrop machinery
//! (`translate`), the provability-preservation transformer (`preserve`),
//! proof-producing Horn unit propagation and the modal-to-implicational
//! reduction (`hornsolve`), and the end-to-end disjunct extraction with its
//! fragment lifts (`extract`).

pub mod bench;
pub mod calculus;
pub mod classify;
pub mod semantics;
pub mod preserve;
pub mod translate;
pub mod catalog;
pub mod combinator;
pub mod corpus;
pub mod error;
pub mod extract;
pub mod formula;
pub mod hornsolve;
pub mod json;
pub mod parse;
pub mod proof;

pub use error::{Error, Result};
pub use formula::{FMultiset, Formula, LanguageTag, Sequent, Substitution};
pub use proof::{check_proof, Proof, Verdict};
