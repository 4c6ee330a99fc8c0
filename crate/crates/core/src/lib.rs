//! A reasoning engine for plausible logic: strict and defeasible inference
//! over first-order (function-free) rule systems with a priority relation.
//!
//! The library is organised in layers:
//!
//! - [`syntax`]: terms, literals, formulas, clauses, substitutions, CNF.
//! - [`classical`]: a DPLL satisfiability solver and classical entailment.
//! - [`description`]: plausible descriptions; compiling axiom clauses into
//!   strict rules, grounding, evidence sets (supporters and foes), the
//!   priority relation and its well-foundedness check.
//! - [`engine`]: the eight proof algorithms, proof-value evaluation,
//!   evaluation rads (rooted acyclic digraphs recording a proof), and
//!   certificate extraction.
//! - [`certificate`]: serialisable proof certificates (JSON and DOT) and an
//!   independent bottom-up validator.
//! - [`truth`]: the four-valued truth function induced by a proof algorithm.
//! - [`lang`]: the textual description language (parser and canonical
//!   printer) used by the command-line interface.

pub mod certificate;
pub mod classical;
pub mod description;
pub mod engine;
pub mod lang;
pub mod syntax;
pub mod truth;
