//! Core algorithms for a test-free PDL toolkit over language classes.
//!
//! The crate provides:
//!
//! - formulas of the EF/AG fragment with language-annotated modalities,
//!   together with the empty-word elimination rewrite, disjunctive normal
//!   form, completion and AG-elimination (`formula`, `dnf`);
//! - a termination measure on formulas with a lexicographic and a
//!   set-replacement order (`measure`);
//! - a uniform language abstraction with finite, regular, deterministic
//!   pushdown, context-free and builtin palindrome backends plus the
//!   closure operations the extraction pipeline needs (`lang`);
//! - pushdown systems, pre* saturation, run traces, stair positions and
//!   the pumping decomposition (`pushdown`);
//! - rooted labeled transition systems, path structures, shared-root sums
//!   and bounded tree enumeration (`lts`);
//! - an exact model checker for finite structures, a naive path-enumeration
//!   oracle and three-valued bounded validity (`mc`);
//! - the language-theoretic separation experiments: formula languages,
//!   dollar elimination, extraction to good decompositions and the
//!   palindrome witness machinery (`separation`).

pub mod alphabet;
pub mod dnf;
pub mod formula;
pub mod mc;
pub mod lang;
pub mod lts;
pub mod catalog;
pub mod measure;
pub mod separation;
pub mod pushdown;

pub use alphabet::{Alphabet, DOLLAR};
pub use measure::{lex_gt, measure_gt, Measure, OmegaPlusOne};
