//! Toolkit for reducing bounded-degree k-CSPs to kR-dimensional matching.
//!
//! The pipeline has four stages, each with exact desk-scale oracles so every
//! transformation can be checked end to end:
//!
//! * [`csp`] — k-partite CSP instances with explicit satisfying-tuple sets,
//!   brute-force solving, and seeded random/planted generators.
//! * [`sparsify`] — randomized degree reduction: sample constraints with
//!   probability `(1 - λ)R/d`, trim every vertex back to degree `R`, and
//!   check the concentration events the analysis relies on.
//! * [`reduce`] — the affine-line gadget reduction from an R-degree-bounded
//!   k-CSP over alphabet `R` (prime) to a kR-set-packing instance, matching
//!   size equal to the CSP optimum, with bidirectional decoding.
//! * [`pad`] — lift a q-partite matching instance to p parts with dummy
//!   vertices, preserving the maximum matching size.
//!
//! [`ff`] supplies the prime-field arithmetic behind the gadget, [`packing`]
//! the set-packing data model and solvers, and [`stats`] the tail-bound
//! evaluators used to sanity-check the sparsifier empirically.
//!
//! With the default `parallel` feature the enumeration solvers and
//! Monte-Carlo sweeps run on rayon; disabling it falls back to the
//! single-threaded paths (`*_seq` functions), which always produce identical
//! results.

pub mod csp;
pub mod ff;
pub mod gadget;
pub mod packing;
pub mod pad;
pub mod reduce;
pub mod sparsify;
pub mod stats;
