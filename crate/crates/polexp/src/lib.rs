//! Growth-type analysis for automorphisms of free products of free-abelian
//! and free groups.
//!
//! The crate computes the growth type `(d, λ)` — meaning `n^d λ^n` up to
//! multiplicative and additive constants — of elements, conjugacy classes and
//! palangres under iteration of an automorphism of
//! `G = Z^{k_1} * … * Z^{k_q} * F_N`, and verifies symbolic predictions
//! against brute-force iteration oracles.
//!
//! Module overview:
//!
//! * [`words`] — normal forms, lengths and conjugacy lengths in `G`;
//! * [`automorphism`] — automorphisms, iteration, palangres, mapping-torus
//!   arithmetic;
//! * [`abelian`] — exact growth of `‖A^n v‖` and `‖(I + A + … + A^{n-1})v‖`
//!   for `A ∈ GL(k, Z)` via minimal polynomials of vectors;
//! * [`ct`] — graph-of-groups self-maps with declared complete splittings,
//!   stratum classification and the bottom-up growth-type table;
//! * [`fit`] — the empirical estimator turning length sequences into fitted
//!   growth types;
//! * [`spectrum`] — growth-type set algebra, empirical spectrum enumeration
//!   and combination bounds;
//! * [`report`] — deterministic JSON/CSV emission shared by the CLI.

pub mod abelian;
pub mod automorphism;
pub mod ct;
pub mod error;
pub mod fit;
pub mod growth;
pub mod parse;
pub mod report;
pub mod spectrum;
pub mod words;

pub use error::{Error, Result};
pub use growth::GrowthType;

/// Default cap on the number of syllables (word case) or edges (graph-path
/// case) a single iterate may reach before the computation aborts with
/// [`Error::LengthBudgetExceeded`].
pub const DEFAULT_BUDGET: usize = 10_000_000;

/// Relative tolerance used when comparing symbolically computed λ values.
pub const LAMBDA_TOL_EXACT: f64 = 1e-9;

/// Relative tolerance used when clustering empirically fitted λ values.
pub const LAMBDA_TOL_EMPIRICAL: f64 = 0.02;
