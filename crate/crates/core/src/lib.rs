//! Exact machinery for cost-optimal L2-approximation of functions of
//! infinitely many variables, driven by product weights and a univariate
//! spectrum.
//!
//! Everything is spectral: a problem is a pair of positive non-increasing
//! sequences (coordinate weights `gamma` and eigenvalues `lambda`), a
//! candidate piece of information is an index pair `(u, j)` with score
//! `gamma_u * lambda_{u,j}`, and the optimal algorithm at error demand
//! `eps` keeps exactly the terms whose score exceeds `eps^2`. On top of that
//! sit two cost models (nested and unrestricted subspace sampling), exact
//! worst-case errors, cost/error trade-off curves, convergence-rate
//! estimation, closed-form rate bounds, and the transfer of the machinery to
//! non-ANOVA spaces through rescaled auxiliary weights.
//!
//! The crate is `no_std` (with `alloc`); all floating-point transcendentals
//! go through `libm` so results are bit-identical across platforms.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod active_set;
pub mod cost;
pub mod engine;
pub mod error;
pub mod model;
pub mod non_anova;
pub mod numeric;
pub mod sequences;

pub use error::{Error, Result};
pub use model::{ProblemModel, Term};
pub use numeric::Interval;
pub use sequences::{DecreasingSequence, SequenceKind};
