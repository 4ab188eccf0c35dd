//! Certified lower bounds for the first nontrivial Neumann eigenvalue of the
//! p-Laplacian on domains built from overlapping convex cells, and on images
//! of such domains under quasiconformal maps.
//!
//! The crate is organised in four layers:
//!
//! * [`geometry`]: convex cells, overlap volumes, Whitney triples and chains,
//!   the star-shaped two-piece domain and the snowflake tree.
//! * [`poincare`]: per-cell Poincaré constants and the rules that combine
//!   them over unions, chains and trees, including a certified series tail.
//! * [`qc_transfer`]: composition-operator norms and the transfer of
//!   Poincaré constants and eigenvalue bounds through quasiconformal maps.
//! * [`oracle`]: finite-element and Rayleigh-quotient reference values used
//!   to check that every emitted bound points in the right direction.

// `!(x > 0.0)` is used on purpose so that NaN is rejected along with x <= 0.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
pub mod error;
pub mod geometry;
pub mod numeric;
pub mod oracle;
pub mod poincare;
pub mod qc_transfer;

pub use certificate::{BoundForm, ChainFactor, EigenBound, PoincareBound, Term, TransferResult};
pub use error::{Error, Result};
