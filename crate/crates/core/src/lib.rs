//! A desk-scale laboratory for the eddy-current limit of transient Maxwell
//! systems.
//!
//! The crate discretizes the first-order Maxwell block system on a staggered
//! voxel grid (E on edges, H on faces), integrates it implicitly in time with
//! a quiescent causal history, and measures everything in exponentially
//! weighted space-time norms. A family of material laws scales the conductor
//! dielectricity by a parameter s in [0, 1]; the harness studies verify that
//! the solver behaves uniformly along the family and that the s = 0
//! degenerate (eddy-current) model is reached at first order in s, with the
//! structural identities (skew spatial operator, discrete resolvent identity,
//! causality, accretivity of the time derivative) holding to solver
//! precision.
//!
//! Per-parameter solves are independent and run data-parallel under the
//! `parallel` feature (enabled by default); disabling it yields a fully
//! sequential build with identical results.

// `!(x > 0.0)` is the positivity check that also rejects NaN; `x <= 0.0`
// would silently accept it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod document;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod materials;
pub mod mesh;
pub mod ops;
pub mod par;
pub mod report;
pub mod scenarios;
pub mod sparse;
pub mod time;

pub use error::{Error, Result};
pub use mesh::{BoundarySplit, Grid, StateVector};
pub use sparse::SparseOperator;
pub use time::Trajectory;
