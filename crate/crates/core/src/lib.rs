//! Computational toolkit for quadratic fields, quadratic lattices, Weil
//! representations, Rankin–Selberg L-functions, Heegner and geodesic cycles,
//! and automorphic Green's functions built from regularized theta lifts.

#![warn(missing_docs)]

pub mod error;
pub mod numerics;
pub mod quadfield;
pub mod lattice;
pub mod weil;
pub mod modforms;
pub mod lfunc;
pub mod cycles;
pub mod greens;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
pub use report::{Check, Observation, VerificationReport, SCHEMA_VERSION};
