//! Modelling toolkit for flat-wire inductors on gapped ferrite cores.
//!
//! The crate covers DC resistance models, a magnetic equivalent circuit with
//! frequency-dependent reluctances, an axisymmetric eddy-current field solver,
//! its post-processing, and the converter ripple loss estimate built on top.

// NaN must fail range checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dcr;
pub mod error;
pub mod femq;
pub mod mec;
pub mod model;
pub mod post;
pub mod ripple;
pub mod sweep;

pub use error::{Error, Result, Violation};
pub use model::{Clearances, CoilSpec, CoreSpec, FringingKind, FringingModel, Gap, InductorDesign};

/// Vacuum permeability [H/m].
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;
