//! Correlation-disturbance (CD) tradeoff for a probe measurement followed by a target
//! measurement.
//!
//! The crate computes exact correlation `C` and disturbance `D` from density matrices and
//! Lüders instruments, evaluates the closed-form qubit ellipse law and its d-dimensional
//! circle counterpart, models on-off photon detectors, emulates finite-shot experiments,
//! and inverts CD data back into device parameters.
//!
//! `no_std` compatible (needs `alloc`); disable the default `std` feature.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod calibration;
pub mod cd;
pub mod detector;
pub mod error;
pub mod highdim;
pub mod linalg;
pub mod quantum;
pub mod qubit;
pub mod sampler;

pub use error::{Error, Result};

/// Numerical tolerances shared by validation and analytic checks.
pub mod tol {
    pub const HERM: f64 = 1e-9;
    pub const PSD: f64 = 1e-9;
    pub const TRACE: f64 = 1e-9;
    pub const KRAUS: f64 = 1e-9;
    pub const PROB: f64 = 1e-9;
    pub const COMPLETE: f64 = 1e-9;
    pub const INEQ: f64 = 1e-9;
}
