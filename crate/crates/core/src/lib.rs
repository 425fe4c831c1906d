//! Simulator and schedule compiler for a MHz-rate 2D optical rasterer: a
//! counter-propagating AOD pair (DAOD) on the slow axis and a VIPA driven by
//! EOM sidebands on the fast axis.
//!
//! - [`model`]: closed-form deflector figures (access time, resolutions,
//!   acoustic lensing, VIPA metrics).
//! - [`oracle`]: scalar wave-optics check of the closed forms.
//! - [`compiler`]: 2D pattern to timed drive schedule, plus constraint checks.
//! - [`shuttle`]: parallel atom transport planning.
//! - [`budget`]: efficiency chain and trap counting.
//! - [`render`]: expected focal-plane image of a pattern.
//! - [`formats`]: pattern and schedule file encodings.

// `!(x > 0.0)` is the NaN-rejecting form of a range check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod compiler;
pub mod device;
pub mod error;
pub mod formats;
pub mod model;
pub mod oracle;
pub mod render;
pub mod shuttle;

pub use device::{AodSpec, BeamSpec, ChirpScan, DaodSpec, DeviceSpec, EomSpec, RelaySpec, VipaSpec};
pub use error::{Error, Result};
