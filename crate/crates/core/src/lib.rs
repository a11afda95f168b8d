//! Tamed exponential time stepping for stochastic Allen–Cahn type equations
//! driven by space-time white noise on (0,1) with Dirichlet boundary
//! conditions, plus the Monte-Carlo harness for weak errors, moment monitors
//! and interface profiles.
//!
//! The layers, bottom up:
//!
//! * [`spectral`]: sine basis, collocation transforms, semigroup, norms
//! * [`nonlinearity`]: polynomial drift, taming, regularization, constants
//! * [`noise`]: counter-based, exactly coupled noise paths
//! * [`scheme`]: tamed and reference steppers, trajectory and ensemble drivers
//! * [`analysis`]: observables, weak-error tables, rate fits, property checks
//! * [`config`]: experiment configs and presets
//! * [`runner`]: experiment commands and their CSV/JSON artifacts
//!
//! See the crate's `examples/` directory for one runnable program per capability.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod noise;
pub mod nonlinearity;
pub mod runner;
pub mod scheme;
pub mod spectral;
pub mod stats;

pub use noise::NoisePlan;
pub use nonlinearity::{DriftConstants, DriftSpec, TamingParams};
pub use scheme::{SchemeConfig, SchemeKind};
pub use spectral::{NormKind, PhysicalField, SineBasis, SpectralField};
