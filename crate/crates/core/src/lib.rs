//! Nonlinear difference-in-differences toolkit.
//!
//! The crate covers the full estimation and simulation stack used to study
//! heterogeneous effects of a school-fee waiver:
//!
//! * [`numerics`]: normal distribution functions, Cholesky solves, finite differences.
//! * [`data`]: household/child panel ingestion, estimation samples, descriptive tables.
//! * [`wealth_index`]: first-factor household wealth index from asset indicators.
//! * [`probit`]: Newton-Raphson probit with analytic score and information.
//! * [`did`]: per-observation effects on the treated, delta-method standard
//!   errors, Benjamini-Hochberg adjustment, subgroup CDFs and placebo runs.
//! * [`crosssec`]: household-level proportion regression with age-bin fixed effects.
//! * [`decision_model`]: the household education decision model, closed-form
//!   policy effects and a Monte Carlo cross-check.
//! * [`synth`]: seeded data generators with analytic ground truth.
//! * [`cli`]: the `nldid` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod crosssec;
pub mod data;
pub mod decision_model;
pub mod did;
mod error;
pub mod numerics;
pub mod parallel;
pub mod probit;
pub mod synth;
pub mod wealth_index;

pub use error::{Error, Result};

/// Version tag written into every JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;
