//! Rough statistical convergence of real sequences in partial metric spaces.
//!
//! The crate turns the definitions into finite-prefix decision procedures:
//!
//! - [`pm`]: partial metric spaces, axiom checks, balls, diameters;
//! - [`seq`]: declarative closed-form sequences;
//! - [`density`]: exact natural-density estimates with three-valued verdicts;
//! - [`analysis`]: convergence, boundedness, Cauchy and cluster engines, and
//!   grid estimates of limit sets;
//! - [`theorems`]: empirical checks of the theorems about those limit sets;
//! - [`config`] and [`report`]: the experiment file format and report
//!   emission used by the `roughstat` binary.
//!
//! Grid scans and prefix counts run on rayon when the `parallel` feature is
//! enabled (the default) and sequentially otherwise; results are identical.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod decimal;
pub mod density;
pub mod error;
pub mod exec;
pub mod pm;
pub mod report;
pub mod seq;
pub mod theorems;

pub use error::{Error, Result};

/// Tolerance for every `<=` / `>=` comparison of metric values.
pub const CMP_TOL: f64 = 1e-12;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
