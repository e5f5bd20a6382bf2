//! Local asymptotic minimax risk under asymmetric loss for LAMN experiments.
//!
//! The crate is organised bottom-up:
//!
//! * [`losses`]: asymmetric loss catalogue (LINEX, check, weighted) with truncation.
//! * [`mixing`]: laws of the mixing variable `W` and integrals against them.
//! * [`bias_solver`]: conditional expected loss `h(β, w)` and its minimiser `β₀(w)`.
//! * [`bound`]: the minimax lower bound `E_g[h(β₀(W), W)]`.
//! * [`models`]: explosive AR(1) and super-critical Galton–Watson simulators with
//!   their LAMN statistics.
//! * [`estimators`]: MLE, bias-corrected and shifted estimators.
//! * [`limit_experiment`]: the Gaussian limit experiment under a normal prior.
//! * [`mc_harness`]: replicated risk estimation over a local parameter grid.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bias_solver;
pub mod bound;
pub mod error;
pub mod estimators;
pub mod limit_experiment;
pub mod losses;
pub mod mc_harness;
pub mod minimize;
pub mod mixing;
pub mod models;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
