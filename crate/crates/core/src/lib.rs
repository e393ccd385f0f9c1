//! Limited-memory CMA-ES with an asynchronous steady-state `(m+1)` variant.
//!
//! The covariance factor is kept implicitly as a short list of rank-one
//! updates ([`cholesky`]), so sampling and updates cost `O(n·m)` per
//! evaluation. [`engine::run_async`] evaluates candidates on several threads
//! and folds each result into the shared state one at a time inside a single
//! critical section; [`engine::run_generational`] is the classic `(μ/μ_w, λ)`
//! baseline. [`harness`] reproduces a benchmark protocol on top of both.
//!
//! ```no_run
//! use lmcma::engine::{run, Mode, RunConfig};
//! use lmcma::objectives::{BenchmarkFunction, ObjectiveSpec};
//!
//! let mut config = RunConfig::new(ObjectiveSpec::new(BenchmarkFunction::Sphere, 100)).unwrap();
//! config.workers = 4;
//! config.mode = Mode::Async;
//! let result = run(&config).unwrap();
//! println!("{:?} after {} evaluations", result.terminal_reason, result.evals_used);
//! ```

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cholesky;
pub mod cpu;
pub mod engine;
pub mod error;
pub mod harness;
pub mod objectives;
pub mod seed;
pub mod strategy;

pub use error::{Error, Result};
