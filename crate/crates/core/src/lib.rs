//! Off-ball decision making for simulated 2D soccer driven by a learned
//! pass predictor.
//!
//! The pipeline: [`extractor`] turns game snapshots into labeled feature
//! vectors, [`predictor`] trains and queries the pass network,
//! [`decisioning`] grows a best-first tree of likely passes to pick whom an
//! off-ball player should expect the ball from, and [`positioning`] finds
//! where to receive it. [`strategies`] wraps this and two baselines behind
//! one fallback chain, and [`harness`] compares chains in headless episodes.

pub mod config;
pub mod decisioning;
pub mod error;
pub mod extractor;
pub mod harness;
pub mod motion;
pub mod positioning;
pub mod predictor;
pub mod strategies;
pub mod world;

pub use error::{Error, Result};
