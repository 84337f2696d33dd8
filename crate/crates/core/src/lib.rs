//! Block-scale price tracking for automated market makers.
//!
//! The tracking error between an external reference log-price and an AMM
//! log-price evolves block by block: arbitrage transactions included in a
//! block shrink the pre-execution gap `x_n` to a post-execution gap `z_n`,
//! and the reference then moves by an exogenous innovation, so that
//! `x_{n+1} = z_n + w_{n+1}`.
//!
//! The crate is organised around that loop:
//!
//! - [`types`]: state, transactions and block outcomes shared everywhere.
//! - [`cpmm`]: constant-product pool mechanics and closed-form arbitrage sizing.
//! - [`execution`]: the sequential block execution operator and its service bound.
//! - [`stochastic`]: disturbance laws, seeded RNG streams and exponential moments.
//! - [`stability`]: drift and local-contraction certificates.
//! - [`simulate`]: the reduced and constant-product simulators and their sweeps.
//! - [`calibrate`]: estimators that map observed pre/post gaps to model quantities.

pub mod calibrate;
pub mod cpmm;
mod error;
pub mod execution;
pub mod simulate;
pub mod solve;
pub mod stability;
pub mod stochastic;
pub mod types;

pub use error::{Error, Result};
pub use types::{combine_band, step, ArbList, ArbTx, BlockOutcome, Direction, TrackingState};
