//! Block-scale simulators.
//!
//! [`reduced`] drives the tracking loop with a large-error service law
//! `(lambda, p)` and a dead-zone cap; [`mechanism`] replaces the service law
//! with a constant-product pool traded by an optimal arbitrageur.
//!
//! Every simulated block is checked against the one-block service bound and
//! the one-step excess recursion; the first violation aborts the run with
//! [`Error::InvariantViolation`](crate::Error::InvariantViolation).
//!
//! RNG layout: the disturbance path always uses stream
//! [`DISTURBANCE_STREAM`] of the scenario seed, so runs that share a seed
//! share their reference path. Service draws of the reduced model use
//! [`SERVICE_STREAM`]` + cell index`.

pub mod mechanism;
pub mod reduced;

use serde::{Deserialize, Serialize};

use crate::types::Direction;

pub use mechanism::{run_mechanism, sweep_mechanism, MechScenario, MechSweep};
pub use reduced::{
    run_reduced, scenario_shift, scenario_shift_by, sweep_reduced, ReducedScenario, ReducedSweep,
    ServiceLevel, ShiftSizes,
};

pub const DISTURBANCE_STREAM: u64 = 0;
pub const SERVICE_STREAM: u64 = 1;

/// Number of contiguous batches used for batch-means standard errors.
pub const BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeRecord {
    pub direction: Direction,
    pub q: f64,
    pub profit: f64,
}

/// One simulated block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub block: u64,
    /// Pre-execution gap.
    pub x: f64,
    /// Post-execution gap.
    pub z: f64,
    /// Realised correction.
    pub correction: f64,
    /// Innovation applied after the block.
    pub w_next: f64,
    pub reference_log_price: f64,
    /// AMM log-price after the block.
    pub amm_log_price: f64,
    /// Post-block reserves, mechanism runs only.
    pub reserves: Option<(f64, f64)>,
    /// Executed arbitrage, mechanism runs only.
    pub trade: Option<TradeRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub records: Vec<BlockRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub blocks: u64,
    pub gamma_bar: f64,
    /// Mean of `(|x_n| - gamma_bar)_+`.
    pub mean_excess: f64,
    /// Mean of `|x_n|`.
    pub mean_abs_gap: f64,
    /// Share of blocks with `|x_n| <= gamma_bar`.
    pub fraction_in_tube: f64,
    /// Executed trades; `None` for reduced runs.
    pub trades_executed: Option<u64>,
    /// Batch means of the run's headline statistic (excess for reduced
    /// runs, absolute gap for mechanism runs), in time order.
    pub batch_means: Vec<f64>,
}

impl SimSummary {
    /// The statistic the run reports: mean excess or mean absolute gap.
    pub fn headline(&self) -> f64 {
        if self.trades_executed.is_some() {
            self.mean_abs_gap
        } else {
            self.mean_excess
        }
    }
}

/// Streaming accumulator for [`SimSummary`].
#[derive(Debug)]
pub(crate) struct SummaryBuilder {
    gamma_bar: f64,
    horizon: u64,
    mechanism: bool,
    n: u64,
    excess_sum: f64,
    abs_sum: f64,
    in_tube: u64,
    trades: u64,
    batch_sum: f64,
    batch_len: u64,
    batch_means: Vec<f64>,
}

impl SummaryBuilder {
    pub(crate) fn new(gamma_bar: f64, horizon: u64, mechanism: bool) -> Self {
        SummaryBuilder {
            gamma_bar,
            horizon,
            mechanism,
            n: 0,
            excess_sum: 0.0,
            abs_sum: 0.0,
            in_tube: 0,
            trades: 0,
            batch_sum: 0.0,
            batch_len: 0,
            batch_means: Vec::with_capacity(BATCHES),
        }
    }

    pub(crate) fn push(&mut self, x: f64, traded: bool) {
        let e = crate::execution::excess(x, self.gamma_bar);
        self.n += 1;
        self.excess_sum += e;
        self.abs_sum += x.abs();
        if x.abs() <= self.gamma_bar {
            self.in_tube += 1;
        }
        if traded {
            self.trades += 1;
        }
        self.batch_sum += if self.mechanism { x.abs() } else { e };
        self.batch_len += 1;
        // batch k covers blocks [k h / B, (k + 1) h / B)
        let k = self.batch_means.len() as u64;
        let end = (k + 1) * self.horizon / BATCHES as u64;
        if self.n >= end && self.batch_len > 0 {
            self.batch_means.push(self.batch_sum / self.batch_len as f64);
            self.batch_sum = 0.0;
            self.batch_len = 0;
        }
    }

    pub(crate) fn finish(mut self) -> SimSummary {
        if self.batch_len > 0 {
            self.batch_means.push(self.batch_sum / self.batch_len as f64);
        }
        let n = self.n.max(1) as f64;
        SimSummary {
            blocks: self.n,
            gamma_bar: self.gamma_bar,
            mean_excess: self.excess_sum / n,
            mean_abs_gap: self.abs_sum / n,
            fraction_in_tube: self.in_tube as f64 / n,
            trades_executed: self.mechanism.then_some(self.trades),
            batch_means: self.batch_means,
        }
    }
}

/// Difference of two runs' headline statistics on a shared path, with a
/// batch-means standard error of that difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedDiff {
    /// `a - b`.
    pub mean: f64,
    pub std_error: f64,
}

impl PairedDiff {
    pub fn between(a: &SimSummary, b: &SimSummary) -> PairedDiff {
        let d: Vec<f64> = a
            .batch_means
            .iter()
            .zip(&b.batch_means)
            .map(|(x, y)| x - y)
            .collect();
        let k = d.len() as f64;
        let mean = a.headline() - b.headline();
        if d.len() < 2 {
            return PairedDiff { mean, std_error: 0.0 };
        }
        let m = d.iter().sum::<f64>() / k;
        let var = d.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (k - 1.0);
        PairedDiff {
            mean,
            std_error: (var / k).sqrt(),
        }
    }

    /// True unless `a` exceeds `b` by more than `sigmas` standard errors
    /// (plus a rounding floor of `1e-12`).
    pub fn not_worse(&self, sigmas: f64) -> bool {
        self.mean <= sigmas * self.std_error + 1e-12
    }
}
