//! Shared domain types and the block-scale state update.
//!
//! All prices and gaps are natural-log quantities. A gap is always
//! "reference minus AMM", so a positive gap means the pool quotes too low.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_nonneg, ensure_positive, Error, Result};

/// Pre- and post-execution tracking errors for one block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingState {
    /// Gap seen at the start of the block, before any included trade.
    pub x: f64,
    /// Gap left after the block's trades executed or reverted.
    pub z: f64,
    pub block_index: u64,
}

/// Sign of a corrective transaction.
///
/// In the execution layer a transaction with direction `s` only succeeds
/// when `s * residual > 0`. In [`crate::cpmm`] `Plus` is the trade that
/// inputs asset 0 and `Minus` the trade that inputs asset 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Direction {
    Plus,
    Minus,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Plus => 1.0,
            Direction::Minus => -1.0,
        }
    }

    /// Direction that points along `v`; `None` for zero or NaN.
    pub fn of(v: f64) -> Option<Self> {
        if v > 0.0 {
            Some(Direction::Plus)
        } else if v < 0.0 {
            Some(Direction::Minus)
        } else {
            None
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Direction::Plus => Direction::Minus,
            Direction::Minus => Direction::Plus,
        }
    }
}

impl From<Direction> for i8 {
    fn from(d: Direction) -> i8 {
        match d {
            Direction::Plus => 1,
            Direction::Minus => -1,
        }
    }
}

impl TryFrom<i8> for Direction {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, Self::Error> {
        match v {
            1 => Ok(Direction::Plus),
            -1 => Ok(Direction::Minus),
            other => Err(format!("direction must be +1 or -1, got {other}")),
        }
    }
}

/// One included arbitrage transaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArbTx {
    pub s: Direction,
    /// Error magnitude removed if the transaction succeeds.
    pub u: f64,
    /// Executable residual band.
    pub gamma: f64,
}

impl ArbTx {
    pub fn new(s: Direction, u: f64, gamma: f64) -> Result<Self> {
        let tx = ArbTx { s, u, gamma };
        tx.validate()?;
        Ok(tx)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("u", self.u)?;
        ensure_nonneg("gamma", self.gamma)?;
        Ok(())
    }
}

/// Ordered list of transactions included in one block. Order matters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArbList(pub Vec<ArbTx>);

impl ArbList {
    pub fn new(txs: Vec<ArbTx>) -> Result<Self> {
        for tx in &txs {
            tx.validate()?;
        }
        Ok(ArbList(txs))
    }

    pub fn empty() -> Self {
        ArbList(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ArbTx> {
        self.0.iter()
    }

    /// Largest executable band in the list, 0 for an empty list.
    pub fn max_band(&self) -> f64 {
        self.0.iter().map(|tx| tx.gamma).fold(0.0, f64::max)
    }
}

impl From<Vec<ArbTx>> for ArbList {
    fn from(v: Vec<ArbTx>) -> Self {
        ArbList(v)
    }
}

/// Result of executing an [`ArbList`] against a pre-execution gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockOutcome {
    /// Final residual.
    pub z: f64,
    /// Sum of `u` over successful transactions.
    pub total_correction: f64,
    pub success_flags: Vec<bool>,
    /// `R_0 = x, R_1, ..., R_K = z`.
    pub residual_path: Vec<f64>,
}

impl BlockOutcome {
    /// Outcome of a block in which nothing executed.
    pub fn idle(x: f64) -> Self {
        BlockOutcome {
            z: x,
            total_correction: 0.0,
            success_flags: Vec::new(),
            residual_path: vec![x],
        }
    }
}

/// State update `x' = z + w`.
pub fn step(z: f64, w: f64) -> f64 {
    z + w
}

/// Executable band of a transaction: the larger of its economic threshold
/// and its slippage guard.
pub fn combine_band(gamma_econ: f64, zeta: f64) -> Result<f64> {
    ensure_nonneg("gamma_econ", gamma_econ)?;
    ensure_nonneg("zeta", zeta)?;
    Ok(gamma_econ.max(zeta))
}

impl TrackingState {
    pub fn new(x: f64, z: f64, block_index: u64) -> Result<Self> {
        ensure_finite("x", x)?;
        ensure_finite("z", z)?;
        if z.abs() > x.abs() {
            return Err(Error::invalid(
                "z",
                format!("post-execution gap |{z}| exceeds pre-execution gap |{x}|"),
            ));
        }
        Ok(TrackingState { x, z, block_index })
    }
}
