//! Constant-product pool mechanics and closed-form arbitrage sizing.
//!
//! A pool holds reserves `(x, y)` of asset 0 and asset 1 and quotes the
//! price of asset 0 as `P = y / x`. A swap input of `q` is charged the fee
//! multiplier `eta`: only `eta * q` is priced, but the whole `q` is added to
//! the input reserve, so the reserve product never decreases.
//!
//! Direction conventions follow the arbitrage literature:
//!
//! - [`Direction::Plus`] inputs asset 0 and lowers the pool price. It is the
//!   corrective trade when the pool quotes above the reference (negative gap).
//! - [`Direction::Minus`] inputs asset 1 and raises the pool price. It is the
//!   corrective trade when the pool quotes below the reference (positive gap).
//!
//! With reference price `P*` and fixed cost `c_f` the optimal inputs are
//!
//! ```text
//! q+ = ((sqrt(eta x y / P*) - x) / eta)_+      H+ = (sqrt(y) - sqrt(x P* / eta))_+^2 - c_f
//! q- = ((sqrt(eta x y P*) - y) / eta)_+        H- = (sqrt(x P*) - sqrt(y / eta))_+^2 - c_f
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{ensure_nonneg, ensure_positive, Error, Result};
use crate::solve::bisect;
use crate::types::Direction;

/// Upper end of the log-gap bracket searched by [`no_trade_radius`].
pub const RADIUS_BRACKET: f64 = 10.0;
const RADIUS_XTOL: f64 = 1e-12;
const RADIUS_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pool {
    pub reserve_x: f64,
    pub reserve_y: f64,
    /// Fee multiplier in `(0, 1]`; 0.997 for a 30 bp pool.
    pub eta: f64,
}

impl Pool {
    pub fn new(reserve_x: f64, reserve_y: f64, eta: f64) -> Result<Self> {
        let pool = Pool {
            reserve_x,
            reserve_y,
            eta,
        };
        pool.validate()?;
        Ok(pool)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("reserve_x", self.reserve_x)?;
        ensure_positive("reserve_y", self.reserve_y)?;
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::invalid("eta", format!("expected 0 < eta <= 1, got {}", self.eta)));
        }
        let price = self.reserve_y / self.reserve_x;
        if !(price.is_finite() && price > 0.0) {
            return Err(Error::invalid("reserves", format!("pool price {price} is not positive and finite")));
        }
        Ok(())
    }

    pub fn invariant_k(&self) -> f64 {
        self.reserve_x * self.reserve_y
    }

    pub fn price(&self) -> f64 {
        self.reserve_y / self.reserve_x
    }

    /// Same price and fee, both reserves multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        ensure_positive("depth_scale", factor)?;
        Pool::new(self.reserve_x * factor, self.reserve_y * factor, self.eta)
    }
}

/// Fixed numeraire (asset 1) cost paid by an executed arbitrage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExecCost {
    pub c_f: f64,
}

impl ExecCost {
    pub fn new(c_f: f64) -> Result<Self> {
        ensure_nonneg("c_f", c_f)?;
        Ok(ExecCost { c_f })
    }

    pub fn zero() -> Self {
        ExecCost { c_f: 0.0 }
    }
}

/// A profitable corrective trade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arb {
    pub direction: Direction,
    pub q: f64,
    /// Net profit after the fixed cost, strictly positive.
    pub profit: f64,
}

fn positive_part(v: f64) -> f64 {
    v.max(0.0)
}

pub fn pool_log_price(pool: &Pool) -> f64 {
    (pool.reserve_y / pool.reserve_x).ln()
}

/// Optimal input size for `direction`, zero when that direction is not
/// profitable at any size.
pub fn optimal_input(pool: &Pool, p_star: f64, direction: Direction) -> Result<f64> {
    ensure_positive("p_star", p_star)?;
    let Pool {
        reserve_x: x,
        reserve_y: y,
        eta,
    } = *pool;
    let q = match direction {
        Direction::Plus => ((eta * x * y / p_star).sqrt() - x) / eta,
        Direction::Minus => ((eta * x * y * p_star).sqrt() - y) / eta,
    };
    Ok(positive_part(q))
}

/// Optimal directional profit net of the fixed cost. Negative values mean
/// the direction does not pay for its cost.
pub fn directional_profit(pool: &Pool, p_star: f64, direction: Direction, cost: ExecCost) -> Result<f64> {
    ensure_positive("p_star", p_star)?;
    let Pool {
        reserve_x: x,
        reserve_y: y,
        eta,
    } = *pool;
    let gross = match direction {
        Direction::Plus => positive_part(y.sqrt() - (x * p_star / eta).sqrt()),
        Direction::Minus => positive_part((x * p_star).sqrt() - (y / eta).sqrt()),
    };
    Ok(gross * gross - cost.c_f)
}

/// Output amount of swapping `q` in the given direction.
pub fn swap_output(pool: &Pool, direction: Direction, q: f64) -> f64 {
    let Pool {
        reserve_x: x,
        reserve_y: y,
        eta,
    } = *pool;
    match direction {
        Direction::Plus => y * eta * q / (x + eta * q),
        Direction::Minus => x * eta * q / (y + eta * q),
    }
}

/// Numeraire profit of a trade of size `q` valued at `p_star`, before fixed cost.
pub fn trade_profit(pool: &Pool, p_star: f64, direction: Direction, q: f64) -> f64 {
    let out = swap_output(pool, direction, q);
    match direction {
        Direction::Plus => out - p_star * q,
        Direction::Minus => p_star * out - q,
    }
}

pub fn apply_swap(pool: &Pool, direction: Direction, q: f64) -> Result<Pool> {
    ensure_positive("q", q)?;
    let out = swap_output(pool, direction, q);
    let next = match direction {
        Direction::Plus => Pool {
            reserve_x: pool.reserve_x + q,
            reserve_y: pool.reserve_y - out,
            ..*pool
        },
        Direction::Minus => Pool {
            reserve_x: pool.reserve_x - out,
            reserve_y: pool.reserve_y + q,
            ..*pool
        },
    };
    next.validate()?;
    Ok(next)
}

/// Log-gap radius inside which no corrective trade is profitable.
///
/// Without a fixed cost this is exactly `-ln eta`. With a cost, each
/// direction's break-even gap is located by bisection on `[-ln eta, 10]`
/// and the larger of the two is returned.
pub fn no_trade_radius(pool: &Pool, cost: ExecCost) -> Result<f64> {
    ensure_nonneg("c_f", cost.c_f)?;
    let fee_band = -pool.eta.ln();
    if cost.c_f == 0.0 {
        return Ok(fee_band);
    }
    let price = pool.price();
    let mut radius = fee_band;
    for direction in [Direction::Plus, Direction::Minus] {
        // Plus corrects a pool priced above the reference, so the reference
        // sits at P * e^{-g}; Minus is the mirror case.
        let reference = |g: f64| match direction {
            Direction::Plus => price * (-g).exp(),
            Direction::Minus => price * g.exp(),
        };
        let h = |g: f64| {
            directional_profit(pool, reference(g), direction, cost).unwrap_or(f64::NAN)
        };
        let root = bisect(h, fee_band, RADIUS_BRACKET, RADIUS_XTOL, RADIUS_MAX_ITER)
            .ok_or(Error::RootNotBracketed { limit: RADIUS_BRACKET })?;
        radius = radius.max(root.x);
    }
    Ok(radius)
}

/// Most profitable corrective trade, or `None` when neither direction
/// clears the fixed cost.
pub fn best_arb(pool: &Pool, p_star: f64, cost: ExecCost) -> Result<Option<Arb>> {
    ensure_positive("p_star", p_star)?;
    let mut best: Option<Arb> = None;
    for direction in [Direction::Plus, Direction::Minus] {
        let profit = directional_profit(pool, p_star, direction, cost)?;
        if profit > 0.0 && best.is_none_or(|b| profit > b.profit) {
            let q = optimal_input(pool, p_star, direction)?;
            if q > 0.0 {
                best = Some(Arb { direction, q, profit });
            }
        }
    }
    Ok(best)
}

/// Local liquidity proxy `sqrt(x y)`.
pub fn liquidity_proxy(pool: &Pool) -> f64 {
    (pool.reserve_x * pool.reserve_y).sqrt()
}
