//! Tracking loop with an explicit constant-product pool.
//!
//! Each block the arbitrageur takes the most profitable corrective trade
//! against the current reference price, if any clears the fixed cost; the
//! reference then moves by one disturbance draw. Gaps are measured as
//! `ln P_ref - ln P_amm`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BlockRecord, SimSummary, SimTrace, SummaryBuilder, TradeRecord, DISTURBANCE_STREAM};
use crate::cpmm::{apply_swap, best_arb, no_trade_radius, pool_log_price, ExecCost, Pool};
use crate::error::{ensure_positive, Error, Result};
use crate::execution::{excess, SERVICE_BOUND_TOL};
use crate::stability::check_excess_recursion;
use crate::stochastic::{sample, DisturbanceSpec, RngStream};
use crate::types::step;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechScenario {
    pub pool0: Pool,
    pub cost: ExecCost,
    /// Multiplier applied to both initial reserves.
    pub depth_scale: f64,
    pub disturbance: DisturbanceSpec,
    pub horizon: u64,
    pub seed: u64,
}

impl MechScenario {
    /// 30 bp pool with 10 000 units of each asset and a fixed cost of 0.12
    /// numeraire units per trade. Defaults of this crate.
    pub fn baseline() -> Self {
        MechScenario {
            pool0: Pool {
                reserve_x: 10_000.0,
                reserve_y: 10_000.0,
                eta: 0.997,
            },
            cost: ExecCost { c_f: 0.12 },
            depth_scale: 1.0,
            disturbance: DisturbanceSpec::GaussianWithShocks {
                sigma: 2e-3,
                shock_prob: 0.01,
                shock_scale: 10.0,
            },
            horizon: 10_000,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pool0.validate()?;
        ExecCost::new(self.cost.c_f)?;
        ensure_positive("depth_scale", self.depth_scale)?;
        if self.horizon == 0 {
            return Err(Error::invalid("horizon", "must be at least one block"));
        }
        self.disturbance.validate()
    }

    pub fn initial_pool(&self) -> Result<Pool> {
        self.pool0.scaled(self.depth_scale)
    }

    /// No-trade radius of the initial pool.
    pub fn radius(&self) -> Result<f64> {
        no_trade_radius(&self.initial_pool()?, self.cost)
    }
}

pub fn run_mechanism(sc: &MechScenario) -> Result<(SimTrace, SimSummary)> {
    simulate(sc, true)
}

fn simulate(sc: &MechScenario, keep_trace: bool) -> Result<(SimTrace, SimSummary)> {
    sc.validate()?;
    let mut pool = sc.initial_pool()?;
    let fee_band = -pool.eta.ln();
    let radius = no_trade_radius(&pool, sc.cost)?;
    let mut noise = RngStream::new(sc.seed, DISTURBANCE_STREAM);
    let mut summary = SummaryBuilder::new(radius, sc.horizon, true);
    let mut records = Vec::with_capacity(if keep_trace { sc.horizon as usize } else { 0 });

    let violation = |block: u64, what: String| Error::InvariantViolation { block, what };
    let mut reference = pool_log_price(&pool);
    for block in 0..sc.horizon {
        let x = reference - pool_log_price(&pool);
        let arb = best_arb(&pool, reference.exp(), sc.cost)?;
        if let Some(a) = arb {
            pool = apply_swap(&pool, a.direction, a.q)?;
        }
        let z = reference - pool_log_price(&pool);
        let correction = x.abs() - z.abs();
        let tol = SERVICE_BOUND_TOL * x.abs().max(1.0);
        if correction < -tol {
            return Err(violation(block, format!("trade widened the gap: x = {x}, z = {z}")));
        }
        // a trade stops at the fee band edge, on the same side of zero
        if arb.is_some() && (z * x < 0.0 || excess(z, fee_band) > tol) {
            return Err(violation(block, format!("trade left the fee band: x = {x}, z = {z}")));
        }

        let w = sample(&sc.disturbance, &mut noise);
        let x_next = step(z, w);
        let (e, e_next) = (excess(x, fee_band), excess(x_next, fee_band));
        if !check_excess_recursion(e, correction.max(0.0), w, e_next) {
            return Err(violation(block, format!("excess recursion fails: e = {e}, e_next = {e_next}")));
        }

        summary.push(x, arb.is_some());
        if keep_trace {
            records.push(BlockRecord {
                block,
                x,
                z,
                correction,
                w_next: w,
                reference_log_price: reference,
                amm_log_price: pool_log_price(&pool),
                reserves: Some((pool.reserve_x, pool.reserve_y)),
                trade: arb.map(|a| TradeRecord {
                    direction: a.direction,
                    q: a.q,
                    profit: a.profit,
                }),
            });
        }
        reference += w;
    }
    Ok((SimTrace { records }, summary.finish()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechSweep {
    pub depth_grid: Vec<f64>,
    pub cost_grid: Vec<f64>,
    /// Row-major over `(depth, cost)`.
    pub cells: Vec<SimSummary>,
    /// Initial no-trade radius of each cell, same layout.
    pub radii: Vec<f64>,
}

impl MechSweep {
    pub fn at(&self, i: usize, j: usize) -> &SimSummary {
        &self.cells[i * self.cost_grid.len() + j]
    }

    pub fn radius_at(&self, i: usize, j: usize) -> f64 {
        self.radii[i * self.cost_grid.len() + j]
    }
}

/// Mean absolute gap over a depth by cost grid, every cell on the same
/// reference path.
pub fn sweep_mechanism(base: &MechScenario, depth_grid: &[f64], cost_grid: &[f64]) -> Result<MechSweep> {
    if depth_grid.is_empty() || cost_grid.is_empty() {
        return Err(Error::invalid("grid", "depth and cost grids must be nonempty"));
    }
    let nc = cost_grid.len();
    let out = (0..depth_grid.len() * nc)
        .into_par_iter()
        .map(|k| {
            let sc = MechScenario {
                depth_scale: depth_grid[k / nc],
                cost: ExecCost::new(cost_grid[k % nc])?,
                ..*base
            };
            let (_, summary) = simulate(&sc, false)?;
            Ok((summary, sc.radius()?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (cells, radii) = out.into_iter().unzip();
    Ok(MechSweep {
        depth_grid: depth_grid.to_vec(),
        cost_grid: cost_grid.to_vec(),
        cells,
        radii,
    })
}
