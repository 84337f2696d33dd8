//! Reduced tracking simulation driven by a large-error service law.
//!
//! Each block draws a service coin. Above the threshold `x_star` the coin
//! succeeds with probability `p` and then delivers `lambda * e` of
//! correction, where `e = (|x| - gamma_bar)_+`; a failed coin still delivers
//! the partial amount `U * lambda * e` with `U ~ Uniform[0, 1)`. Below the
//! threshold both `lambda` and `p` are scaled by `e / (x_star - gamma_bar)`.
//! The delivery is executed as a single transaction `(sign(x), C, gamma_bar)`
//! through [`execute_block`], so direction and band checks stay in force.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BlockRecord, SimSummary, SimTrace, SummaryBuilder, DISTURBANCE_STREAM, SERVICE_STREAM};
use crate::error::{ensure_finite, ensure_nonneg, Error, Result};
use crate::execution::{check_service_bound, excess, execute_block};
use crate::stability::{check_excess_recursion, ServicePair};
use crate::stochastic::{sample, DisturbanceSpec, RngStream};
use crate::types::{step, ArbList, ArbTx, Direction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedScenario {
    pub pair: ServicePair,
    /// Large-error threshold; must exceed `gamma_bar`.
    pub x_star: f64,
    pub gamma_bar: f64,
    pub disturbance: DisturbanceSpec,
    pub horizon: u64,
    pub seed: u64,
    /// Initial pre-execution gap.
    pub x0: f64,
}

impl ReducedScenario {
    /// Calibrated baseline: service pair `(0.50, 0.729)` and dead-zone cap
    /// `3.82e-4`. The threshold `x_star = 2e-3`, the shock process and the
    /// horizon are defaults of this crate, not calibrated values.
    pub fn baseline() -> Self {
        ReducedScenario {
            pair: ServicePair { lambda: 0.5, p: 0.729 },
            x_star: 2e-3,
            gamma_bar: 3.82e-4,
            disturbance: DisturbanceSpec::GaussianWithShocks {
                sigma: 2e-3,
                shock_prob: 0.01,
                shock_scale: 10.0,
            },
            horizon: 10_000,
            seed: 0,
            x0: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pair.validate()?;
        ensure_nonneg("gamma_bar", self.gamma_bar)?;
        ensure_finite("x_star", self.x_star)?;
        ensure_finite("x0", self.x0)?;
        if self.x_star <= self.gamma_bar {
            return Err(Error::invalid(
                "x_star",
                format!("threshold {} must exceed gamma_bar {}", self.x_star, self.gamma_bar),
            ));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon", "must be at least one block"));
        }
        self.disturbance.validate()
    }

    /// `(lambda, p)` in force at gap `x`.
    pub fn service_at(&self, x: f64) -> (f64, f64) {
        if x.abs() >= self.x_star {
            (self.pair.lambda, self.pair.p)
        } else {
            let f = excess(x, self.gamma_bar) / (self.x_star - self.gamma_bar);
            (self.pair.lambda * f, self.pair.p * f)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceLevel {
    Strong,
    Baseline,
    Weak,
}

impl std::str::FromStr for ServiceLevel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "strong" => Ok(ServiceLevel::Strong),
            "baseline" => Ok(ServiceLevel::Baseline),
            "weak" => Ok(ServiceLevel::Weak),
            other => Err(format!("unknown service level `{other}` (strong | baseline | weak)")),
        }
    }
}

/// Shift applied to `(lambda, p)` for the strong and weak scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftSizes {
    pub lambda: f64,
    pub p: f64,
    /// Lower clip applied to the weak scenario.
    pub floor: f64,
}

impl Default for ShiftSizes {
    fn default() -> Self {
        ShiftSizes {
            lambda: 0.20,
            p: 0.15,
            floor: 0.05,
        }
    }
}

pub fn scenario_shift(base: &ReducedScenario, level: ServiceLevel) -> ReducedScenario {
    scenario_shift_by(base, level, ShiftSizes::default())
}

pub fn scenario_shift_by(base: &ReducedScenario, level: ServiceLevel, shift: ShiftSizes) -> ReducedScenario {
    let ServicePair { lambda, p } = base.pair;
    let pair = match level {
        ServiceLevel::Baseline => base.pair,
        ServiceLevel::Strong => ServicePair {
            lambda: (lambda + shift.lambda).clamp(f64::MIN_POSITIVE, 1.0),
            p: (p + shift.p).clamp(f64::MIN_POSITIVE, 1.0),
        },
        ServiceLevel::Weak => ServicePair {
            lambda: (lambda - shift.lambda).clamp(shift.floor, 1.0),
            p: (p - shift.p).clamp(shift.floor, 1.0),
        },
    };
    ReducedScenario { pair, ..*base }
}

/// Single corrective transaction of size `target`, trimmed so that
/// `gamma_bar + u <= |x|` survives rounding.
fn service_tx(x: f64, target: f64, gamma_bar: f64) -> Option<ArbTx> {
    let s = Direction::of(x)?;
    let mut u = target.min(x.abs() - gamma_bar);
    while u > 0.0 && gamma_bar + u > x.abs() {
        u = u.next_down();
    }
    (u > 0.0).then_some(ArbTx { s, u, gamma: gamma_bar })
}

pub(crate) fn simulate(
    sc: &ReducedScenario,
    service_stream: u64,
    keep_trace: bool,
) -> Result<(SimTrace, SimSummary)> {
    sc.validate()?;
    let mut noise = RngStream::new(sc.seed, DISTURBANCE_STREAM);
    let mut service = RngStream::new(sc.seed, service_stream);
    let mut summary = SummaryBuilder::new(sc.gamma_bar, sc.horizon, false);
    let mut records = Vec::with_capacity(if keep_trace { sc.horizon as usize } else { 0 });

    let violation = |block: u64, what: String| Error::InvariantViolation { block, what };
    let mut x = sc.x0;
    let mut reference = sc.x0;
    for block in 0..sc.horizon {
        let e = excess(x, sc.gamma_bar);
        let (lambda, p) = sc.service_at(x);
        let coin = service.uniform();
        let partial = service.uniform();
        let served = coin < p;
        let target = if served { lambda * e } else { partial * lambda * e };

        let list = match service_tx(x, target, sc.gamma_bar) {
            Some(tx) => ArbList(vec![tx]),
            None => ArbList::empty(),
        };
        let outcome = execute_block(x, &list)?;
        if served && x.abs() >= sc.x_star && !outcome.success_flags.iter().all(|&ok| ok) {
            return Err(violation(block, format!("served large-error block reverted at x = {x}")));
        }
        if !check_service_bound(x, &outcome, sc.gamma_bar) {
            return Err(violation(block, format!("service bound fails: x = {x}, z = {}", outcome.z)));
        }

        let w = sample(&sc.disturbance, &mut noise);
        let x_next = step(outcome.z, w);
        let e_next = excess(x_next, sc.gamma_bar);
        if !check_excess_recursion(e, outcome.total_correction, w, e_next) {
            return Err(violation(block, format!("excess recursion fails: e = {e}, e_next = {e_next}")));
        }

        summary.push(x, false);
        if keep_trace {
            records.push(BlockRecord {
                block,
                x,
                z: outcome.z,
                correction: outcome.total_correction,
                w_next: w,
                reference_log_price: reference,
                amm_log_price: reference - outcome.z,
                reserves: None,
                trade: None,
            });
        }
        reference += w;
        x = x_next;
    }
    Ok((SimTrace { records }, summary.finish()))
}

pub fn run_reduced(sc: &ReducedScenario) -> Result<(SimTrace, SimSummary)> {
    simulate(sc, SERVICE_STREAM, true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedSweep {
    pub lambda_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    /// Row-major over `(lambda, p)`: index `i * p_grid.len() + j`.
    pub cells: Vec<SimSummary>,
}

impl ReducedSweep {
    pub fn at(&self, i: usize, j: usize) -> &SimSummary {
        &self.cells[i * self.p_grid.len() + j]
    }
}

/// Mean-excess surface over a `(lambda, p)` grid. All cells share the
/// disturbance path; cell `k` draws its service coins from stream
/// `SERVICE_STREAM + k`.
pub fn sweep_reduced(base: &ReducedScenario, lambda_grid: &[f64], p_grid: &[f64]) -> Result<ReducedSweep> {
    if lambda_grid.is_empty() || p_grid.is_empty() {
        return Err(Error::invalid("grid", "lambda and p grids must be nonempty"));
    }
    let np = p_grid.len();
    let cells = (0..lambda_grid.len() * np)
        .into_par_iter()
        .map(|k| {
            let pair = ServicePair::new(lambda_grid[k / np], p_grid[k % np])?;
            if pair.p == 0.0 {
                return Err(Error::invalid("p", "sweep grid values must lie in (0, 1]"));
            }
            let sc = ReducedScenario { pair, ..*base };
            simulate(&sc, SERVICE_STREAM + k as u64, false).map(|(_, s)| s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReducedSweep {
        lambda_grid: lambda_grid.to_vec(),
        p_grid: p_grid.to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::PairedDiff;

    #[test]
    fn full_service_clears_gap_in_one_block() {
        let sc = ReducedScenario {
            pair: ServicePair::new(1.0, 1.0).unwrap(),
            x_star: 0.5,
            gamma_bar: 0.0,
            disturbance: DisturbanceSpec::Zero,
            horizon: 20,
            seed: 3,
            x0: 1.0,
        };
        let (trace, summary) = run_reduced(&sc).unwrap();
        assert_eq!(trace.records[0].x, 1.0);
        assert_eq!(trace.records[0].z, 0.0);
        assert!(trace.records[1..].iter().all(|r| r.x == 0.0 && r.z == 0.0));
        assert!((summary.mean_excess - 1.0 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn no_service_probability_is_worse() {
        let base = ReducedScenario::baseline();
        let none = ReducedScenario {
            pair: ServicePair::new(base.pair.lambda, 0.0).unwrap(),
            ..base
        };
        let (_, with) = run_reduced(&base).unwrap();
        let (_, without) = run_reduced(&none).unwrap();
        assert!(without.mean_excess > with.mean_excess);
        assert!(!PairedDiff::between(&without, &with).not_worse(2.0));
    }

    #[test]
    fn shift_examples() {
        let base = ReducedScenario::baseline();
        let strong = scenario_shift(&base, ServiceLevel::Strong);
        assert!((strong.pair.lambda - 0.70).abs() < 1e-12);
        assert!((strong.pair.p - 0.879).abs() < 1e-12);
        assert_eq!(scenario_shift(&base, ServiceLevel::Baseline), base);
        let weak = scenario_shift(&base, ServiceLevel::Weak);
        assert!((weak.pair.lambda - 0.30).abs() < 1e-12);
        assert!((weak.pair.p - 0.579).abs() < 1e-12);

        let high = ReducedScenario {
            pair: ServicePair::new(0.9, 0.95).unwrap(),
            ..base
        };
        let s = scenario_shift(&high, ServiceLevel::Strong);
        assert_eq!((s.pair.lambda, s.pair.p), (1.0, 1.0));
        let low = ReducedScenario {
            pair: ServicePair::new(0.1, 0.1).unwrap(),
            ..base
        };
        let w = scenario_shift(&low, ServiceLevel::Weak);
        assert_eq!((w.pair.lambda, w.pair.p), (0.05, 0.05));
        let custom = ShiftSizes { lambda: 0.1, p: 0.1, floor: 0.05 };
        let s = scenario_shift_by(&base, ServiceLevel::Strong, custom);
        assert!((s.pair.lambda - 0.6).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_scenarios() {
        let base = ReducedScenario::baseline();
        assert!(run_reduced(&ReducedScenario { x_star: base.gamma_bar, ..base }).is_err());
        assert!(run_reduced(&ReducedScenario { horizon: 0, ..base }).is_err());
        assert!(run_reduced(&ReducedScenario { x0: f64::NAN, ..base }).is_err());
    }

    #[test]
    fn deterministic_traces() {
        let sc = ReducedScenario { seed: 11, horizon: 2_000, ..ReducedScenario::baseline() };
        let a = run_reduced(&sc).unwrap();
        let b = run_reduced(&sc).unwrap();
        assert_eq!(a, b);
        let c = run_reduced(&ReducedScenario { seed: 12, ..sc }).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn trace_prices_are_consistent() {
        let sc = ReducedScenario { seed: 5, horizon: 500, x0: 0.01, ..ReducedScenario::baseline() };
        let (trace, _) = run_reduced(&sc).unwrap();
        for w in trace.records.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            assert!((b.reference_log_price - (a.reference_log_price + a.w_next)).abs() < 1e-12);
            assert!((b.x - (a.z + a.w_next)).abs() < 1e-15);
            assert!((a.reference_log_price - a.amm_log_price - a.z).abs() < 1e-12);
        }
    }

    #[test]
    fn single_cell_sweep_matches_run() {
        let sc = ReducedScenario { seed: 9, horizon: 3_000, ..ReducedScenario::baseline() };
        let sweep = sweep_reduced(&sc, &[sc.pair.lambda], &[sc.pair.p]).unwrap();
        let (_, direct) = run_reduced(&sc).unwrap();
        assert_eq!(sweep.cells, vec![direct]);
        assert!(sweep_reduced(&sc, &[], &[0.5]).is_err());
    }

    #[test]
    fn service_tx_never_violates_band() {
        for &(x, g) in &[(0.3, 0.1), (0.30000000000000004, 0.1), (-0.7, 0.2), (1e-3, 3.82e-4)] {
            let tx = service_tx(x, f64::abs(x) - g, g).unwrap();
            assert!(tx.gamma + tx.u <= f64::abs(x));
        }
        assert!(service_tx(0.0, 1.0, 0.0).is_none());
        assert!(service_tx(0.1, 0.0, 0.0).is_none());
    }
}
