//! Sequential block execution.
//!
//! Transactions are applied in list order against the residual gap. A
//! transaction succeeds iff it points along the residual (`s * R > 0`) and
//! the residual is at least `gamma + u`; a success removes exactly `u` from
//! the residual magnitude, a failure reverts and leaves it unchanged.

use crate::error::{ensure_finite, ensure_nonneg, Result};
use crate::types::{ArbList, BlockOutcome};

/// Absolute slack (scaled by `max(1, |x|)`) allowed when checking the
/// service bound, to absorb rounding in `|x| - u` versus `|x - s u|`.
pub const SERVICE_BOUND_TOL: f64 = 1e-12;

pub fn execute_block(x: f64, list: &ArbList) -> Result<BlockOutcome> {
    ensure_finite("x", x)?;
    let mut residual = x;
    let mut total = 0.0;
    let mut flags = Vec::with_capacity(list.len());
    let mut path = Vec::with_capacity(list.len() + 1);
    path.push(x);
    for tx in list.iter() {
        tx.validate()?;
        let ok = tx.s.sign() * residual > 0.0 && residual.abs() >= tx.gamma + tx.u;
        if ok {
            residual -= tx.s.sign() * tx.u;
            total += tx.u;
        }
        flags.push(ok);
        path.push(residual);
    }
    Ok(BlockOutcome {
        z: residual,
        total_correction: total,
        success_flags: flags,
        residual_path: path,
    })
}

/// Gap outside the dead zone, `(|x| - gamma_bar)_+`.
pub fn excess(x: f64, gamma_bar: f64) -> f64 {
    (x.abs() - gamma_bar).max(0.0)
}

/// Checks `(|z| - g)_+ <= ((|x| - g)_+ - C)_+` and `|z| <= |x|`.
///
/// The caller must pass a `gamma_bar` no smaller than every band in the
/// executed list; a `false` return then means the execution layer is broken.
pub fn check_service_bound(x: f64, outcome: &BlockOutcome, gamma_bar: f64) -> bool {
    if ensure_nonneg("gamma_bar", gamma_bar).is_err() {
        return false;
    }
    let tol = SERVICE_BOUND_TOL * x.abs().max(1.0);
    let lhs = excess(outcome.z, gamma_bar);
    let rhs = (excess(x, gamma_bar) - outcome.total_correction).max(0.0);
    lhs <= rhs + tol && outcome.z.abs() <= x.abs() + tol
}
