//! Drift certificates for the tracking error.
//!
//! With Lyapunov function `V(x) = exp(alpha |x|)`, a block that delivers
//! at least `lambda (|x| - gamma_bar)` of correction with probability `p`
//! whenever `|x| >= R` contracts `V` by the local rate
//!
//! ```text
//! rho(R, alpha) = M_w(alpha) * ((1 - p) + p * exp(alpha * lambda * (gamma_bar - R)))
//! ```
//!
//! where `M_w(alpha) = E[exp(alpha |w|)]`. A rate below one certifies
//! contraction in exponential moment. [`certify`] minimises the rate over
//! `alpha`; the remaining functions are runtime-checkable one-step bounds on
//! the excess `e = (|x| - gamma_bar)_+`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_nonneg, ensure_positive, Error, Result};
use crate::solve::golden_section;
use crate::stochastic::{mgf_abs, DisturbanceSpec};

/// Tolerance of [`check_excess_recursion`].
pub const EXCESS_RECURSION_TOL: f64 = 1e-12;

/// Alpha cap for unbounded-exponent laws, in units of the law's widest scale.
pub const GAUSSIAN_ALPHA_CAP: f64 = 20.0;

/// Fraction of the exponent supremum searched for bounded-exponent laws.
pub const BOUNDED_ALPHA_FRACTION: f64 = 0.99;

/// Large-error service law: with probability at least `p` a block removes
/// at least a share `lambda` of the excess.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServicePair {
    pub lambda: f64,
    pub p: f64,
}

impl ServicePair {
    /// `lambda` must lie in `(0, 1]`; `p` in `[0, 1]` so the no-service
    /// limit stays representable.
    pub fn new(lambda: f64, p: f64) -> Result<Self> {
        let pair = ServicePair { lambda, p };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::invalid("lambda", format!("expected 0 < lambda <= 1, got {}", self.lambda)));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid("p", format!("expected 0 <= p <= 1, got {}", self.p)));
        }
        Ok(())
    }

    /// Effective correction strength `lambda * p`.
    pub fn strength(&self) -> f64 {
        self.lambda * self.p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub alpha_star: f64,
    pub rho_star: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub gamma_bar: f64,
    pub certified: bool,
    /// `exp(alpha R) M_w(alpha)`, the compact-set constant.
    #[serde(rename = "B_bound")]
    pub b_bound: f64,
}

/// Local rate for a known disturbance moment `mgf = M_w(alpha)`.
pub fn rho_from_moment(mgf: f64, pair: ServicePair, gamma_bar: f64, radius: f64, alpha: f64) -> f64 {
    mgf * ((1.0 - pair.p) + pair.p * (alpha * pair.lambda * (gamma_bar - radius)).exp())
}

fn check_geometry(gamma_bar: f64, radius: f64) -> Result<()> {
    ensure_nonneg("gamma_bar", gamma_bar)?;
    if !(radius.is_finite() && radius > gamma_bar) {
        return Err(Error::invalid(
            "R",
            format!("expected a finite R > gamma_bar = {gamma_bar}, got {radius}"),
        ));
    }
    Ok(())
}

pub fn rho_local(
    pair: ServicePair,
    gamma_bar: f64,
    radius: f64,
    alpha: f64,
    spec: &DisturbanceSpec,
) -> Result<f64> {
    pair.validate()?;
    check_geometry(gamma_bar, radius)?;
    ensure_positive("alpha", alpha)?;
    let m = mgf_abs(spec, alpha)?;
    Ok(rho_from_moment(m, pair, gamma_bar, radius, alpha))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CertifyOptions {
    /// Overrides the upper end of the alpha search interval.
    pub alpha_cap: Option<f64>,
}

/// Upper end of the alpha search: just below the exponent supremum for
/// bounded laws, `20 / scale` for Gaussian kinds, and `20 / (R - gamma_bar)`
/// for the noiseless law.
pub fn alpha_search_cap(spec: &DisturbanceSpec, gamma_bar: f64, radius: f64) -> f64 {
    let limit = spec.exponent_supremum();
    if limit.is_finite() {
        BOUNDED_ALPHA_FRACTION * limit
    } else {
        match spec.max_scale() {
            Some(scale) => GAUSSIAN_ALPHA_CAP / scale,
            None => GAUSSIAN_ALPHA_CAP / (radius - gamma_bar),
        }
    }
}

pub fn certify(pair: ServicePair, gamma_bar: f64, radius: f64, spec: &DisturbanceSpec) -> Result<Certificate> {
    certify_with(pair, gamma_bar, radius, spec, CertifyOptions::default())
}

pub fn certify_with(
    pair: ServicePair,
    gamma_bar: f64,
    radius: f64,
    spec: &DisturbanceSpec,
    options: CertifyOptions,
) -> Result<Certificate> {
    pair.validate()?;
    check_geometry(gamma_bar, radius)?;
    spec.validate()?;
    let hi = match options.alpha_cap {
        Some(cap) => ensure_positive("alpha_cap", cap)?.min(alpha_search_cap(spec, gamma_bar, radius)),
        None => alpha_search_cap(spec, gamma_bar, radius),
    };
    let rho = |alpha: f64| {
        mgf_abs(spec, alpha)
            .map(|m| rho_from_moment(m, pair, gamma_bar, radius, alpha))
            .unwrap_or(f64::INFINITY)
    };
    let xtol = hi * 1e-12;
    let best = golden_section(rho, 0.0, hi, xtol, 500);
    // A minimum at the origin is reported at the smallest resolved exponent.
    let alpha_star = best.x.max(xtol);
    let rho_star = rho(alpha_star);
    let b_bound = (alpha_star * radius).exp() * mgf_abs(spec, alpha_star)?;
    Ok(Certificate {
        alpha_star,
        rho_star,
        radius,
        gamma_bar,
        certified: rho_star < 1.0,
        b_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionCell {
    pub lambda: f64,
    pub p: f64,
    pub rho_star: f64,
    pub certified: bool,
    /// True when a grid neighbour sits on the other side of `rho = 1`.
    pub on_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionMap {
    /// Row-major over `(lambda, p)`: index `i * p_grid.len() + j`.
    pub cells: Vec<ContractionCell>,
    /// Points on the `rho = 1` level set, linearly interpolated between
    /// neighbouring cells whose rates straddle one.
    pub boundary: Vec<(f64, f64)>,
}

/// Certifies every `(lambda, p)` cell of a rectangular grid and traces the
/// `rho* = 1` contour.
pub fn contraction_boundary(
    lambda_grid: &[f64],
    p_grid: &[f64],
    gamma_bar: f64,
    radius: f64,
    spec: &DisturbanceSpec,
) -> Result<ContractionMap> {
    if lambda_grid.is_empty() || p_grid.is_empty() {
        return Err(Error::invalid("grid", "lambda and p grids must be nonempty"));
    }
    let (nl, np) = (lambda_grid.len(), p_grid.len());
    let rhos: Vec<f64> = (0..nl * np)
        .into_par_iter()
        .map(|k| {
            let pair = ServicePair::new(lambda_grid[k / np], p_grid[k % np])?;
            certify(pair, gamma_bar, radius, spec).map(|c| c.rho_star)
        })
        .collect::<Result<_>>()?;

    let at = |i: usize, j: usize| rhos[i * np + j];
    let above = |i: usize, j: usize| at(i, j) >= 1.0;
    let mut cells = Vec::with_capacity(nl * np);
    let mut boundary = Vec::new();
    for i in 0..nl {
        for j in 0..np {
            let mut neighbours = Vec::new();
            if i > 0 {
                neighbours.push((i - 1, j));
            }
            if i + 1 < nl {
                neighbours.push((i + 1, j));
            }
            if j > 0 {
                neighbours.push((i, j - 1));
            }
            if j + 1 < np {
                neighbours.push((i, j + 1));
            }
            let on_boundary = neighbours.iter().any(|&(a, b)| above(a, b) != above(i, j));
            cells.push(ContractionCell {
                lambda: lambda_grid[i],
                p: p_grid[j],
                rho_star: at(i, j),
                certified: at(i, j) < 1.0,
                on_boundary,
            });
            // each crossing is emitted once, from its lower-index end
            for (a, b) in [(i + 1, j), (i, j + 1)] {
                if a < nl && b < np && above(a, b) != above(i, j) {
                    let (r0, r1) = (at(i, j), at(a, b));
                    let t = if r1 != r0 { ((1.0 - r0) / (r1 - r0)).clamp(0.0, 1.0) } else { 0.5 };
                    let lam = lambda_grid[i] + t * (lambda_grid[a] - lambda_grid[i]);
                    let p = p_grid[j] + t * (p_grid[b] - p_grid[j]);
                    boundary.push((lam, p));
                }
            }
        }
    }
    Ok(ContractionMap { cells, boundary })
}

/// One-step excess bound `e_next <= (e_n - C_n)_+ + |w_next|`.
pub fn check_excess_recursion(e_n: f64, c_n: f64, w_next: f64, e_next: f64) -> bool {
    e_next <= (e_n - c_n).max(0.0) + w_next.abs() + EXCESS_RECURSION_TOL
}

/// Conditional mean bound `(1 - lambda p) e + mu_w` on the next excess,
/// valid above the large-error threshold.
pub fn mean_excess_bound(pair: ServicePair, e: f64, mu_w: f64) -> f64 {
    (1.0 - pair.lambda * pair.p) * e + mu_w
}
