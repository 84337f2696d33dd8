//! Disturbance laws for the reference innovation `w`.
//!
//! Every law here has a continuous, strictly positive density (except the
//! degenerate [`DisturbanceSpec::Zero`], kept for noiseless test scenarios)
//! and a finite exponential moment `E[exp(alpha |w|)]` on a neighbourhood
//! of zero.
//!
//! Randomness comes from [`RngStream`], a ChaCha8 generator keyed by a
//! `(seed, stream_id)` pair. ChaCha is a counter-mode cipher, so a given key
//! yields the same sequence on every platform, and distinct stream ids give
//! independent sequences under the same seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{ensure_nonneg, ensure_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisturbanceSpec {
    /// Point mass at zero.
    Zero,
    Gaussian {
        sigma: f64,
    },
    /// Laplace law with scale `b` (mean absolute value `b`).
    Laplace {
        scale: f64,
    },
    /// `Normal(0, sigma^2)` with probability `1 - shock_prob`, otherwise
    /// `Normal(0, (shock_scale * sigma)^2)`.
    GaussianWithShocks {
        sigma: f64,
        shock_prob: f64,
        shock_scale: f64,
    },
}

impl DisturbanceSpec {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        let spec = DisturbanceSpec::Gaussian { sigma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn laplace(scale: f64) -> Result<Self> {
        let spec = DisturbanceSpec::Laplace { scale };
        spec.validate()?;
        Ok(spec)
    }

    pub fn gaussian_with_shocks(sigma: f64, shock_prob: f64, shock_scale: f64) -> Result<Self> {
        let spec = DisturbanceSpec::GaussianWithShocks {
            sigma,
            shock_prob,
            shock_scale,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DisturbanceSpec::Zero => Ok(()),
            DisturbanceSpec::Gaussian { sigma } => ensure_positive("sigma", sigma).map(drop),
            DisturbanceSpec::Laplace { scale } => ensure_positive("scale", scale).map(drop),
            DisturbanceSpec::GaussianWithShocks {
                sigma,
                shock_prob,
                shock_scale,
            } => {
                ensure_positive("sigma", sigma)?;
                ensure_positive("shock_scale", shock_scale)?;
                if !(0.0..=1.0).contains(&shock_prob) {
                    return Err(Error::invalid(
                        "shock_prob",
                        format!("expected a probability in [0, 1], got {shock_prob}"),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Supremum of the exponents at which `E[exp(alpha |w|)]` is finite.
    pub fn exponent_supremum(&self) -> f64 {
        match *self {
            DisturbanceSpec::Laplace { scale } => 1.0 / scale,
            _ => f64::INFINITY,
        }
    }

    /// Widest scale parameter among the law's components; `None` for `Zero`.
    pub fn max_scale(&self) -> Option<f64> {
        match *self {
            DisturbanceSpec::Zero => None,
            DisturbanceSpec::Gaussian { sigma } => Some(sigma),
            DisturbanceSpec::Laplace { scale } => Some(scale),
            DisturbanceSpec::GaussianWithShocks {
                sigma,
                shock_prob,
                shock_scale,
            } => Some(if shock_prob > 0.0 {
                sigma * shock_scale.max(1.0)
            } else {
                sigma
            }),
        }
    }
}

/// Seeded random stream identified by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `(0, 1)`.
    pub fn uniform_open(&mut self) -> f64 {
        self.rng.sample(Open01)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

/// One draw of the innovation.
pub fn sample(spec: &DisturbanceSpec, rng: &mut RngStream) -> f64 {
    match *spec {
        DisturbanceSpec::Zero => 0.0,
        DisturbanceSpec::Gaussian { sigma } => sigma * rng.standard_normal(),
        DisturbanceSpec::Laplace { scale } => {
            let u = rng.uniform_open() - 0.5;
            -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
        }
        DisturbanceSpec::GaussianWithShocks {
            sigma,
            shock_prob,
            shock_scale,
        } => {
            let shocked = rng.uniform() < shock_prob;
            let s = if shocked { sigma * shock_scale } else { sigma };
            s * rng.standard_normal()
        }
    }
}

/// Standard normal CDF.
pub fn normal_cdf(v: f64) -> f64 {
    0.5 * erfc(-v / std::f64::consts::SQRT_2)
}

/// `E[exp(alpha |w|)]` for `w ~ Normal(0, sigma^2)`.
fn gaussian_abs_mgf(sigma: f64, alpha: f64) -> f64 {
    let a = alpha * sigma;
    2.0 * (0.5 * a * a).exp() * normal_cdf(a)
}

/// `E[exp(alpha |w|)]`, the disturbance moment entering the drift bounds.
pub fn mgf_abs(spec: &DisturbanceSpec, alpha: f64) -> Result<f64> {
    ensure_nonneg("alpha", alpha)?;
    let limit = spec.exponent_supremum();
    if alpha >= limit {
        return Err(Error::MgfDivergence { alpha, limit });
    }
    Ok(match *spec {
        DisturbanceSpec::Zero => 1.0,
        DisturbanceSpec::Gaussian { sigma } => gaussian_abs_mgf(sigma, alpha),
        DisturbanceSpec::Laplace { scale } => 1.0 / (1.0 - alpha * scale),
        DisturbanceSpec::GaussianWithShocks {
            sigma,
            shock_prob,
            shock_scale,
        } => {
            (1.0 - shock_prob) * gaussian_abs_mgf(sigma, alpha)
                + shock_prob * gaussian_abs_mgf(sigma * shock_scale, alpha)
        }
    })
}

/// Monte Carlo estimate of [`mgf_abs`] with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub draws: usize,
}

pub fn mgf_abs_monte_carlo(
    spec: &DisturbanceSpec,
    alpha: f64,
    draws: usize,
    rng: &mut RngStream,
) -> Result<McEstimate> {
    ensure_nonneg("alpha", alpha)?;
    if draws < 2 {
        return Err(Error::invalid("draws", "need at least two draws"));
    }
    let samples: Vec<f64> = (0..draws).map(|_| sample(spec, rng)).collect();
    Ok(mgf_from_draws(&samples, alpha))
}

/// Monte Carlo moment from a fixed set of draws, so several exponents can
/// share one sample.
pub fn mgf_from_draws(draws: &[f64], alpha: f64) -> McEstimate {
    let n = draws.len() as f64;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for w in draws {
        let v = (alpha * w.abs()).exp();
        sum += v;
        sum_sq += v * v;
    }
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    McEstimate {
        mean,
        std_error: (var / n).sqrt(),
        draws: draws.len(),
    }
}

/// `E[|w|]`.
pub fn mean_abs(spec: &DisturbanceSpec) -> f64 {
    let half_normal = (2.0 / std::f64::consts::PI).sqrt();
    match *spec {
        DisturbanceSpec::Zero => 0.0,
        DisturbanceSpec::Gaussian { sigma } => sigma * half_normal,
        DisturbanceSpec::Laplace { scale } => scale,
        DisturbanceSpec::GaussianWithShocks {
            sigma,
            shock_prob,
            shock_scale,
        } => sigma * half_normal * ((1.0 - shock_prob) + shock_prob * shock_scale),
    }
}
