//! Negative binomial distribution parameterised by its mean `lambda` and its
//! over-dispersion index `theta`.
//!
//! ```text
//! Pr(X = k) = Γ(λ/θ + k) / (Γ(λ/θ) k!) · (1/(1+θ))^(λ/θ) · (θ/(1+θ))^k
//! E[X] = λ,  V[X] = λ(θ + 1)
//! ```
//!
//! Sampling uses the Gamma–Poisson mixture: a rate is drawn from
//! `Gamma(shape = λ/θ, scale = θ)` and the count from `Poisson(rate)`.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use statrs::function::gamma::ln_gamma;

use crate::error::{ForecastError, Result};

/// Lower bound applied to `theta` wherever upstream code could drive it to zero.
pub const THETA_FLOOR: f64 = 1e-6;

/// Lower bound applied to a mean before it is handed to the distribution.
pub const LAMBDA_FLOOR: f64 = 1e-9;

/// Counts up to this size use a direct product for `ln Γ(r + k) − ln Γ(r)`.
const RISING_DIRECT_MAX: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NbParams {
    lambda: f64,
    theta: f64,
}

impl NbParams {
    pub fn new(lambda: f64, theta: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(ForecastError::invalid(format!(
                "lambda must be finite and > 0, got {lambda}"
            )));
        }
        if !theta.is_finite() || theta <= 0.0 {
            return Err(ForecastError::invalid(format!(
                "theta must be finite and > 0, got {theta}"
            )));
        }
        Ok(Self { lambda, theta })
    }

    /// Builds parameters after applying [`LAMBDA_FLOOR`] and [`THETA_FLOOR`].
    /// Non-finite inputs are still rejected.
    pub fn floored(lambda: f64, theta: f64) -> Result<Self> {
        if lambda.is_nan() || theta.is_nan() {
            return Err(ForecastError::invalid("NaN distribution parameter"));
        }
        Self::new(lambda.max(LAMBDA_FLOOR), theta.max(THETA_FLOOR))
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Gamma shape `λ/θ` of the mixing distribution.
    pub fn shape(&self) -> f64 {
        self.lambda / self.theta
    }

    pub fn log_pmf(&self, k: u64) -> f64 {
        let r = self.shape();
        let kf = k as f64;
        ln_rising(r, k) - ln_factorial(k) - r * self.theta.ln_1p() - kf * self.theta.recip().ln_1p()
    }

    pub fn pmf(&self, k: u64) -> f64 {
        self.log_pmf(k).exp()
    }

    /// `(mean, variance) = (λ, λ(θ + 1))`.
    pub fn moments(&self) -> (f64, f64) {
        (self.lambda, self.lambda * (self.theta + 1.0))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        // Parameters were validated at construction, so both constructors succeed
        // except for a degenerate zero rate, which yields a zero count.
        let gamma = match Gamma::new(self.shape(), self.theta) {
            Ok(g) => g,
            Err(_) => return 0,
        };
        let rate: f64 = gamma.sample(rng);
        if !(rate > 0.0) {
            return 0;
        }
        match Poisson::new(rate) {
            Ok(p) => {
                let draw: f64 = p.sample(rng);
                draw as u64
            }
            Err(_) => 0,
        }
    }
}

/// `ln Γ(r + k) − ln Γ(r)` for `r > 0`.
///
/// Small `k` use the product `r (r+1) … (r+k−1)`, which avoids the
/// cancellation between two large log-gamma values when `r` is large.
pub(crate) fn ln_rising(r: f64, k: u64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if k <= RISING_DIRECT_MAX {
        let mut acc = 0.0;
        let mut prod = 1.0;
        for j in 0..k {
            prod *= r + j as f64;
            if prod > 1e250 {
                acc += prod.ln();
                prod = 1.0;
            }
        }
        return acc + prod.ln();
    }
    ln_gamma(r + k as f64) - ln_gamma(r)
}

pub(crate) fn ln_factorial(k: u64) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

pub fn nb_log_pmf(k: u64, params: NbParams) -> f64 {
    params.log_pmf(k)
}

pub fn nb_pmf(k: u64, params: NbParams) -> f64 {
    params.pmf(k)
}

pub fn nb_moments(params: NbParams) -> (f64, f64) {
    params.moments()
}

pub fn nb_sample<R: Rng + ?Sized>(params: NbParams, rng: &mut R) -> u64 {
    params.sample(rng)
}
