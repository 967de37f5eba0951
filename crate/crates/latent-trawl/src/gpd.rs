//! Generalised Pareto distribution in both parametrisations used by the model.
//!
//! The `(alpha, beta)` form has density `(α/β)(1 + x/β)^{-(α+1)}` on `x ≥ 0`
//! and corresponds to shape `ξ = 1/α`, scale `σ = β/α`. The `(ξ, σ)` form
//! admits `ξ ≤ 0` as well; `ξ = 0` is the exponential limit and `ξ < 0` has
//! bounded support `[0, -σ/ξ]`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Below this |shape| the exponential-limit branch is used.
pub const SHAPE_ZERO_EPS: f64 = 1e-8;

/// A generalised Pareto distribution on `x ≥ 0`, held as `(shape, scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gpd {
    shape: f64,
    scale: f64,
}

impl Gpd {
    /// From shape `ξ` (any real) and scale `σ > 0`.
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !shape.is_finite() {
            return Err(Error::InvalidParam(format!("GPD shape must be finite, got {shape}")));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParam(format!("GPD scale must be > 0, got {scale}")));
        }
        Ok(Self { shape, scale })
    }

    /// From the `(alpha, beta)` parametrisation, `alpha, beta > 0`.
    pub fn from_alpha_beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(beta > 0.0) {
            return Err(Error::InvalidParam(format!(
                "GPD alpha/beta must be > 0, got ({alpha}, {beta})"
            )));
        }
        Self::new(1.0 / alpha, beta / alpha)
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `(alpha, beta)` view; only defined for strictly positive shape.
    pub fn alpha_beta(&self) -> Option<(f64, f64)> {
        (self.shape > 0.0).then(|| (1.0 / self.shape, self.scale / self.shape))
    }

    /// Upper endpoint `-σ/ξ` of the support for negative shape.
    pub fn upper_endpoint(&self) -> Option<f64> {
        (self.shape < -SHAPE_ZERO_EPS).then(|| -self.scale / self.shape)
    }

    fn check_support(&self, x: f64) -> Result<()> {
        if !(x >= 0.0) {
            return Err(Error::InvalidInput(format!("GPD argument must be >= 0, got {x}")));
        }
        if let Some(end) = self.upper_endpoint() {
            // allow roundoff at the endpoint itself
            if x > end * (1.0 + 1e-12) {
                return Err(Error::InvalidInput(format!(
                    "GPD argument {x} above the upper endpoint {end}"
                )));
            }
        }
        Ok(())
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.check_support(x)?;
        let z = x / self.scale;
        if self.shape.abs() < SHAPE_ZERO_EPS {
            Ok((-z).exp() / self.scale)
        } else {
            let base = (1.0 + self.shape * z).max(0.0);
            Ok(base.powf(-(1.0 / self.shape + 1.0)) / self.scale)
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(1.0 - self.survivor(x)?)
    }

    /// `P(X > x)`; more accurate than `1 - cdf(x)` deep in the tail.
    pub fn survivor(&self, x: f64) -> Result<f64> {
        self.check_support(x)?;
        let z = x / self.scale;
        if self.shape.abs() < SHAPE_ZERO_EPS {
            Ok((-z).exp())
        } else {
            let base = (1.0 + self.shape * z).max(0.0);
            Ok(base.powf(-1.0 / self.shape))
        }
    }

    /// Exact inverse of the cdf on `[0, 1]`.
    ///
    /// `p = 1` is only admissible for bounded support (negative shape), where
    /// it returns the upper endpoint.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!("probability must be in [0,1], got {p}")));
        }
        if p == 1.0 {
            return self
                .upper_endpoint()
                .ok_or_else(|| Error::InvalidInput("quantile(1) is infinite for shape >= 0".into()));
        }
        if self.shape.abs() < SHAPE_ZERO_EPS {
            Ok(-self.scale * (1.0 - p).ln())
        } else {
            Ok(self.scale / self.shape * ((1.0 - p).powf(-self.shape) - 1.0))
        }
    }

    /// Mean `σ/(1-ξ)`; requires `ξ < 1`.
    pub fn mean(&self) -> Result<f64> {
        if self.shape >= 1.0 {
            return Err(Error::Undefined(format!(
                "GPD mean requires shape < 1, got {}",
                self.shape
            )));
        }
        Ok(self.scale / (1.0 - self.shape))
    }
}

/// Probability-weighted-moment estimate of a GPD from positive observations.
///
/// Uses the first two PWMs `a_s = E[X (1-F(X))^s]`: with the unbiased sample
/// versions, `ξ = (a0 - 4 a1)/(a0 - 2 a1)` and `σ = 2 a0 a1/(a0 - 2 a1)`.
/// Valid for `ξ < 1`; intended as a starting-value heuristic.
pub fn fit_pwm(values: &[f64]) -> Result<Gpd> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("PWM fit needs >= 2 values, got {n}")));
    }
    if values.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidInput("PWM fit needs strictly positive finite values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = n as f64;
    let a0 = sorted.iter().sum::<f64>() / nf;
    let a1 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| x * (nf - 1.0 - i as f64) / (nf - 1.0))
        .sum::<f64>()
        / nf;
    let denom = a0 - 2.0 * a1;
    if !(denom > 0.0) {
        return Err(Error::InvalidInput("degenerate sample for PWM GPD fit".into()));
    }
    Gpd::new((a0 - 4.0 * a1) / denom, 2.0 * a0 * a1 / denom)
}
