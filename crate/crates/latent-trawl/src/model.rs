//! The hierarchical exceedance model.
//!
//! Conditionally on the latent trawl value `Λ_j = λ`, an observation is zero
//! with probability `1 - exp(-κλ)` and otherwise exponential with rate `λ`;
//! observations are independent given the latent path. With `Λ ~ Gamma(α, β)`
//! marginals the positive part is exactly `GPD(α, β + κ)`.
//!
//! Two variants are supported. The original model carries `(α, β, ρ, κ)`. The
//! marginal-transformation (MT) model pins the latent layer at `α = β = 1` and
//! maps positive values through
//! `g = F⁻¹_{GPD(ξ,σ)} ∘ F_{GPD(1,1+κ)}`, which decouples the marginal
//! parameters `(ξ, σ)` from the dependence parameters `(ρ, κ)` and admits
//! negative shapes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::gpd::{Gpd, SHAPE_ZERO_EPS};
use crate::quad;
use crate::trawl::{simulate_trawl_with_rng, GammaSeed, TrawlSpec};
use crate::{Error, Result};

/// Thresholded values below this are stored as exact zeros: the model's atom
/// at zero must not be polluted by floating-point subtraction noise.
pub const ZERO_ATOM_EPS: f64 = 1e-12;

/// Absolute tolerance requested from the autocovariance quadrature.
const ACOV_QUAD_TOL: f64 = 1e-9;
/// Quadrature error above this aborts instead of returning a value.
const ACOV_QUAD_HARD_LIMIT: f64 = 1e-6;

/// Which flavour of the hierarchical model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Original,
    Mt,
}

/// Full parameter set of a latent trawl exceedance model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelParams {
    /// `(α, β)` latent Gamma plus exceedance control `κ`; positive shape only.
    Original {
        trawl: TrawlSpec,
        alpha: f64,
        beta: f64,
        kappa: f64,
    },
    /// Latent layer pinned at `α = β = 1`; marginals transformed to
    /// `GPD(ξ, σ)`.
    Mt {
        trawl: TrawlSpec,
        kappa: f64,
        xi: f64,
        sigma: f64,
    },
}

impl ModelParams {
    pub fn original(trawl: TrawlSpec, alpha: f64, beta: f64, kappa: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("kappa", kappa)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParam(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(Self::Original {
            trawl,
            alpha,
            beta,
            kappa,
        })
    }

    pub fn mt(trawl: TrawlSpec, kappa: f64, xi: f64, sigma: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParam(format!("kappa must be > 0, got {kappa}")));
        }
        if !xi.is_finite() {
            return Err(Error::InvalidParam("xi must be finite".into()));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParam(format!("sigma must be > 0, got {sigma}")));
        }
        Ok(Self::Mt {
            trawl,
            kappa,
            xi,
            sigma,
        })
    }

    pub fn variant(&self) -> Variant {
        match self {
            Self::Original { .. } => Variant::Original,
            Self::Mt { .. } => Variant::Mt,
        }
    }

    pub fn trawl(&self) -> &TrawlSpec {
        match self {
            Self::Original { trawl, .. } | Self::Mt { trawl, .. } => trawl,
        }
    }

    pub fn kappa(&self) -> f64 {
        match self {
            Self::Original { kappa, .. } | Self::Mt { kappa, .. } => *kappa,
        }
    }

    /// `(α, β)` of the latent Gamma layer; `(1, 1)` for the MT variant.
    pub fn latent_alpha_beta(&self) -> (f64, f64) {
        match self {
            Self::Original { alpha, beta, .. } => (*alpha, *beta),
            Self::Mt { .. } => (1.0, 1.0),
        }
    }

    pub fn latent_seed(&self) -> GammaSeed {
        let (alpha, beta) = self.latent_alpha_beta();
        GammaSeed::new(alpha, beta).expect("validated at construction")
    }

    /// Marginal transformation of the MT variant, if any.
    pub fn mt_transform(&self) -> Option<MtTransform> {
        match self {
            Self::Original { .. } => None,
            Self::Mt {
                kappa, xi, sigma, ..
            } => Some(MtTransform::new(*kappa, *xi, *sigma).expect("validated at construction")),
        }
    }

    /// `P(X > 0) = E[exp(-κΛ)] = (1 + κ/β)^{-α}` (so `(1+κ)^{-1}` under MT).
    pub fn exceedance_prob(&self) -> f64 {
        let (alpha, beta) = self.latent_alpha_beta();
        (1.0 + self.kappa() / beta).powf(-alpha)
    }

    /// Law of `{X | X > 0}` on the observed scale: `GPD(α, β+κ)` for the
    /// original model, `GPD(ξ, σ)` for the MT model.
    pub fn marginal_gpd(&self) -> Gpd {
        match self {
            Self::Original {
                alpha, beta, kappa, ..
            } => Gpd::from_alpha_beta(*alpha, *beta + *kappa).expect("validated"),
            Self::Mt { xi, sigma, .. } => Gpd::new(*xi, *sigma).expect("validated"),
        }
    }

    /// `E[X] = (1+κ/β)^{-α} (β+κ)/(α-1)`, requiring `α > 1` (equivalently
    /// marginal shape < 1).
    pub fn mean_exceedance(&self) -> Result<f64> {
        let gpd = self.marginal_gpd();
        Ok(self.exceedance_prob() * gpd.mean()?)
    }

    /// `E[X²]`; requires marginal shape < 1/2 (`α > 2` for the original).
    pub fn second_moment_exceedance(&self) -> Result<f64> {
        let gpd = self.marginal_gpd();
        let xi = gpd.shape();
        if xi >= 0.5 {
            return Err(Error::Undefined(format!(
                "second moment requires marginal shape < 1/2, got {xi}"
            )));
        }
        let s = gpd.scale();
        Ok(self.exceedance_prob() * 2.0 * s * s / ((1.0 - xi) * (1.0 - 2.0 * xi)))
    }

    /// `Var(X)` including the atom at zero.
    pub fn variance_exceedance(&self) -> Result<f64> {
        let m = self.mean_exceedance()?;
        Ok(self.second_moment_exceedance()? - m * m)
    }

    /// Natural parameter order used throughout fitting and reporting.
    pub fn param_names(variant: Variant) -> [&'static str; 4] {
        match variant {
            Variant::Original => ["alpha", "beta", "rho", "kappa"],
            Variant::Mt => ["xi", "sigma", "rho", "kappa"],
        }
    }

    /// Natural parameter vector; the trawl must be order 1.
    pub fn to_vector(&self) -> Result<[f64; 4]> {
        let rho = self.trawl().single_decay().ok_or_else(|| {
            Error::InvalidInput("parameter vector requires an order-1 trawl".into())
        })?;
        Ok(match self {
            Self::Original {
                alpha, beta, kappa, ..
            } => [*alpha, *beta, rho, *kappa],
            Self::Mt {
                kappa, xi, sigma, ..
            } => [*xi, *sigma, rho, *kappa],
        })
    }

    /// Builds parameters from the natural vector with an exponential trawl.
    pub fn from_vector(variant: Variant, v: &[f64; 4]) -> Result<Self> {
        let trawl = TrawlSpec::exponential(v[2])?;
        match variant {
            Variant::Original => Self::original(trawl, v[0], v[1], v[3]),
            Variant::Mt => Self::mt(trawl, v[3], v[0], v[1]),
        }
    }
}

/// Shape parameters of the three-slice decomposition of `(A_0, A_h)`:
/// `b0 = bh = α (leb(A) - leb(A∩A_h)) / leb(A)` and `b0h = α leb(A∩A_h)/leb(A)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PairWeights {
    pub b0: f64,
    pub b0h: f64,
}

pub(crate) fn pair_weights(alpha: f64, trawl: &TrawlSpec, h: f64) -> Result<PairWeights> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("lag must be > 0, got {h}")));
    }
    let r = trawl.acf(h)?;
    Ok(PairWeights {
        b0: alpha * (1.0 - r),
        b0h: alpha * r,
    })
}

/// The strictly increasing map `g` taking `GPD(1, 1+κ)` to `GPD(ξ, σ)`,
/// together with its inverse and the density-ratio Jacobian.
#[derive(Debug, Clone, Copy)]
pub struct MtTransform {
    kappa: f64,
    xi: f64,
    sigma: f64,
}

impl MtTransform {
    pub fn new(kappa: f64, xi: f64, sigma: f64) -> Result<Self> {
        if !(kappa > 0.0) || !(sigma > 0.0) || !xi.is_finite() {
            return Err(Error::InvalidParam(format!(
                "MT transform needs kappa, sigma > 0 and finite xi, got ({kappa}, {xi}, {sigma})"
            )));
        }
        Ok(Self { kappa, xi, sigma })
    }

    /// The target marginal `GPD(ξ, σ)`.
    pub fn gpd(&self) -> Gpd {
        Gpd::new(self.xi, self.sigma).expect("validated")
    }

    /// `g(x) = F⁻¹_{GPD(ξ,σ)}(F_{GPD(1,1+κ)}(x))` for `x ≥ 0`.
    pub fn forward(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::InvalidInput(format!("transform argument must be >= 0, got {x}")));
        }
        // survivor of GPD(1, 1+kappa) evaluated without cancellation
        let ratio = (1.0 + self.kappa + x) / (1.0 + self.kappa);
        if self.xi.abs() < SHAPE_ZERO_EPS {
            Ok(self.sigma * ratio.ln())
        } else {
            Ok(self.sigma / self.xi * (ratio.powf(self.xi) - 1.0))
        }
    }

    /// `g⁻¹(z) = (1+κ)((1+ξz/σ)^{1/ξ} - 1)`; errors outside the `GPD(ξ, σ)`
    /// support.
    pub fn inverse(&self, z: f64) -> Result<f64> {
        if !(z >= 0.0) || !z.is_finite() {
            return Err(Error::InvalidInput(format!("transform argument must be >= 0, got {z}")));
        }
        if self.xi.abs() < SHAPE_ZERO_EPS {
            return Ok((1.0 + self.kappa) * ((z / self.sigma).exp() - 1.0));
        }
        let base = 1.0 + self.xi * z / self.sigma;
        if base <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "argument {z} outside the GPD({}, {}) support",
                self.xi, self.sigma
            )));
        }
        Ok((1.0 + self.kappa) * (base.powf(1.0 / self.xi) - 1.0))
    }

    /// `J(z) = f_{GPD(ξ,σ)}(z) / f_{GPD(1,1+κ)}(g⁻¹(z)) = (g⁻¹)'(z)`.
    pub fn jacobian(&self, z: f64) -> Result<f64> {
        let x = self.inverse(z)?;
        let num = self.gpd().pdf(z)?;
        let scale = 1.0 + self.kappa;
        let denom = (1.0 + x / scale).powi(-2) / scale;
        Ok(num / denom)
    }
}

/// Exceedance observations: timestamps, nonnegative values with an atom at
/// zero, the threshold they were taken over, and the original row indices
/// (rows lost to missing data still advance the index).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExceedanceSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    indices: Vec<usize>,
    threshold: f64,
    n_positive: usize,
}

impl ExceedanceSeries {
    /// Builds a gap-free series; values in `[0, 1e-12)` collapse to the atom.
    pub fn new(times: Vec<f64>, values: Vec<f64>, threshold: f64) -> Result<Self> {
        let indices = (0..times.len()).collect();
        Self::with_indices(times, values, indices, threshold)
    }

    /// Builds a series whose observations keep their original row indices.
    pub fn with_indices(
        times: Vec<f64>,
        mut values: Vec<f64>,
        indices: Vec<usize>,
        threshold: f64,
    ) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidInput("empty exceedance series".into()));
        }
        if times.len() != values.len() || times.len() != indices.len() {
            return Err(Error::InvalidInput("times/values/indices length mismatch".into()));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidInput("timestamps must be strictly increasing".into()));
            }
        }
        for w in indices.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidInput("indices must be strictly increasing".into()));
            }
        }
        let mut n_positive = 0;
        for v in &mut values {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::InvalidInput(format!("exceedance values must be >= 0, got {v}")));
            }
            if *v < ZERO_ATOM_EPS {
                *v = 0.0;
            } else {
                n_positive += 1;
            }
        }
        Ok(Self {
            times,
            values,
            indices,
            threshold,
            n_positive,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Number of strictly positive observations (`l`).
    pub fn n_positive(&self) -> usize {
        self.n_positive
    }

    /// Number of zero observations (`m`).
    pub fn n_zero(&self) -> usize {
        self.len() - self.n_positive
    }

    pub fn positive_values(&self) -> Vec<f64> {
        self.values.iter().copied().filter(|v| *v > 0.0).collect()
    }
}

/// Simulates the exceedance process at the given times.
///
/// Draws the latent trawl path, then independently per point: zero with
/// probability `1 - exp(-κΛ_j)`, otherwise exponential with rate `Λ_j`; the MT
/// variant transforms positive values through `g`. Reproducible given
/// `rng_seed`.
pub fn simulate_exceedances(
    params: &ModelParams,
    times: &[f64],
    rng_seed: u64,
) -> Result<ExceedanceSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let seed = params.latent_seed();
    let latent = simulate_trawl_with_rng(&seed, params.trawl(), times, &mut rng)?;
    let kappa = params.kappa();
    let mt = params.mt_transform();
    let mut values = Vec::with_capacity(latent.len());
    for lambda in latent {
        let exceeds = rng.random::<f64>() < (-kappa * lambda).exp();
        if !exceeds {
            values.push(0.0);
            continue;
        }
        let x = Exp::new(lambda)
            .map_err(|e| Error::InvalidParam(format!("exponential rate {lambda}: {e}")))?
            .sample(&mut rng);
        values.push(match &mt {
            Some(t) => t.forward(x)?,
            None => x,
        });
    }
    ExceedanceSeries::new(times.to_vec(), values, 0.0)
}

/// Joint survivor of the positive parts,
/// `P(X_0 > x0, X_h > xh, X_0 > 0, X_h > 0)`.
///
/// Closed form from the three-slice decomposition:
/// `(1+(κ+x0)/β)^{-b0} (1+(2κ+x0+xh)/β)^{-b0h} (1+(κ+xh)/β)^{-b0}`.
/// MT arguments are on the observed scale and mapped through `g⁻¹`.
pub fn joint_exceedance_survivor(params: &ModelParams, h: f64, x0: f64, xh: f64) -> Result<f64> {
    if !(x0 >= 0.0) || !(xh >= 0.0) {
        return Err(Error::InvalidInput("survivor arguments must be >= 0".into()));
    }
    let (alpha, beta) = params.latent_alpha_beta();
    let w = pair_weights(alpha, params.trawl(), h)?;
    let kappa = params.kappa();
    let (x0, xh) = match params.mt_transform() {
        Some(t) => (t.inverse(x0)?, t.inverse(xh)?),
        None => (x0, xh),
    };
    let log_s = -w.b0 * (1.0 + (kappa + x0) / beta).ln()
        - w.b0h * (1.0 + (2.0 * kappa + x0 + xh) / beta).ln()
        - w.b0 * (1.0 + (kappa + xh) / beta).ln();
    Ok(log_s.exp())
}

/// `E[X_0 X_h]` by tensor-product adaptive Gauss-Kronrod quadrature of the
/// closed-form double integral over `[κ, ∞)²`, mapped to the unit square via
/// `u = κ + t/(1-t)`.
pub fn product_moment_exceedance(params: &ModelParams, h: f64) -> Result<f64> {
    let ModelParams::Original {
        trawl,
        alpha,
        beta,
        kappa,
    } = params
    else {
        return Err(Error::Undefined(
            "closed-form product moment is only available for the original variant; \
             use simulation for the MT model"
                .into(),
        ));
    };
    if *alpha <= 2.0 {
        return Err(Error::Undefined(format!(
            "product moment requires alpha > 2, got {alpha}"
        )));
    }
    let w = pair_weights(*alpha, trawl, h)?;
    let (beta, kappa) = (*beta, *kappa);
    let integrand = move |t: f64, s: f64| {
        let wt = 1.0 - t;
        let ws = 1.0 - s;
        let u0 = kappa + t / wt;
        let uh = kappa + s / ws;
        let log_psi = -w.b0 * (1.0 + u0 / beta).ln()
            - w.b0h * (1.0 + (u0 + uh) / beta).ln()
            - w.b0 * (1.0 + uh / beta).ln();
        log_psi.exp() / (wt * wt * ws * ws)
    };
    let r = quad::integrate2d_unit_square(integrand, ACOV_QUAD_TOL)?;
    if r.abs_error > ACOV_QUAD_HARD_LIMIT {
        return Err(Error::QuadratureAccuracy {
            estimate: r.abs_error,
            limit: ACOV_QUAD_HARD_LIMIT,
        });
    }
    Ok(r.value)
}

/// Autocovariance `Cov(X_0, X_h)` of the exceedance process (original model,
/// `α > 2`).
pub fn acov_exceedance(params: &ModelParams, h: f64) -> Result<f64> {
    let mean = params.mean_exceedance()?;
    Ok(product_moment_exceedance(params, h)? - mean * mean)
}

/// Autocorrelation `acov(h) / Var(X)`.
pub fn acf_exceedance(params: &ModelParams, h: f64) -> Result<f64> {
    Ok(acov_exceedance(params, h)? / params.variance_exceedance()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn table1() -> ModelParams {
        ModelParams::original(TrawlSpec::exponential(0.27).unwrap(), 6.33, 20.12, 12.18).unwrap()
    }

    #[test]
    fn exceedance_prob_closed_forms() {
        let unit = ModelParams::original(TrawlSpec::exponential(1.0).unwrap(), 1.0, 1.0, 1.0)
            .unwrap();
        assert_relative_eq!(unit.exceedance_prob(), 0.5);
        // kappa -> 0 gives probability 1
        let no_thin =
            ModelParams::original(TrawlSpec::exponential(1.0).unwrap(), 2.0, 3.0, 1e-300).unwrap();
        assert_relative_eq!(no_thin.exceedance_prob(), 1.0, epsilon = 1e-12);
        assert!((table1().exceedance_prob() - 0.05).abs() < 5e-4);
        let mt = ModelParams::mt(TrawlSpec::exponential(0.17).unwrap(), 32.69, -0.11, 20.73)
            .unwrap();
        assert_relative_eq!(mt.exceedance_prob(), 1.0 / 33.69, max_relative = 1e-12);
    }

    #[test]
    fn kappa_solving_five_percent_target() {
        // root of (1 + kappa/4)^{-4} = 0.05 by bisection, frozen value checked
        let f = |kappa: f64| (1.0 + kappa / 4.0f64).powf(-4.0) - 0.05;
        let (mut lo, mut hi) = (0.0, 100.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let kappa = 0.5 * (lo + hi);
        assert!((kappa - 4.45889).abs() < 1e-4, "kappa {kappa}");
        let params =
            ModelParams::original(TrawlSpec::exponential(0.2).unwrap(), 4.0, 4.0, kappa).unwrap();
        assert_relative_eq!(params.exceedance_prob(), 0.05, max_relative = 1e-10);
    }

    #[test]
    fn mean_exceedance_values() {
        let p = ModelParams::original(TrawlSpec::exponential(1.0).unwrap(), 2.0, 1.0, 1e-300)
            .unwrap();
        assert_relative_eq!(p.mean_exceedance().unwrap(), 1.0, epsilon = 1e-10);
        let t1 = table1().mean_exceedance().unwrap();
        assert_relative_eq!(
            t1,
            (1.0f64 + 12.18 / 20.12).powf(-6.33) * 32.30 / 5.33,
            max_relative = 1e-10
        );
        assert!((t1 - 0.3030).abs() < 1e-3);
        // huge kappa kills the mean
        let big = ModelParams::original(TrawlSpec::exponential(1.0).unwrap(), 2.0, 1.0, 1e8)
            .unwrap();
        assert!(big.mean_exceedance().unwrap() < 1e-7);
        // alpha <= 1 has no mean
        let heavy =
            ModelParams::original(TrawlSpec::exponential(1.0).unwrap(), 0.9, 1.0, 1.0).unwrap();
        assert!(heavy.mean_exceedance().is_err());
    }

    #[test]
    fn survivor_at_origin_matches_slice_form() {
        let params = table1();
        let (alpha, beta) = params.latent_alpha_beta();
        let kappa = params.kappa();
        let r = params.trawl().acf(1.0).unwrap();
        let (b0, b0h) = (alpha * (1.0 - r), alpha * r);
        let expected = (1.0 + kappa / beta).powf(-2.0 * b0) * (1.0 + 2.0 * kappa / beta).powf(-b0h);
        let got = joint_exceedance_survivor(&params, 1.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-12);
        assert!(joint_exceedance_survivor(&params, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn survivor_factorises_at_long_lags() {
        let params = table1();
        let (x0, xh) = (0.4, 1.1);
        let far = joint_exceedance_survivor(&params, 400.0, x0, xh).unwrap();
        let gpd = params.marginal_gpd();
        let p = params.exceedance_prob();
        let independent = p * gpd.survivor(x0).unwrap() * p * gpd.survivor(xh).unwrap();
        assert_relative_eq!(far, independent, max_relative = 1e-9);
    }

    #[test]
    fn mt_transform_identity_case() {
        // xi = 1, sigma = 1 + kappa keeps the law unchanged
        let t = MtTransform::new(2.0, 1.0, 3.0).unwrap();
        for x in [0.0, 0.3, 2.0, 40.0] {
            assert_relative_eq!(t.forward(x).unwrap(), x, max_relative = 1e-12);
            assert_relative_eq!(t.inverse(x).unwrap(), x, max_relative = 1e-12);
            assert_relative_eq!(t.jacobian(x).unwrap(), 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn mt_transform_small_argument_limit() {
        let t = MtTransform::new(5.0, -0.2, 2.0).unwrap();
        let z = t.forward(1e-9).unwrap();
        assert!(z > 0.0 && z < 1e-6);
    }

    #[test]
    fn mt_jacobian_matches_inverse_derivative() {
        let t = MtTransform::new(3.0, -0.11, 20.73).unwrap();
        for z in [0.5f64, 5.0, 40.0, 120.0] {
            let h = 1e-6 * z.max(1.0);
            let numeric = (t.inverse(z + h).unwrap() - t.inverse(z - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(t.jacobian(z).unwrap(), numeric, max_relative = 1e-6);
            // g'(x) * J(g(x)) = 1
            let x = t.inverse(z).unwrap();
            let gprime = (t.forward(x + h).unwrap() - t.forward(x - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(gprime * t.jacobian(z).unwrap(), 1.0, max_relative = 1e-6);
        }
        assert!(t.inverse(300.0).is_err()); // beyond the upper endpoint
    }

    #[test]
    fn series_sanitises_atom_and_counts() {
        let s = ExceedanceSeries::new(vec![0.0, 1.0, 2.0], vec![0.0, 1e-14, 2.5], 0.0).unwrap();
        assert_eq!(s.values(), &[0.0, 0.0, 2.5]);
        assert_eq!(s.n_positive(), 1);
        assert_eq!(s.n_zero(), 2);
        assert!(ExceedanceSeries::new(vec![0.0, 0.0], vec![1.0, 1.0], 0.0).is_err());
        assert!(ExceedanceSeries::new(vec![0.0], vec![-1.0], 0.0).is_err());
    }

    #[test]
    fn simulation_is_reproducible() {
        let params = table1();
        let times: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let a = simulate_exceedances(&params, &times, 11).unwrap();
        let b = simulate_exceedances(&params, &times, 11).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn huge_kappa_yields_all_zeros() {
        let params = ModelParams::original(TrawlSpec::exponential(0.3).unwrap(), 4.0, 4.0, 1e9)
            .unwrap();
        let times: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let s = simulate_exceedances(&params, &times, 1).unwrap();
        assert_eq!(s.n_positive(), 0);
    }

    #[test]
    fn acov_requires_alpha_above_two_and_decays() {
        let heavy =
            ModelParams::original(TrawlSpec::exponential(0.2).unwrap(), 1.5, 4.0, 1.0).unwrap();
        assert!(acov_exceedance(&heavy, 1.0).is_err());

        let params =
            ModelParams::original(TrawlSpec::exponential(0.2).unwrap(), 4.0, 4.0, 4.45889)
                .unwrap();
        let var = params.variance_exceedance().unwrap();
        // discontinuity at zero: correlation just above lag 0 is < 1
        let near0 = acov_exceedance(&params, 1e-8).unwrap() / var;
        assert!(near0 < 1.0, "acf(0+) = {near0}");
        let mut last = near0;
        for h in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let acf = acf_exceedance(&params, h).unwrap();
            assert!(acf < last && acf > -1e-9, "acf({h}) = {acf} after {last}");
            last = acf;
        }
        assert!(acov_exceedance(&params, 120.0).unwrap().abs() < 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn survivor_is_symmetric(
            alpha in 0.5f64..8.0,
            beta in 0.5f64..30.0,
            kappa in 0.1f64..30.0,
            rho in 0.05f64..2.0,
            h in 0.2f64..10.0,
            a in 0.0f64..5.0,
            b in 0.0f64..5.0,
        ) {
            let params = ModelParams::original(
                TrawlSpec::exponential(rho).unwrap(), alpha, beta, kappa).unwrap();
            let s1 = joint_exceedance_survivor(&params, h, a, b).unwrap();
            let s2 = joint_exceedance_survivor(&params, h, b, a).unwrap();
            prop_assert!((s1 - s2).abs() <= 1e-15_f64.max(1e-12 * s1));
        }

        #[test]
        fn mt_roundtrip(
            kappa in 0.1f64..40.0,
            xi in -0.7f64..1.5,
            sigma in 0.2f64..30.0,
            x in 1e-6f64..200.0,
        ) {
            let t = MtTransform::new(kappa, xi, sigma).unwrap();
            let z = t.forward(x).unwrap();
            prop_assert!(z > 0.0);
            let back = t.inverse(z).unwrap();
            prop_assert!((back - x).abs() <= 1e-10 * x.max(1.0), "x {} back {}", x, back);
            prop_assert!(t.jacobian(z).unwrap() > 0.0);
        }
    }
}
