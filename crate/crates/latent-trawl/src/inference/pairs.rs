//! Closed-form bivariate densities of the exceedance pair `(X_0, X_h)`.
//!
//! With the three-slice decomposition `B_0 = A_0 \ A_h`, `B_{0,h} = A_0 ∩ A_h`,
//! `B_h = A_h \ A_0` and slice shapes `b_i = α leb(B_i)/leb(A)` (so
//! `b_0 = b_h`), the joint Laplace transform of `(Λ_0, Λ_h)` is
//!
//! `ψ(u, v) = (1+u/β)^{-b0} (1+(u+v)/β)^{-b0h} (1+v/β)^{-b0}`
//!
//! and the four zero/positive cases of the pair density come from `ψ` and its
//! first partial derivatives at arguments shifted by `κ`. MT-variant densities
//! are the latent (`α = β = 1`) densities at `g⁻¹(z)` times the transform
//! Jacobian for each positive coordinate.

use std::collections::HashMap;

use crate::model::{pair_weights, ModelParams, MtTransform, Variant};
use crate::{Error, Result};

/// Latent-scale pair density machine for one lag.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LatentPair {
    alpha: f64,
    beta: f64,
    kappa: f64,
    b0: f64,
    b0h: f64,
    /// `ln(1 + κ/β)`
    log_ck: f64,
}

impl LatentPair {
    pub(crate) fn new(alpha: f64, beta: f64, kappa: f64, b0: f64, b0h: f64) -> Self {
        Self {
            alpha,
            beta,
            kappa,
            b0,
            b0h,
            log_ck: (1.0 + kappa / beta).ln(),
        }
    }

    /// `P(X_0 = 0, X_h = 0) = 1 - 2(1+κ/β)^{-α} + (1+κ/β)^{-2b0}(1+2κ/β)^{-b0h}`
    pub(crate) fn density_00(&self) -> f64 {
        let s = (-self.alpha * self.log_ck).exp();
        let log_c2k = (1.0 + 2.0 * self.kappa / self.beta).ln();
        let s2 = (-2.0 * self.b0 * self.log_ck - self.b0h * log_c2k).exp();
        1.0 - 2.0 * s + s2
    }

    /// Joint density of `{X_0 ∈ dx, X_0 > 0}` alone:
    /// `(α/β)(1+(κ+x)/β)^{-(α+1)}`.
    fn log_marginal_pos(&self, x: f64) -> f64 {
        let c1 = (1.0 + (self.kappa + x) / self.beta).ln();
        (self.alpha / self.beta).ln() - (self.alpha + 1.0) * c1
    }

    /// Log density of one exceedance and one zero,
    /// `f_{10}(x) = -∂_u ψ(u, 0)|_{u=κ+x} + ∂_u ψ(u, κ)|_{u=κ+x}`.
    ///
    /// Written as `marginal · (1 - T)` with `T ∈ (0, 1)`, which is positive by
    /// construction and stable at long lags.
    pub(crate) fn log_density_10(&self, x: f64) -> f64 {
        let c1 = 1.0 + (self.kappa + x) / self.beta;
        let c12 = 1.0 + (2.0 * self.kappa + x) / self.beta;
        let log_t = (self.b0 * c12 + self.b0h * c1).ln() - self.alpha.ln() - c12.ln()
            + self.b0h * (c1 / c12).ln()
            - self.b0 * self.log_ck;
        self.log_marginal_pos(x) + (-log_t.exp()).ln_1p()
    }

    /// Log density of two exceedances, the mixed second partial of `ψ`:
    /// `f_{11} = ψ/β² [ b0h/c12² + (b0/c1 + b0h/c12)(b0/c2 + b0h/c12) ]`.
    ///
    /// Grouped so the value is bitwise symmetric in `(x1, x2)`.
    pub(crate) fn log_density_11(&self, x1: f64, x2: f64) -> f64 {
        let c1 = 1.0 + (self.kappa + x1) / self.beta;
        let c12 = 1.0 + (2.0 * self.kappa + (x1 + x2)) / self.beta;
        let c2 = 1.0 + (self.kappa + x2) / self.beta;
        let log_psi = -self.b0 * (c1.ln() + c2.ln()) - self.b0h * c12.ln();
        let bracket = self.b0h / (c12 * c12)
            + (self.b0 / c1 + self.b0h / c12) * (self.b0 / c2 + self.b0h / c12);
        log_psi + (bracket.ln() - 2.0 * self.beta.ln())
    }
}

/// Prepared evaluation context for one parameter set: caches the slice shapes
/// per distinct lag so likelihood sweeps stay cheap.
pub(crate) struct PairContext<'a> {
    params: &'a ModelParams,
    mt: Option<MtTransform>,
    alpha: f64,
    beta: f64,
    kappa: f64,
    cache: HashMap<u64, LatentPair>,
}

impl<'a> PairContext<'a> {
    pub(crate) fn new(params: &'a ModelParams) -> Self {
        let (alpha, beta) = params.latent_alpha_beta();
        Self {
            params,
            mt: params.mt_transform(),
            alpha,
            beta,
            kappa: params.kappa(),
            cache: HashMap::new(),
        }
    }

    pub(crate) fn latent_pair(&mut self, h: f64) -> Result<LatentPair> {
        if let Some(p) = self.cache.get(&h.to_bits()) {
            return Ok(*p);
        }
        let w = pair_weights(self.alpha, self.params.trawl(), h)?;
        let p = LatentPair::new(self.alpha, self.beta, self.kappa, w.b0, w.b0h);
        self.cache.insert(h.to_bits(), p);
        Ok(p)
    }

    /// Log pair density on the observed scale, dispatching on the zero
    /// pattern and applying MT Jacobians to positive coordinates.
    pub(crate) fn log_density(&mut self, h: f64, x1: f64, x2: f64) -> Result<f64> {
        if !(x1 >= 0.0) || !(x2 >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "pair density arguments must be >= 0, got ({x1}, {x2})"
            )));
        }
        let pair = self.latent_pair(h)?;
        let (y1, log_j1) = self.to_latent(x1)?;
        let (y2, log_j2) = self.to_latent(x2)?;
        Ok(match (x1 > 0.0, x2 > 0.0) {
            (false, false) => pair.density_00().ln(),
            (true, false) => pair.log_density_10(y1) + log_j1,
            (false, true) => pair.log_density_10(y2) + log_j2,
            (true, true) => pair.log_density_11(y1, y2) + log_j1 + log_j2,
        })
    }

    /// Maps an observed value to the latent scale, returning the log Jacobian
    /// contribution (zero for the atom and for the original variant).
    fn to_latent(&self, x: f64) -> Result<(f64, f64)> {
        if x == 0.0 {
            return Ok((0.0, 0.0));
        }
        match &self.mt {
            None => Ok((x, 0.0)),
            Some(t) => Ok((t.inverse(x)?, t.jacobian(x)?.ln())),
        }
    }
}

fn ensure_variant(params: &ModelParams, variant: Variant, what: &str) -> Result<()> {
    if params.variant() != variant {
        return Err(Error::InvalidInput(format!(
            "{what} expects the {variant:?} variant, got {:?}",
            params.variant()
        )));
    }
    Ok(())
}

/// `P(X_0 = 0, X_h = 0)` for a pair at lag `h > 0`. Valid for both variants
/// (the transformation leaves the atom untouched).
pub fn pair_density_00(params: &ModelParams, h: f64) -> Result<f64> {
    let mut ctx = PairContext::new(params);
    Ok(ctx.latent_pair(h)?.density_00())
}

/// Mixed density: `X_0 = x1 > 0` and `X_h = 0` (original variant).
pub fn pair_density_10(params: &ModelParams, h: f64, x1: f64) -> Result<f64> {
    ensure_variant(params, Variant::Original, "pair_density_10")?;
    if !(x1 > 0.0) {
        return Err(Error::InvalidInput(format!("x1 must be > 0, got {x1}")));
    }
    let mut ctx = PairContext::new(params);
    Ok(ctx.latent_pair(h)?.log_density_10(x1).exp())
}

/// Mirror of [`pair_density_10`]: `X_0 = 0`, `X_h = x2 > 0`. Equal by
/// stationarity (`b_0 = b_h`).
pub fn pair_density_01(params: &ModelParams, h: f64, x2: f64) -> Result<f64> {
    pair_density_10(params, h, x2)
}

/// Bivariate continuous density: both coordinates positive (original
/// variant). Symmetric in `(x1, x2)`.
pub fn pair_density_11(params: &ModelParams, h: f64, x1: f64, x2: f64) -> Result<f64> {
    ensure_variant(params, Variant::Original, "pair_density_11")?;
    if !(x1 > 0.0) || !(x2 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "arguments must be > 0, got ({x1}, {x2})"
        )));
    }
    let mut ctx = PairContext::new(params);
    Ok(ctx.latent_pair(h)?.log_density_11(x1, x2).exp())
}

/// MT-variant pair density at observed values `z1, z2 ≥ 0` (zero encodes the
/// atom): the latent `α = β = 1` density at `(g⁻¹(z1), g⁻¹(z2))` times `J(z)`
/// for each positive coordinate.
pub fn pair_density_mt(params: &ModelParams, h: f64, z1: f64, z2: f64) -> Result<f64> {
    ensure_variant(params, Variant::Mt, "pair_density_mt")?;
    let mut ctx = PairContext::new(params);
    Ok(ctx.log_density(h, z1, z2)?.exp())
}

/// Generic pair density on the observed scale for either variant, dispatching
/// on the zero pattern of `(x1, x2)`.
pub fn pair_density(params: &ModelParams, h: f64, x1: f64, x2: f64) -> Result<f64> {
    let mut ctx = PairContext::new(params);
    Ok(ctx.log_density(h, x1, x2)?.exp())
}
