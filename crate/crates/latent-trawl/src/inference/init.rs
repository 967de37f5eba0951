//! Moment/frequency starting values for the pairwise-likelihood optimiser.
//!
//! Marginal shape and scale come from probability-weighted moments of the
//! positive values, `κ` from inverting the exceedance probability at the
//! empirical frequency, and `ρ` from a least-squares fit of `exp(-ρh)` to the
//! sample autocorrelation of the exceedance indicator at lags 1..=10.

use crate::gpd::fit_pwm;
use crate::model::{ExceedanceSeries, ModelParams, Variant};
use crate::stats::sample_acf;
use crate::trawl::TrawlSpec;
use crate::{Error, Result};

/// Minimum exceedance count for the heuristic to be meaningful.
const MIN_POSITIVE: usize = 10;
/// κ is floored here when the empirical frequency implies κ -> 0.
const KAPPA_FLOOR: f64 = 1e-4;
/// Search window for ρ; an effectively independent indicator hits the
/// ceiling.
const RHO_FLOOR: f64 = 1e-3;
const RHO_CEILING: f64 = 5.0;
/// Number of indicator-ACF lags entering the ρ fit.
const RHO_LAGS: usize = 10;
/// Marginal-shape clamp for the original variant (α = 1/ξ stays in
/// [0.5, 50]).
const XI_MIN_ORIGINAL: f64 = 0.02;
const XI_MAX_ORIGINAL: f64 = 2.0;

fn rho_from_indicator(series: &ExceedanceSeries) -> f64 {
    let indicator: Vec<f64> = series
        .values()
        .iter()
        .map(|v| if *v > 0.0 { 1.0 } else { 0.0 })
        .collect();
    let max_lag = RHO_LAGS.min(series.len().saturating_sub(1));
    let Ok(acf) = sample_acf(&indicator, max_lag) else {
        return RHO_CEILING;
    };
    // The indicator ACF is proportional to exp(-rho h) but its level sits far
    // below one, so fit c * exp(-rho h): profile the amplitude out by least
    // squares on the log scale. Only the leading run of lags above the ACF
    // noise floor is informative; an indicator uncorrelated at lag one is
    // indistinguishable from instant decay.
    let noise_floor = 2.0 / (series.len() as f64).sqrt();
    let points: Vec<(f64, f64)> = (1..=max_lag)
        .take_while(|&h| acf[h] > noise_floor)
        .map(|h| (h as f64, acf[h].ln()))
        .collect();
    match points.len() {
        0 => return RHO_CEILING,
        1 => return (-points[0].1).clamp(RHO_FLOOR, RHO_CEILING),
        _ => {}
    }
    let n = points.len() as f64;
    let mean_h = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_h) * (p.1 - mean_y)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_h) * (p.0 - mean_h)).sum();
    let slope = sxy / sxx;
    (-slope).clamp(RHO_FLOOR, RHO_CEILING)
}

/// Starting values for [`fit`](crate::inference::fit).
pub fn init_heuristic(series: &ExceedanceSeries, variant: Variant) -> Result<ModelParams> {
    if series.n_positive() < MIN_POSITIVE {
        return Err(Error::InvalidInput(format!(
            "initial-value heuristic needs >= {MIN_POSITIVE} exceedances, got {}",
            series.n_positive()
        )));
    }
    let positives = series.positive_values();
    let p_hat = positives.len() as f64 / series.len() as f64;
    let gpd = fit_pwm(&positives)?;
    let rho = rho_from_indicator(series).clamp(RHO_FLOOR, RHO_CEILING);
    let trawl = TrawlSpec::exponential(rho)?;

    match variant {
        Variant::Original => {
            let xi = gpd.shape().clamp(XI_MIN_ORIGINAL, XI_MAX_ORIGINAL);
            let alpha = 1.0 / xi;
            // exceedance probability (1 + kappa/beta)^{-alpha} = p_hat and
            // marginal scale (beta + kappa)/alpha = sigma jointly pin beta
            // and kappa
            let c = p_hat.powf(-1.0 / alpha) - 1.0;
            let beta = alpha * gpd.scale().max(1e-12) / (1.0 + c);
            let kappa = (c * beta).max(KAPPA_FLOOR);
            ModelParams::original(trawl, alpha, beta, kappa)
        }
        Variant::Mt => {
            let kappa = (1.0 / p_hat - 1.0).max(KAPPA_FLOOR);
            ModelParams::mt(trawl, kappa, gpd.shape().clamp(-5.0, 5.0), gpd.scale())
        }
    }
}
