//! Sandwich covariance of the maximum pairwise-likelihood estimator,
//! `H⁻¹ J H⁻¹ / k`, with `H` the negative numerical Hessian of the mean
//! log pairwise likelihood and `J` an overlapping-block variance of the
//! per-observation score contributions.

use nalgebra::{DMatrix, DVector};

use crate::inference::fit::PLConfig;
use crate::inference::likelihood::{build_pairs, log_pl_per_observation, log_pl_with_pairs};
use crate::model::{ExceedanceSeries, ModelParams};
use crate::{Error, Result};

/// Base relative step of the dual-step Hessian. Second differences lose half
/// the working precision, so the step is kept well above the square root of
/// machine epsilon.
const HESS_STEP: f64 = 1e-3;
/// Relative step of the central-difference scores.
const SCORE_STEP: f64 = 1e-5;
/// Hessians with a worse condition number are rejected.
const MAX_CONDITION: f64 = 1e12;

/// Block length for the score variance: at least the pair separation, and at
/// least three latent correlation lengths.
pub fn score_block_length(delta: usize, rho_hat: f64, k: usize) -> usize {
    let corr = if rho_hat > 0.0 {
        (3.0 / rho_hat).ceil() as usize
    } else {
        delta
    };
    delta.max(corr).clamp(1, k.max(1))
}

fn mean_log_pl(
    series: &ExceedanceSeries,
    params_at: &dyn Fn(&[f64; 4]) -> Result<ModelParams>,
    pairs: &[(usize, usize, f64)],
    v: &[f64; 4],
) -> Result<f64> {
    let params = params_at(v)?;
    Ok(log_pl_with_pairs(series, &params, pairs)? / series.len() as f64)
}

/// Central-difference Hessian of the mean log-PL at relative step `rel`.
fn hessian_at_step(
    series: &ExceedanceSeries,
    params_at: &dyn Fn(&[f64; 4]) -> Result<ModelParams>,
    pairs: &[(usize, usize, f64)],
    v0: &[f64; 4],
    rel: f64,
) -> Result<[[f64; 4]; 4]> {
    let f = |v: &[f64; 4]| mean_log_pl(series, params_at, pairs, v);
    let f0 = f(v0)?;
    let step: Vec<f64> = v0.iter().map(|x| rel * x.abs().max(1.0)).collect();
    let mut h = [[0.0; 4]; 4];
    for a in 0..4 {
        let mut up = *v0;
        up[a] += step[a];
        let mut down = *v0;
        down[a] -= step[a];
        h[a][a] = (f(&up)? - 2.0 * f0 + f(&down)?) / (step[a] * step[a]);
        for b in a + 1..4 {
            let eval = |da: f64, db: f64| {
                let mut v = *v0;
                v[a] += da;
                v[b] += db;
                f(&v)
            };
            let mixed = (eval(step[a], step[b])? - eval(step[a], -step[b])?
                - eval(-step[a], step[b])?
                + eval(-step[a], -step[b])?)
                / (4.0 * step[a] * step[b]);
            h[a][b] = mixed;
            h[b][a] = mixed;
        }
    }
    Ok(h)
}

/// Richardson-extrapolated Hessian from steps `rel` and `rel/2`; the
/// finer-step raw Hessian is returned alongside for dual-step cross-checks.
pub(crate) fn hessian_mean_log_pl(
    series: &ExceedanceSeries,
    params: &ModelParams,
    pairs: &[(usize, usize, f64)],
    rel: f64,
) -> Result<([[f64; 4]; 4], [[f64; 4]; 4])> {
    let variant = params.variant();
    let params_at = move |v: &[f64; 4]| ModelParams::from_vector(variant, v);
    let v0 = params.to_vector()?;
    let coarse = hessian_at_step(series, &params_at, pairs, &v0, rel)?;
    let fine = hessian_at_step(series, &params_at, pairs, &v0, rel / 2.0)?;
    let mut extrapolated = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            extrapolated[a][b] = (4.0 * fine[a][b] - coarse[a][b]) / 3.0;
        }
    }
    Ok((extrapolated, fine))
}

/// Per-observation score vectors `g_i = ∇_θ Σ_{pairs starting at i} ln f`,
/// by central differences in the natural parameters.
fn observation_scores(
    series: &ExceedanceSeries,
    params: &ModelParams,
    pairs: &[(usize, usize, f64)],
) -> Result<Vec<[f64; 4]>> {
    let variant = params.variant();
    let v0 = params.to_vector()?;
    let k = series.len();
    let mut scores = vec![[0.0; 4]; k];
    for a in 0..4 {
        let h = SCORE_STEP * v0[a].abs().max(1.0);
        let mut up = v0;
        up[a] += h;
        let mut down = v0;
        down[a] -= h;
        let up_obs =
            log_pl_per_observation(series, &ModelParams::from_vector(variant, &up)?, pairs)?;
        let down_obs =
            log_pl_per_observation(series, &ModelParams::from_vector(variant, &down)?, pairs)?;
        for i in 0..k {
            scores[i][a] = (up_obs[i] - down_obs[i]) / (2.0 * h);
        }
    }
    Ok(scores)
}

/// Overlapping-block estimate of the long-run variance of the scores.
fn block_variance(scores: &[[f64; 4]], block: usize) -> DMatrix<f64> {
    let k = scores.len();
    let block = block.min(k);
    let mut mean = [0.0; 4];
    for g in scores {
        for a in 0..4 {
            mean[a] += g[a];
        }
    }
    for m in &mut mean {
        *m /= k as f64;
    }
    let n_blocks = k - block + 1;
    let mut j = DMatrix::<f64>::zeros(4, 4);
    // running block sum
    let mut sum = [0.0; 4];
    for g in &scores[..block] {
        for a in 0..4 {
            sum[a] += g[a];
        }
    }
    for m in 0..n_blocks {
        let centered =
            DVector::from_iterator(4, (0..4).map(|a| sum[a] - block as f64 * mean[a]));
        j += &centered * centered.transpose();
        if m + 1 < n_blocks {
            for a in 0..4 {
                sum[a] += scores[m + block][a] - scores[m][a];
            }
        }
    }
    j / (block as f64 * n_blocks as f64)
}

/// Sandwich covariance `Ĥ⁻¹ Ĵ Ĥ⁻¹ / k` of the natural parameters at
/// `params` (normally the fitted maximiser).
pub fn sandwich_covariance(
    series: &ExceedanceSeries,
    params: &ModelParams,
    config: &PLConfig,
) -> Result<[[f64; 4]; 4]> {
    let pairs = build_pairs(series, config.delta);
    if pairs.is_empty() {
        return Err(Error::InvalidInput("no pairs for the sandwich estimator".into()));
    }
    let k = series.len();
    let (hess, _) = hessian_mean_log_pl(series, params, &pairs, HESS_STEP)?;
    let mut h = DMatrix::<f64>::zeros(4, 4);
    for a in 0..4 {
        for b in 0..4 {
            h[(a, b)] = -hess[a][b];
        }
    }
    // symmetrise before inversion
    h = (&h + h.transpose()) * 0.5;

    let svd = h.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition < MAX_CONDITION) {
        return Err(Error::SingularHessian { condition });
    }
    let h_inv = h.try_inverse().ok_or(Error::SingularHessian { condition })?;

    let scores = observation_scores(series, params, &pairs)?;
    let rho_hat = params
        .trawl()
        .terms()
        .iter()
        .map(|t| t.decay)
        .fold(f64::INFINITY, f64::min);
    let block = score_block_length(config.delta, rho_hat, k);
    let j = block_variance(&scores, block);

    let cov = &h_inv * j * &h_inv / k as f64;
    let cov = (&cov + cov.transpose()) * 0.5;
    let mut out = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            out[a][b] = cov[(a, b)];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::simulate_exceedances;
    use crate::trawl::TrawlSpec;

    fn table1() -> ModelParams {
        ModelParams::original(TrawlSpec::exponential(0.27).unwrap(), 6.33, 20.12, 12.18).unwrap()
    }

    #[test]
    fn block_length_respects_delta_and_memory() {
        assert_eq!(score_block_length(4, 0.27, 1000), 12); // ceil(3/0.27)
        assert_eq!(score_block_length(4, 2.0, 1000), 4);
        assert_eq!(score_block_length(4, 0.001, 100), 100); // clamped to k
    }

    #[test]
    fn covariance_diagonal_positive() {
        let params = table1();
        let times: Vec<f64> = (0..6000).map(|i| i as f64).collect();
        let series = simulate_exceedances(&params, &times, 21).unwrap();
        let cov = sandwich_covariance(&series, &params, &PLConfig::default()).unwrap();
        for a in 0..4 {
            assert!(cov[a][a] > 0.0, "diag {a}: {}", cov[a][a]);
            for b in 0..4 {
                assert!((cov[a][b] - cov[b][a]).abs() <= 1e-14 + 1e-10 * cov[a][b].abs());
            }
        }
    }

    #[test]
    fn dual_step_hessians_agree() {
        let params = table1();
        let times: Vec<f64> = (0..4000).map(|i| i as f64).collect();
        let series = simulate_exceedances(&params, &times, 8).unwrap();
        let pairs = build_pairs(&series, 4);
        let (richardson, fine) = hessian_mean_log_pl(&series, &params, &pairs, HESS_STEP).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                // normalise by the curvature scale: cross entries can sit
                // near zero while the diagonal is O(1)
                let scale = (richardson[a][a].abs() * richardson[b][b].abs()).sqrt().max(1e-8);
                assert!(
                    ((richardson[a][b] - fine[a][b]) / scale).abs() < 1e-4,
                    "H[{a}][{b}]: {} vs {} (scale {scale})",
                    richardson[a][b],
                    fine[a][b]
                );
            }
        }
    }
}
