//! The pairwise-likelihood objective and the exact small-sample likelihood
//! kept as its oracle.

use crate::inference::fit::PLConfig;
use crate::inference::pairs::PairContext;
use crate::model::{ExceedanceSeries, ModelParams};
use crate::trawl::{joint_laplace_with, SlicePartition};
use crate::{Error, Result};

/// Pairs `(a, b, h)` of observation positions with original-index separation
/// at most `delta` and time lag `h = t_b - t_a`; gaps in the data enlarge the
/// index separation and so drop pairs spanning them.
pub(crate) fn build_pairs(series: &ExceedanceSeries, delta: usize) -> Vec<(usize, usize, f64)> {
    let idx = series.indices();
    let times = series.times();
    let mut pairs = Vec::new();
    for a in 0..series.len() {
        for b in a + 1..series.len() {
            if idx[b] - idx[a] > delta {
                break;
            }
            pairs.push((a, b, times[b] - times[a]));
        }
    }
    pairs
}

/// Number of admissible pairs at separation `delta`.
pub fn n_pairs(series: &ExceedanceSeries, delta: usize) -> usize {
    build_pairs(series, delta).len()
}

/// Log pairwise likelihood
/// `Σ_{i<j, j-i ≤ Δ} ln f(x_i, x_j)`, dispatching each pair on its
/// zero/positive pattern. Pairs are summed in `(i, j)` order.
pub fn log_pairwise_likelihood(
    series: &ExceedanceSeries,
    params: &ModelParams,
    config: &PLConfig,
) -> Result<f64> {
    let pairs = build_pairs(series, config.delta);
    log_pl_with_pairs(series, params, &pairs)
}

pub(crate) fn log_pl_with_pairs(
    series: &ExceedanceSeries,
    params: &ModelParams,
    pairs: &[(usize, usize, f64)],
) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::InvalidInput("empty series".into()));
    }
    let mut ctx = PairContext::new(params);
    let values = series.values();
    let mut total = 0.0;
    for &(a, b, h) in pairs {
        let log_f = ctx.log_density(h, values[a], values[b])?;
        if !log_f.is_finite() {
            return Err(Error::NonpositivePairDensity {
                i: series.indices()[a],
                j: series.indices()[b],
                value: log_f.exp(),
            });
        }
        total += log_f;
    }
    Ok(total)
}

/// Per-observation score groups: entry `i` sums the log pair densities of the
/// pairs whose first coordinate is observation `i`. Their total is the log
/// pairwise likelihood; the sandwich estimator differentiates these.
pub(crate) fn log_pl_per_observation(
    series: &ExceedanceSeries,
    params: &ModelParams,
    pairs: &[(usize, usize, f64)],
) -> Result<Vec<f64>> {
    let mut ctx = PairContext::new(params);
    let values = series.values();
    let mut per_obs = vec![0.0; series.len()];
    for &(a, b, h) in pairs {
        let log_f = ctx.log_density(h, values[a], values[b])?;
        if !log_f.is_finite() {
            return Err(Error::NonpositivePairDensity {
                i: series.indices()[a],
                j: series.indices()[b],
                value: log_f.exp(),
            });
        }
        per_obs[a] += log_f;
    }
    Ok(per_obs)
}

/// Exact joint density of a short series by the `2^m` inclusion-exclusion
/// expansion over the zero pattern, with the mixed partial derivatives of the
/// joint Laplace transform taken by central differences (relative step 1e-5).
///
/// Exponential in the number of zeros and factorial-free only because `k` is
/// capped at 12; this is a validation oracle, not a fitting path.
pub fn full_likelihood_small_k(series: &ExceedanceSeries, params: &ModelParams) -> Result<f64> {
    const MAX_K: usize = 12;
    const REL_STEP: f64 = 1e-5;
    let k = series.len();
    if k > MAX_K {
        return Err(Error::InvalidInput(format!(
            "full likelihood is limited to {MAX_K} observations, got {k}"
        )));
    }
    let kappa = params.kappa();
    let seed = params.latent_seed();
    let mt = params.mt_transform();

    // map to the latent scale; collect the Jacobian of the MT layer
    let mut log_jacobian = 0.0;
    let mut latent = Vec::with_capacity(k);
    for &v in series.values() {
        if v == 0.0 {
            latent.push(0.0);
        } else {
            match &mt {
                None => latent.push(v),
                Some(t) => {
                    latent.push(t.inverse(v)?);
                    log_jacobian += t.jacobian(v)?.ln();
                }
            }
        }
    }

    let times = series.times();
    let positives: Vec<usize> = (0..k).filter(|&j| latent[j] > 0.0).collect();
    let zeros: Vec<usize> = (0..k).filter(|&j| latent[j] == 0.0).collect();
    let l = positives.len();
    let m = zeros.len();

    let mut total = 0.0;
    for zero_mask in 0u32..(1 << m) {
        let t = zero_mask.count_ones() as usize;
        // active points: all positives plus the chosen zeros, in time order
        let mut active: Vec<(usize, Option<usize>)> = Vec::with_capacity(l + t);
        for (r, &j) in positives.iter().enumerate() {
            active.push((j, Some(r)));
        }
        for (s, &j) in zeros.iter().enumerate() {
            if zero_mask & (1 << s) != 0 {
                active.push((j, None));
            }
        }
        active.sort_by_key(|&(j, _)| j);
        if active.is_empty() {
            // the empty subset contributes E[1] = 1
            total += 1.0;
            continue;
        }
        let sub_times: Vec<f64> = active.iter().map(|&(j, _)| times[j]).collect();
        let partition = SlicePartition::new(params.trawl(), &sub_times)?;
        let base: Vec<f64> = active
            .iter()
            .map(|&(j, r)| match r {
                Some(_) => kappa + latent[j],
                None => kappa,
            })
            .collect();
        let steps: Vec<f64> = base.iter().map(|u| REL_STEP * u.abs().max(1.0)).collect();
        // positions of the differentiated coordinates within `active`
        let pos_slots: Vec<usize> = active
            .iter()
            .enumerate()
            .filter_map(|(slot, &(_, r))| r.map(|_| slot))
            .collect();

        // mixed l-th central difference over the positive coordinates
        let mut derivative = 0.0;
        for corner in 0u32..(1 << l) {
            let mut us = base.clone();
            let mut sign = 1.0;
            for (r, &slot) in pos_slots.iter().enumerate() {
                if corner & (1 << r) != 0 {
                    us[slot] += steps[slot];
                } else {
                    us[slot] -= steps[slot];
                    sign = -sign;
                }
            }
            derivative += sign * joint_laplace_with(&seed, params.trawl(), &partition, &us)?;
        }
        for &slot in &pos_slots {
            derivative /= 2.0 * steps[slot];
        }

        let parity = if (t + l) % 2 == 0 { 1.0 } else { -1.0 };
        total += parity * derivative;
    }
    Ok(total * log_jacobian.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::pairs::pair_density;
    use crate::model::simulate_exceedances;
    use crate::trawl::TrawlSpec;
    use approx::assert_relative_eq;

    fn table1() -> ModelParams {
        ModelParams::original(TrawlSpec::exponential(0.27).unwrap(), 6.33, 20.12, 12.18).unwrap()
    }

    fn series(times: Vec<f64>, values: Vec<f64>) -> ExceedanceSeries {
        ExceedanceSeries::new(times, values, 0.0).unwrap()
    }

    #[test]
    fn two_point_series_is_a_single_pair() {
        let params = table1();
        let s = series(vec![0.0, 1.0], vec![0.0, 2.0]);
        let config = PLConfig::default();
        let ll = log_pairwise_likelihood(&s, &params, &config).unwrap();
        let expected = pair_density(&params, 1.0, 0.0, 2.0).unwrap().ln();
        assert_relative_eq!(ll, expected, max_relative = 1e-13);
    }

    #[test]
    fn large_delta_uses_all_pairs() {
        let params = table1();
        let s = series(vec![0.0, 1.0, 2.0, 3.5], vec![0.0, 2.0, 0.0, 1.0]);
        let all = PLConfig {
            delta: 3,
            ..PLConfig::default()
        };
        let huge = PLConfig {
            delta: 1000,
            ..PLConfig::default()
        };
        assert_eq!(n_pairs(&s, 3), 6);
        assert_relative_eq!(
            log_pairwise_likelihood(&s, &params, &all).unwrap(),
            log_pairwise_likelihood(&s, &params, &huge).unwrap()
        );
    }

    #[test]
    fn gaps_drop_pairs_by_index_separation() {
        let params = table1();
        // original indices 0, 1, 5: the (1, 5) and (0, 5) pairs exceed delta 3
        let s = ExceedanceSeries::with_indices(
            vec![0.0, 1.0, 5.0],
            vec![0.0, 2.0, 1.0],
            vec![0, 1, 5],
            0.0,
        )
        .unwrap();
        assert_eq!(n_pairs(&s, 3), 1);
        let config = PLConfig {
            delta: 3,
            ..PLConfig::default()
        };
        let ll = log_pairwise_likelihood(&s, &params, &config).unwrap();
        assert_relative_eq!(ll, pair_density(&params, 1.0, 0.0, 2.0).unwrap().ln());
    }

    #[test]
    fn per_observation_groups_sum_to_total() {
        let params = table1();
        let times: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let s = simulate_exceedances(&params, &times, 5).unwrap();
        let pairs = build_pairs(&s, 4);
        let per_obs = log_pl_per_observation(&s, &params, &pairs).unwrap();
        let total = log_pl_with_pairs(&s, &params, &pairs).unwrap();
        assert_relative_eq!(per_obs.iter().sum::<f64>(), total, max_relative = 1e-12);
    }

    #[test]
    fn full_likelihood_single_zero_is_atom_probability() {
        let params = table1();
        let s = series(vec![0.0], vec![0.0]);
        let f = full_likelihood_small_k(&s, &params).unwrap();
        assert_relative_eq!(f, 1.0 - params.exceedance_prob(), max_relative = 1e-10);
    }

    #[test]
    fn full_likelihood_single_positive_is_marginal_density() {
        let params = table1();
        let x = 1.7;
        let s = series(vec![0.0], vec![x]);
        let f = full_likelihood_small_k(&s, &params).unwrap();
        let marg = 6.33 / 20.12 * (1.0 + (12.18 + x) / 20.12f64).powf(-7.33);
        assert_relative_eq!(f, marg, max_relative = 1e-7);
    }

    #[test]
    fn full_likelihood_matches_pair_densities_at_k2() {
        let params = table1();
        for (x1, x2) in [(0.0, 0.0), (1.3, 0.0), (0.0, 0.4), (2.0, 0.9)] {
            let s = series(vec![0.0, 1.0], vec![x1, x2]);
            let full = full_likelihood_small_k(&s, &params).unwrap();
            let pair = pair_density(&params, 1.0, x1, x2).unwrap();
            assert_relative_eq!(full, pair, max_relative = 1e-5);
        }
    }

    #[test]
    fn full_likelihood_mt_matches_pair_density_at_k2() {
        let params =
            ModelParams::mt(TrawlSpec::exponential(0.17).unwrap(), 32.69, -0.11, 20.73).unwrap();
        for (z1, z2) in [(0.0, 0.0), (20.0, 0.0), (15.0, 80.0)] {
            let s = series(vec![0.0, 1.0], vec![z1, z2]);
            let full = full_likelihood_small_k(&s, &params).unwrap();
            let pair = pair_density(&params, 1.0, z1, z2).unwrap();
            // the transformed tail maps to huge latent arguments, which
            // amplifies cancellation in the finite-difference oracle
            assert_relative_eq!(full, pair, max_relative = 1e-4);
        }
    }

    #[test]
    fn full_likelihood_k3_positive_zero_positive_consistency() {
        // three points with a zero in the middle: compare against the
        // bin-probability estimate from simulation
        let params = ModelParams::original(TrawlSpec::exponential(0.5).unwrap(), 2.0, 2.0, 0.5)
            .unwrap();
        let times = vec![0.0, 1.0, 2.0];
        let (x1, x3) = (0.6, 1.0);
        let width = 0.4;
        let n = 400_000;
        let mut hits = 0usize;
        for seed in 0..n {
            let s = simulate_exceedances(&params, &times, seed as u64).unwrap();
            let v = s.values();
            if v[1] == 0.0
                && (v[0] - x1).abs() <= width / 2.0
                && v[0] > 0.0
                && (v[2] - x3).abs() <= width / 2.0
                && v[2] > 0.0
            {
                hits += 1;
            }
        }
        let p_hat = hits as f64 / n as f64;
        let se = (p_hat * (1.0 - p_hat) / n as f64).sqrt();
        // average the density over the bin with a 3x3 Simpson grid
        let simpson = [
            (1.0, -0.5),
            (4.0, 0.0),
            (1.0, 0.5),
        ];
        let mut density = 0.0;
        for &(w1, o1) in &simpson {
            for &(w3, o3) in &simpson {
                let s = series(times.clone(), vec![x1 + o1 * width, 0.0, x3 + o3 * width]);
                density += w1 * w3 * full_likelihood_small_k(&s, &params).unwrap();
            }
        }
        density /= 36.0;
        let expected = density * width * width;
        assert!(
            (p_hat - expected).abs() < 4.0 * se + 1e-9,
            "pattern probability {p_hat} vs {expected} (se {se})"
        );
    }

    #[test]
    fn full_likelihood_rejects_large_series() {
        let params = table1();
        let times: Vec<f64> = (0..13).map(|i| i as f64).collect();
        let s = series(times, vec![0.0; 13]);
        assert!(full_likelihood_small_k(&s, &params).is_err());
    }
}
