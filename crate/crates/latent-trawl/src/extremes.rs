//! Extremal dependence diagnostics: the conditional pair CDF `F_2e` and its
//! inverse, the conditional tail dependence function, runs declustering for
//! the extremal index, and the empirical chi estimator.

use serde::{Deserialize, Serialize};

use crate::model::{pair_weights, ModelParams, PairWeights};
use crate::stats::quantile_linear;
use crate::{Error, Result};

/// Accuracy of the `F_2e` inversion.
const F2E_INV_TOL: f64 = 1e-10;

/// Latent-scale ingredients of the two-point diagnostics at one lag.
struct PairTail {
    beta: f64,
    kappa: f64,
    w: PairWeights,
}

impl PairTail {
    fn new(params: &ModelParams, h: f64) -> Result<Self> {
        let (alpha, beta) = params.latent_alpha_beta();
        Ok(Self {
            beta,
            kappa: params.kappa(),
            w: pair_weights(alpha, params.trawl(), h)?,
        })
    }

    /// `1 - F_2e(x) = (1 + x/(β+2κ))^{-b0h} (1 + x/(β+κ))^{-b0}`.
    fn survivor(&self, x: f64) -> f64 {
        (-self.w.b0h * (1.0 + x / (self.beta + 2.0 * self.kappa)).ln()
            - self.w.b0 * (1.0 + x / (self.beta + self.kappa)).ln())
        .exp()
    }

    fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survivor(x)
    }

    fn density(&self, x: f64) -> f64 {
        self.survivor(x)
            * (self.w.b0h / (self.beta + 2.0 * self.kappa + x)
                + self.w.b0 / (self.beta + self.kappa + x))
    }

    /// Bracketed Newton inversion with bisection fallback; the upper bracket
    /// doubles from `β+κ` because the right tail can be very heavy.
    fn inverse(&self, p: f64) -> Result<f64> {
        if p == 0.0 {
            return Ok(0.0);
        }
        let mut lo = 0.0f64;
        let mut hi = self.beta + self.kappa;
        let mut guard = 0;
        while self.cdf(hi) < p {
            lo = hi;
            hi *= 2.0;
            guard += 1;
            if guard > 4096 {
                return Err(Error::RootFinding(format!("no bracket for F_2e at p = {p}")));
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let err = self.cdf(x) - p;
            if err.abs() <= F2E_INV_TOL {
                return Ok(x);
            }
            if err > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = self.density(x);
            let newton = x - err / d;
            x = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        Err(Error::RootFinding(format!("F_2e inversion stalled at p = {p}")))
    }
}

/// `F_2e(x) = P(X_0 ≤ x | X_0 > 0, X_h > 0)`, the common conditional CDF of
/// either coordinate of a positive pair.
///
/// MT-variant arguments are on the observed scale and pass through `g⁻¹`.
pub fn f2e(params: &ModelParams, h: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidInput(format!("argument must be >= 0, got {x}")));
    }
    let tail = PairTail::new(params, h)?;
    let x = match params.mt_transform() {
        Some(t) => t.inverse(x)?,
        None => x,
    };
    Ok(tail.cdf(x))
}

/// Unique root of `F_2e(x) = p` for `p ∈ [0, 1)`, to absolute accuracy 1e-10.
pub fn f2e_inverse(params: &ModelParams, h: f64, p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidInput(format!(
            "probability must be in [0, 1), got {p}"
        )));
    }
    let tail = PairTail::new(params, h)?;
    let x = tail.inverse(p)?;
    Ok(match params.mt_transform() {
        Some(t) => t.forward(x)?,
        None => x,
    })
}

/// Conditional tail dependence function
/// `φ(h, u1, u2) = (1 + q2/(β+2κ+q1))^{-b0h} (1 + q2/(β+κ))^{-b0}` with
/// `q_i = F_2e⁻¹(u_i)`.
///
/// Rank-based, hence identical on the latent and transformed scales.
pub fn cond_tail_dep(params: &ModelParams, h: f64, u1: f64, u2: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&u1) || !(0.0..1.0).contains(&u2) {
        return Err(Error::InvalidInput(format!(
            "levels must be in [0, 1), got ({u1}, {u2})"
        )));
    }
    let tail = PairTail::new(params, h)?;
    let q1 = tail.inverse(u1)?;
    let q2 = tail.inverse(u2)?;
    let log_phi = -tail.w.b0h * (1.0 + q2 / (tail.beta + 2.0 * tail.kappa + q1)).ln()
        - tail.w.b0 * (1.0 + q2 / (tail.beta + tail.kappa)).ln();
    Ok(log_phi.exp())
}

/// Diagonal `φ(h, u, u)` on a grid of levels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailDepCurve {
    pub lag: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn tail_dep_curve(params: &ModelParams, h: f64, grid: &[f64]) -> Result<TailDepCurve> {
    let values = grid
        .iter()
        .map(|&u| cond_tail_dep(params, h, u, u))
        .collect::<Result<Vec<_>>>()?;
    Ok(TailDepCurve {
        lag: h,
        grid: grid.to_vec(),
        values,
    })
}

/// The analytic limit `φ(h) = lim_{u↑1} φ(h, u, u)`, which is zero for every
/// lag (asymptotic independence), with the evaluated decay sequence attached.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    /// The limit itself; identically zero for this model.
    pub limit: f64,
    /// Shape of the non-shared slice; larger values decay faster.
    pub b_h: f64,
    /// Shape of the shared slice.
    pub b_0h: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub note: String,
}

pub fn cond_tail_dep_limit(params: &ModelParams, h: f64) -> Result<DecayReport> {
    let (alpha, _) = params.latent_alpha_beta();
    let w = pair_weights(alpha, params.trawl(), h)?;
    let grid: Vec<f64> = (1..=6).map(|k| 1.0 - 10f64.powi(-k)).collect();
    let curve = tail_dep_curve(params, h, &grid)?;
    Ok(DecayReport {
        limit: 0.0,
        b_h: w.b0,
        b_0h: w.b0h,
        grid,
        values: curve.values,
        note: format!(
            "phi(h, u, u) -> 0 as u -> 1; decay accelerates with b_h = {:.6} \
             (smaller trawl overlap decays faster)",
            w.b0
        ),
    })
}

/// Runs-declustering summary: `θ̂` is the reciprocal mean cluster size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub threshold: f64,
    pub run_length: usize,
    pub n_clusters: usize,
    pub n_exceedances: usize,
    /// `n_clusters / n_exceedances`, in `(0, 1]`.
    pub theta_hat: f64,
}

/// Runs declustering: a cluster terminates once `run_length` consecutive
/// observations sit at or below the threshold.
pub fn extremal_index_runs(
    values: &[f64],
    threshold: f64,
    run_length: usize,
) -> Result<ClusterSummary> {
    if values.is_empty() {
        return Err(Error::InvalidInput("empty series".into()));
    }
    if run_length < 1 {
        return Err(Error::InvalidParam("run length must be >= 1".into()));
    }
    let mut n_exceedances = 0usize;
    let mut n_clusters = 0usize;
    let mut in_cluster = false;
    let mut below_run = 0usize;
    for &v in values {
        if v > threshold {
            n_exceedances += 1;
            if !in_cluster {
                n_clusters += 1;
                in_cluster = true;
            }
            below_run = 0;
        } else {
            below_run += 1;
            if in_cluster && below_run >= run_length {
                in_cluster = false;
            }
        }
    }
    if n_exceedances == 0 {
        return Err(Error::InvalidInput(format!(
            "no exceedances above threshold {threshold}"
        )));
    }
    Ok(ClusterSummary {
        threshold,
        run_length,
        n_clusters,
        n_exceedances,
        theta_hat: n_clusters as f64 / n_exceedances as f64,
    })
}

/// Empirical conditional exceedance frequency on the rank scale at one grid
/// level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChiPoint {
    pub u: f64,
    pub chi: f64,
    /// Binomial standard error given the conditioning count.
    pub se: f64,
    pub n_conditioning: usize,
}

/// Empirical `χ(u) = P(F(X_{j+lag}) > u | F(X_j) > u)` with binomial standard
/// errors; thresholds are taken as marginal quantiles of the series itself.
pub fn empirical_chi(values: &[f64], u_grid: &[f64], lag: usize) -> Result<Vec<ChiPoint>> {
    if lag == 0 {
        return Err(Error::InvalidParam("lag must be >= 1".into()));
    }
    if values.len() < lag + 100 {
        return Err(Error::InvalidInput(format!(
            "need at least 100 joint observations at lag {lag}, got {}",
            values.len().saturating_sub(lag)
        )));
    }
    let mut out = Vec::with_capacity(u_grid.len());
    for &u in u_grid {
        let cutoff = quantile_linear(values, u)?;
        let mut conditioning = 0usize;
        let mut joint = 0usize;
        for j in 0..values.len() - lag {
            if values[j] > cutoff {
                conditioning += 1;
                if values[j + lag] > cutoff {
                    joint += 1;
                }
            }
        }
        if conditioning == 0 {
            return Err(Error::InvalidInput(format!(
                "no exceedances above the {u} quantile"
            )));
        }
        let chi = joint as f64 / conditioning as f64;
        out.push(ChiPoint {
            u,
            chi,
            se: (chi * (1.0 - chi) / conditioning as f64).sqrt(),
            n_conditioning: conditioning,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trawl::TrawlSpec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table1() -> ModelParams {
        ModelParams::original(TrawlSpec::exponential(0.27).unwrap(), 6.33, 20.12, 12.18).unwrap()
    }

    #[test]
    fn f2e_is_a_proper_cdf() {
        let params = table1();
        assert_relative_eq!(f2e(&params, 1.0, 0.0).unwrap(), 0.0);
        assert!(f2e(&params, 1.0, 1e9).unwrap() > 1.0 - 1e-6);
        let mut last = -1.0;
        for i in 0..200 {
            let x = i as f64 * 0.5;
            let v = f2e(&params, 1.0, x).unwrap();
            assert!(v >= last);
            last = v;
        }
        assert!(f2e(&params, 1.0, -0.1).is_err());
    }

    #[test]
    fn f2e_inverse_roundtrip() {
        let params = table1();
        for p in [0.0, 0.1, 0.5, 0.9, 0.99, 0.9999] {
            let x = f2e_inverse(&params, 1.0, p).unwrap();
            assert!((f2e(&params, 1.0, x).unwrap() - p).abs() <= 1e-9, "p = {p}");
        }
        assert!(f2e_inverse(&params, 1.0, 1.0).is_err());
    }

    #[test]
    fn f2e_inverse_limit_case_analytic() {
        // h large: b0h -> 0 and the single-factor inverse is
        // (beta+kappa)((1-p)^{-1/b0} - 1)
        let params = table1();
        let h = 200.0;
        let b0 = 6.33 * (1.0 - params.trawl().acf(h).unwrap());
        for p in [0.2f64, 0.7, 0.95] {
            let expected = (20.12 + 12.18) * ((1.0 - p).powf(-1.0 / b0) - 1.0);
            let got = f2e_inverse(&params, h, p).unwrap();
            assert_relative_eq!(got, expected, max_relative = 1e-6);
        }
    }

    #[test]
    fn margins_of_the_tail_dependence_function() {
        let params = table1();
        for u in [0.0, 0.3, 0.8, 0.999] {
            assert_relative_eq!(cond_tail_dep(&params, 1.0, u, 0.0).unwrap(), 1.0);
            assert!(
                (cond_tail_dep(&params, 1.0, 0.0, u).unwrap() - (1.0 - u)).abs() <= 1e-9,
                "u = {u}"
            );
        }
    }

    #[test]
    fn diagonal_decays_to_zero() {
        let params = table1();
        let report = cond_tail_dep_limit(&params, 1.0).unwrap();
        assert_eq!(report.limit, 0.0);
        for w in report.values.windows(2) {
            assert!(w[1] < w[0], "decay sequence must fall: {:?}", report.values);
        }
        let phi_high = cond_tail_dep(&params, 1.0, 0.999, 0.999).unwrap();
        assert!(phi_high < 0.02, "phi(1, .999, .999) = {phi_high}");
    }

    #[test]
    fn smaller_rho_decays_slower() {
        let slow = ModelParams::original(TrawlSpec::exponential(0.05).unwrap(), 6.33, 20.12, 12.18)
            .unwrap();
        let fast = ModelParams::original(TrawlSpec::exponential(1.0).unwrap(), 6.33, 20.12, 12.18)
            .unwrap();
        for u in [0.9, 0.99, 0.999] {
            let a = cond_tail_dep(&slow, 1.0, u, u).unwrap();
            let b = cond_tail_dep(&fast, 1.0, u, u).unwrap();
            assert!(a > b, "u = {u}: slow {a} fast {b}");
        }
    }

    #[test]
    fn mt_diagnostics_work_on_the_transformed_scale() {
        let params =
            ModelParams::mt(TrawlSpec::exponential(0.17).unwrap(), 32.69, -0.11, 20.73).unwrap();
        // f2e on the observed scale maps through g
        let z = f2e_inverse(&params, 1.0, 0.5).unwrap();
        assert!(z > 0.0 && z < params.marginal_gpd().upper_endpoint().unwrap());
        assert_relative_eq!(f2e(&params, 1.0, z).unwrap(), 0.5, epsilon = 1e-9);
        // margins hold unchanged
        assert_relative_eq!(cond_tail_dep(&params, 1.0, 0.7, 0.0).unwrap(), 1.0);
        assert!((cond_tail_dep(&params, 1.0, 0.0, 0.7).unwrap() - 0.3).abs() < 1e-9);
    }

    #[test]
    fn declustering_counts_paired_exceedances() {
        // exceedance pairs separated by long quiet stretches: theta = 1/2
        let mut values = Vec::new();
        for _ in 0..50 {
            values.extend_from_slice(&[5.0, 5.0]);
            values.extend_from_slice(&[0.0; 10]);
        }
        let s = extremal_index_runs(&values, 1.0, 3).unwrap();
        assert_eq!(s.n_exceedances, 100);
        assert_eq!(s.n_clusters, 50);
        assert_relative_eq!(s.theta_hat, 0.5);
    }

    #[test]
    fn declustering_short_gaps_merge_clusters() {
        // gaps of 2 below-threshold observations do not terminate a cluster
        // at run length 3
        let values = [5.0, 0.0, 0.0, 5.0, 0.0, 0.0, 0.0, 5.0];
        let s = extremal_index_runs(&values, 1.0, 3).unwrap();
        assert_eq!(s.n_clusters, 2);
        assert_eq!(s.n_exceedances, 3);
        let s1 = extremal_index_runs(&values, 1.0, 2).unwrap();
        assert_eq!(s1.n_clusters, 3);
    }

    #[test]
    fn declustering_rejects_empty_cases() {
        assert!(extremal_index_runs(&[], 1.0, 3).is_err());
        assert!(extremal_index_runs(&[0.0, 0.5], 1.0, 3).is_err());
        assert!(extremal_index_runs(&[2.0], 1.0, 0).is_err());
    }

    #[test]
    fn iid_runs_estimator_matches_its_binomial_bias() {
        // for an iid indicator with exceedance probability p the runs
        // estimator concentrates at (1-p)^r, not at 1, below high thresholds
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let values: Vec<f64> = (0..1_000_000).map(|_| rng.random::<f64>()).collect();
        let s = extremal_index_runs(&values, 0.95, 3).unwrap();
        let expected = 0.95f64.powi(3);
        assert!(
            (s.theta_hat - expected).abs() < 0.01,
            "theta {} vs (1-p)^3 = {expected}",
            s.theta_hat
        );
        // near one only as the threshold rises
        let high = extremal_index_runs(&values, 0.998, 3).unwrap();
        assert!((high.theta_hat - 1.0).abs() < 0.02, "theta {}", high.theta_hat);
    }

    #[test]
    fn empirical_chi_independent_and_comonotone_fixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let values: Vec<f64> = (0..200_000).map(|_| rng.random::<f64>()).collect();
        let chi = empirical_chi(&values, &[0.9], 1).unwrap();
        assert!((chi[0].chi - 0.1).abs() < 4.0 * chi[0].se + 0.005, "chi {}", chi[0].chi);

        // strictly increasing series: comonotone pairs, chi = 1 at every level
        let mono: Vec<f64> = (0..5000).map(|i| i as f64).collect();
        for point in empirical_chi(&mono, &[0.5, 0.9, 0.99], 3).unwrap() {
            assert_relative_eq!(point.chi, 1.0);
        }
        assert!(empirical_chi(&mono[..50], &[0.9], 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn margins_exact_for_random_parameters(
            alpha in 0.5f64..8.0,
            beta in 0.5f64..30.0,
            kappa in 0.1f64..30.0,
            rho in 0.05f64..2.0,
            h in 0.3f64..8.0,
            u in 0.0f64..0.999,
        ) {
            let params = ModelParams::original(
                TrawlSpec::exponential(rho).unwrap(), alpha, beta, kappa).unwrap();
            prop_assert!((cond_tail_dep(&params, h, u, 0.0).unwrap() - 1.0).abs() <= 1e-12);
            let chi0 = cond_tail_dep(&params, h, 0.0, u).unwrap();
            // limited only by the 1e-10 inversion accuracy of F_2e
            prop_assert!((chi0 - (1.0 - u)).abs() <= 1e-9);
        }

        #[test]
        fn diagonal_nonincreasing_on_upper_levels(
            alpha in 0.5f64..8.0,
            beta in 0.5f64..30.0,
            kappa in 0.1f64..30.0,
            rho in 0.05f64..2.0,
            h in 0.3f64..8.0,
        ) {
            let params = ModelParams::original(
                TrawlSpec::exponential(rho).unwrap(), alpha, beta, kappa).unwrap();
            let grid = [0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99];
            let curve = tail_dep_curve(&params, h, &grid).unwrap();
            for w in curve.values.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
        }

        #[test]
        fn theta_hat_in_unit_interval(
            values in proptest::collection::vec(0.0f64..10.0, 1..200),
            threshold in 0.0f64..9.0,
            run in 1usize..5,
        ) {
            match extremal_index_runs(&values, threshold, run) {
                Ok(s) => {
                    prop_assert!(s.theta_hat > 0.0 && s.theta_hat <= 1.0);
                    prop_assert!(s.n_clusters <= s.n_exceedances);
                }
                Err(_) => {
                    prop_assert!(values.iter().all(|v| *v <= threshold));
                }
            }
        }
    }
}
