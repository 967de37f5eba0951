//! Trawl-set geometry, Gamma Lévy seed, slice partitions and exact simulation
//! of the latent Gamma trawl process.
//!
//! A trawl set `A` sits below a monotone height function `d(s)` for `s ≤ 0` and
//! is translated along the time axis, `A_t = A + (0, t)`. Evaluating a
//! homogeneous Lévy basis on `A_t` yields a stationary process whose marginal
//! law is fixed by the seed and whose autocorrelation is
//! `leb(A ∩ A_h) / leb(A)`. The height functions supported here are convex
//! combinations of exponentials, `d(s) = Σ_i w_i exp(ρ_i s)`.
//!
//! For grid times `t_1 < … < t_k` the union of the trawl sets splits into
//! slices on which set membership is constant. Monotonicity makes membership
//! index sets contiguous, so the generic `2^k - 1` partition collapses to at
//! most `k(k+1)/2` interval slices; [`oracle::brute_force_partition`] keeps the
//! generic construction around for validation.
//!
//! [`oracle::brute_force_partition`]: crate::oracle::brute_force_partition

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Weight sums are accepted when within this distance of one.
const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Slices whose relative measure falls below `exp` of this (negative) log are
/// lumped into an independent per-point remainder during simulation. Keeps the
/// simulated joint law within ~1e-12 of exact while the marginals stay exact.
const SIM_TRUNC_LOG: f64 = -27.631_021_115_928_547; // ln(1e-12)

/// One exponential component of a trawl height function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrawlTerm {
    /// Mixture weight `w_i > 0`; weights sum to one.
    pub weight: f64,
    /// Decay rate `ρ_i > 0` (inverse time).
    pub decay: f64,
}

/// Geometry of a (general) exponential trawl set.
///
/// The order-`p` trawl is bounded above by `d(s) = Σ_{i=1}^p w_i exp(ρ_i s)`
/// with `Σ w_i = 1`; `p = 1` is the plain exponential trawl `exp(ρ s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrawlSpec {
    terms: Vec<TrawlTerm>,
}

impl TrawlSpec {
    /// Builds a general exponential trawl from its components.
    pub fn new(terms: Vec<TrawlTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParam("trawl needs at least one term".into()));
        }
        for t in &terms {
            if !(t.weight > 0.0) || !t.weight.is_finite() {
                return Err(Error::InvalidParam(format!(
                    "trawl weight must be positive, got {}",
                    t.weight
                )));
            }
            if !(t.decay > 0.0) || !t.decay.is_finite() {
                return Err(Error::InvalidParam(format!(
                    "trawl decay must be positive, got {}",
                    t.decay
                )));
            }
        }
        let sum: f64 = terms.iter().map(|t| t.weight).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidParam(format!(
                "trawl weights must sum to 1, got {sum}"
            )));
        }
        Ok(Self { terms })
    }

    /// The plain exponential trawl of decay `rho`.
    pub fn exponential(rho: f64) -> Result<Self> {
        Self::new(vec![TrawlTerm {
            weight: 1.0,
            decay: rho,
        }])
    }

    /// Number of exponential components.
    pub fn order(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[TrawlTerm] {
        &self.terms
    }

    /// The decay rate, for order-1 trawls.
    pub fn single_decay(&self) -> Option<f64> {
        (self.terms.len() == 1).then(|| self.terms[0].decay)
    }

    /// Lebesgue measure of the trawl set, `Σ_i w_i / ρ_i`.
    pub fn leb(&self) -> f64 {
        self.terms.iter().map(|t| t.weight / t.decay).sum()
    }

    /// Measure of the intersection `A ∩ A_h`, i.e. `Σ_i w_i exp(-ρ_i h) / ρ_i`.
    ///
    /// Equals [`leb`](Self::leb) at `h = 0` and decreases to zero.
    pub fn leb_intersection(&self, h: f64) -> Result<f64> {
        if !(h >= 0.0) {
            return Err(Error::InvalidInput(format!("lag must be >= 0, got {h}")));
        }
        Ok(self.leb_span(h))
    }

    /// Autocorrelation of the trawl process, `leb(A ∩ A_h) / leb(A)`.
    pub fn acf(&self, h: f64) -> Result<f64> {
        Ok(self.leb_intersection(h)? / self.leb())
    }

    /// Measure of the intersection of trawl sets whose times span `span >= 0`.
    /// No validation; internal hot path.
    pub(crate) fn leb_span(&self, span: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.weight * (-t.decay * span).exp() / t.decay)
            .sum()
    }
}

/// Gamma Lévy seed normalised so the trawl process has `Gamma(alpha, beta)`
/// marginals: the seed law on a set of measure `m` is
/// `Gamma(alpha * m / leb(A), beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSeed {
    alpha: f64,
    beta: f64,
}

impl GammaSeed {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParam(format!("alpha must be > 0, got {alpha}")));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParam(format!("beta must be > 0, got {beta}")));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Per-unit-area Laplace cumulant of the seed,
    /// `C(u) = -(alpha / leb(A)) ln(1 + u / beta)`.
    ///
    /// Defined for `u >= 0` (the inference path) and, by analytic
    /// continuation, for any `u > -beta`.
    pub fn laplace_cumulant(&self, spec: &TrawlSpec, u: f64) -> Result<f64> {
        if !(u > -self.beta) {
            return Err(Error::InvalidInput(format!(
                "Laplace argument must exceed -beta = {}, got {u}",
                -self.beta
            )));
        }
        Ok(-(self.alpha / spec.leb()) * (1.0 + u / self.beta).ln())
    }

    /// Per-unit-area cumulant of the characteristic function,
    /// `C(u) = -(alpha / leb(A)) Ln(1 - iu / beta)`.
    ///
    /// Kept for validating the slice representation directly; inference uses
    /// the real Laplace path.
    pub fn char_cumulant(&self, spec: &TrawlSpec, u: f64) -> Complex64 {
        let z = Complex64::new(1.0, -u / self.beta);
        -Complex64::from(self.alpha / spec.leb()) * z.ln()
    }
}

/// A maximal region of the union of trawl sets on which membership is
/// constant. Membership is the contiguous index range `first..=last`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slice {
    /// First grid index covered (0-based).
    pub first: usize,
    /// Last grid index covered (inclusive).
    pub last: usize,
    /// Lebesgue measure of the region.
    pub measure: f64,
}

/// Interval-slice partition of `∪_l A_{t_l}` for strictly increasing times.
#[derive(Debug, Clone)]
pub struct SlicePartition {
    times: Vec<f64>,
    slices: Vec<Slice>,
}

impl SlicePartition {
    /// Partitions the union of trawl sets at the given times.
    ///
    /// Times must be strictly increasing (collapse ties first). All
    /// `k(k+1)/2` interval slices are returned, ordered by `(first, last)`;
    /// slices of negligible measure are kept so that measures sum exactly.
    pub fn new(spec: &TrawlSpec, times: &[f64]) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidInput("no time points".into()));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidInput(format!(
                    "times must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        let k = times.len();
        // leb of the intersection of A_{t_i}..A_{t_j}; empty ranges count as 0.
        let m = |i: isize, j: isize| -> f64 {
            if i < 0 || j >= k as isize {
                0.0
            } else {
                spec.leb_span(times[j as usize] - times[i as usize])
            }
        };
        let mut slices = Vec::with_capacity(k * (k + 1) / 2);
        for i in 0..k {
            for j in i..k {
                let (ii, jj) = (i as isize, j as isize);
                let measure =
                    (m(ii, jj) - m(ii - 1, jj) - m(ii, jj + 1) + m(ii - 1, jj + 1)).max(0.0);
                slices.push(Slice {
                    first: i,
                    last: j,
                    measure,
                });
            }
        }
        Ok(Self {
            times: times.to_vec(),
            slices,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slices(&self) -> &[Slice] {
        &self.slices
    }

    /// Sum of all slice measures, i.e. the measure of the union.
    pub fn total_measure(&self) -> f64 {
        self.slices.iter().map(|s| s.measure).sum()
    }
}

/// Measure of `∪_l A_{t_l}` by the sequential formula
/// `leb(A) + Σ_{i≥2} (leb(A) - leb(A ∩ A_{t_i - t_{i-1}}))`.
///
/// Independent of the slice partition; used to validate it.
pub fn union_measure(spec: &TrawlSpec, times: &[f64]) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::InvalidInput("no time points".into()));
    }
    let mut total = spec.leb();
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidInput("times must be strictly increasing".into()));
        }
        total += spec.leb() - spec.leb_span(w[1] - w[0]);
    }
    Ok(total)
}

fn slice_arguments(partition: &SlicePartition, us: &[f64]) -> Result<Vec<(f64, f64)>> {
    if us.len() != partition.times.len() {
        return Err(Error::InvalidInput(format!(
            "{} transform arguments for {} time points",
            us.len(),
            partition.times.len()
        )));
    }
    // prefix sums so that u_m^+ = Σ_{j in first..=last} u_j is O(1) per slice
    let mut prefix = vec![0.0; us.len() + 1];
    for (j, u) in us.iter().enumerate() {
        prefix[j + 1] = prefix[j] + u;
    }
    Ok(partition
        .slices
        .iter()
        .map(|s| (s.measure, prefix[s.last + 1] - prefix[s.first]))
        .collect())
}

/// Joint Laplace transform `E[exp(-Σ_j u_j Λ_{t_j})]` via the slice
/// representation: `exp(Σ_m leb(S_m) C(u_m^+))` where `u_m^+` sums the
/// arguments of the points covered by slice `m`.
///
/// Reduces to `(1 + u/beta)^{-alpha}` at a single point.
pub fn joint_laplace(seed: &GammaSeed, spec: &TrawlSpec, times: &[f64], us: &[f64]) -> Result<f64> {
    let partition = SlicePartition::new(spec, times)?;
    joint_laplace_with(seed, spec, &partition, us)
}

/// As [`joint_laplace`] but reusing a precomputed partition.
pub fn joint_laplace_with(
    seed: &GammaSeed,
    spec: &TrawlSpec,
    partition: &SlicePartition,
    us: &[f64],
) -> Result<f64> {
    let mut exponent = 0.0;
    for (measure, u_plus) in slice_arguments(partition, us)? {
        exponent += measure * seed.laplace_cumulant(spec, u_plus)?;
    }
    Ok(exponent.exp())
}

/// Joint characteristic function `E[exp(i Σ_j u_j Λ_{t_j})]`.
pub fn joint_char(
    seed: &GammaSeed,
    spec: &TrawlSpec,
    times: &[f64],
    us: &[f64],
) -> Result<Complex64> {
    let partition = SlicePartition::new(spec, times)?;
    let mut exponent = Complex64::new(0.0, 0.0);
    for (measure, u_plus) in slice_arguments(&partition, us)? {
        exponent += Complex64::from(measure) * seed.char_cumulant(spec, u_plus);
    }
    Ok(exponent.exp())
}

/// Draws one path of the latent Gamma trawl process at the given times.
///
/// Times must be sorted; duplicates are collapsed and share a value. The
/// stream is fully determined by `rng_seed`.
pub fn simulate_trawl(
    seed: &GammaSeed,
    spec: &TrawlSpec,
    times: &[f64],
    rng_seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    simulate_trawl_with_rng(seed, spec, times, &mut rng)
}

/// As [`simulate_trawl`] with a caller-provided RNG, so larger simulations can
/// consume a single deterministic stream.
///
/// One independent `Gamma(alpha * measure / leb(A), beta)` variable is drawn
/// per slice and `Λ_j` sums the variables of the slices covering `j`, so the
/// marginal law is exactly `Gamma(alpha, beta)`. Slices are generated per
/// exponential component (the general trawl is, in law, a superposition of
/// independent plain exponential trawls) and a slice is materialised only
/// while `exp(-ρ span)` stays above 1e-12 of the component measure; the
/// leftover mass of each point is drawn as an independent remainder so the
/// marginal shape still sums to `alpha` exactly.
pub fn simulate_trawl_with_rng<R: Rng + ?Sized>(
    seed: &GammaSeed,
    spec: &TrawlSpec,
    times: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    if times.is_empty() {
        return Err(Error::InvalidInput("no time points".into()));
    }
    for w in times.windows(2) {
        if !(w[1] >= w[0]) {
            return Err(Error::InvalidInput("times must be sorted".into()));
        }
    }
    // collapse duplicate timestamps; duplicates share the same latent value
    let mut unique: Vec<f64> = Vec::with_capacity(times.len());
    let mut back: Vec<usize> = Vec::with_capacity(times.len());
    for &t in times {
        if unique.last().is_none_or(|&last| t > last) {
            unique.push(t);
        }
        back.push(unique.len() - 1);
    }

    let k = unique.len();
    let leb = spec.leb();
    let rate = seed.beta;
    // difference arrays: adding x on [i, j] is O(1), resolved by prefix sums
    let mut value_diff = vec![0.0f64; k + 1];
    let mut shape_diff = vec![0.0f64; k + 1];

    for term in &spec.terms {
        let rho = term.decay;
        let scale = term.weight / rho; // component trawl area
        let span_max = -SIM_TRUNC_LOG / rho;
        // exp(-rho * gap) between consecutive grid points
        let egap: Vec<f64> = unique
            .windows(2)
            .map(|w| (-rho * (w[1] - w[0])).exp())
            .collect();
        for i in 0..k {
            // slice [i, j] of this component has measure
            //   scale * e^{-rho (t_j - t_i)} (1 - egap[j]) (1 - egap[i-1])
            // with boundary factors 1 at i = 0 and j = k-1.
            let left = if i == 0 { 1.0 } else { 1.0 - egap[i - 1] };
            let mut decay = 1.0; // e^{-rho (t_j - t_i)}
            for j in i..k {
                let right = if j == k - 1 { 1.0 } else { 1.0 - egap[j] };
                let measure = scale * decay * left * right;
                let shape = seed.alpha * measure / leb;
                if shape > 0.0 {
                    let draw = Gamma::new(shape, 1.0 / rate)
                        .map_err(|e| Error::InvalidParam(format!("gamma shape {shape}: {e}")))?
                        .sample(rng);
                    if draw.is_finite() {
                        value_diff[i] += draw;
                        value_diff[j + 1] -= draw;
                    }
                    shape_diff[i] += shape;
                    shape_diff[j + 1] -= shape;
                }
                if j + 1 < k {
                    decay *= egap[j];
                    if rho * (unique[j + 1] - unique[i]) > span_max * rho {
                        break;
                    }
                }
            }
        }
    }

    // per-point remainder: tops the marginal shape up to exactly alpha
    let mut values = vec![0.0f64; k];
    let mut value_acc = 0.0;
    let mut shape_acc = 0.0;
    for j in 0..k {
        value_acc += value_diff[j];
        shape_acc += shape_diff[j];
        let remainder = (seed.alpha - shape_acc).max(0.0);
        let mut v = value_acc;
        if remainder > 0.0 {
            let draw = Gamma::new(remainder, 1.0 / rate)
                .map_err(|e| Error::InvalidParam(format!("gamma shape {remainder}: {e}")))?
                .sample(rng);
            if draw.is_finite() {
                v += draw;
            }
        }
        values[j] = v;
    }

    Ok(back.into_iter().map(|idx| values[idx]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn two_term() -> TrawlSpec {
        TrawlSpec::new(vec![
            TrawlTerm {
                weight: 0.5,
                decay: 1.0,
            },
            TrawlTerm {
                weight: 0.5,
                decay: 2.0,
            },
        ])
        .unwrap()
    }

    #[test]
    fn leb_of_exponential_trawl() {
        assert_relative_eq!(TrawlSpec::exponential(0.2).unwrap().leb(), 5.0);
        assert_relative_eq!(TrawlSpec::exponential(1.0).unwrap().leb(), 1.0);
        assert_relative_eq!(two_term().leb(), 0.75);
    }

    #[test]
    fn leb_intersection_decays_from_leb() {
        let spec = TrawlSpec::exponential(0.2).unwrap();
        assert_relative_eq!(spec.leb_intersection(0.0).unwrap(), 5.0);
        assert_relative_eq!(
            spec.leb_intersection(1.0).unwrap(),
            5.0 * (-0.2f64).exp(),
            max_relative = 1e-14
        );
        assert!(spec.leb_intersection(-1.0).is_err());
        assert!(two_term().leb_intersection(500.0).unwrap() < 1e-100);
    }

    #[test]
    fn acf_matches_closed_forms() {
        let spec = TrawlSpec::exponential(0.2).unwrap();
        assert_relative_eq!(spec.acf(0.0).unwrap(), 1.0);
        assert_relative_eq!(spec.acf(1.0).unwrap(), (-0.2f64).exp(), max_relative = 1e-14);
        let mix = two_term();
        let expected = (0.5 * (-1.0f64).exp() + 0.25 * (-2.0f64).exp()) / 0.75;
        assert_relative_eq!(mix.acf(1.0).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(TrawlSpec::new(vec![]).is_err());
        assert!(TrawlSpec::exponential(0.0).is_err());
        assert!(TrawlSpec::new(vec![TrawlTerm {
            weight: 0.9,
            decay: 1.0
        }])
        .is_err());
        assert!(GammaSeed::new(0.0, 1.0).is_err());
        assert!(GammaSeed::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn single_point_partition_is_whole_trawl() {
        let spec = TrawlSpec::exponential(0.2).unwrap();
        let p = SlicePartition::new(&spec, &[3.0]).unwrap();
        assert_eq!(p.slices().len(), 1);
        assert_relative_eq!(p.slices()[0].measure, 5.0);
    }

    #[test]
    fn two_point_partition_matches_appendix_fixture() {
        let spec = TrawlSpec::exponential(0.2).unwrap();
        let p = SlicePartition::new(&spec, &[0.0, 1.0]).unwrap();
        let e = (-0.2f64).exp();
        let lookup = |first, last| {
            p.slices()
                .iter()
                .find(|s| s.first == first && s.last == last)
                .unwrap()
                .measure
        };
        assert_relative_eq!(lookup(0, 0), 5.0 * (1.0 - e), max_relative = 1e-13);
        assert_relative_eq!(lookup(1, 1), 5.0 * (1.0 - e), max_relative = 1e-13);
        assert_relative_eq!(lookup(0, 1), 5.0 * e, max_relative = 1e-13);
    }

    #[test]
    fn unsorted_times_rejected() {
        let spec = TrawlSpec::exponential(1.0).unwrap();
        assert!(SlicePartition::new(&spec, &[1.0, 0.5]).is_err());
        assert!(SlicePartition::new(&spec, &[1.0, 1.0]).is_err());
        assert!(SlicePartition::new(&spec, &[]).is_err());
    }

    #[test]
    fn partition_sums_to_sequential_union_measure() {
        let spec = TrawlSpec::exponential(0.7).unwrap();
        let times: Vec<f64> = (0..5).map(|i| i as f64 * 1.3).collect();
        let p = SlicePartition::new(&spec, &times).unwrap();
        let expected = union_measure(&spec, &times).unwrap();
        assert!((p.total_measure() - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn seed_cumulant_values() {
        let spec = TrawlSpec::exponential(1.0).unwrap();
        let seed = GammaSeed::new(1.0, 1.0).unwrap();
        assert_relative_eq!(seed.laplace_cumulant(&spec, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            seed.laplace_cumulant(&spec, 1.0).unwrap(),
            -(2.0f64).ln(),
            max_relative = 1e-15
        );
        assert!(seed.laplace_cumulant(&spec, -1.0).is_err());
        // analytic continuation just above -beta is accepted
        assert!(seed.laplace_cumulant(&spec, -0.5).is_ok());
    }

    #[test]
    fn seed_cumulant_exceedance_probability_consistency() {
        // exp(leb(A) C(kappa)) = (1 + kappa/beta)^{-alpha} ~ 0.05 at the
        // rainfall-fit parameters
        let spec = TrawlSpec::exponential(0.27).unwrap();
        let seed = GammaSeed::new(6.33, 20.12).unwrap();
        let c = seed.laplace_cumulant(&spec, 12.18).unwrap();
        let p = (spec.leb() * c).exp();
        assert_relative_eq!(p, (1.0f64 + 12.18 / 20.12).powf(-6.33), max_relative = 1e-12);
        assert!((p - 0.05).abs() < 5e-4);
    }

    #[test]
    fn joint_laplace_single_point_is_gamma_transform() {
        let spec = TrawlSpec::exponential(0.4).unwrap();
        let seed = GammaSeed::new(2.5, 1.7).unwrap();
        for u in [0.0, 0.3, 2.0, 11.0] {
            let expected = (1.0 + u / 1.7f64).powf(-2.5);
            let got = joint_laplace(&seed, &spec, &[0.0], &[u]).unwrap();
            assert_relative_eq!(got, expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn joint_laplace_at_zero_is_one() {
        let spec = two_term();
        let seed = GammaSeed::new(1.3, 0.8).unwrap();
        let times = [0.0, 0.7, 1.9, 4.0];
        let got = joint_laplace(&seed, &spec, &times, &[0.0; 4]).unwrap();
        assert_relative_eq!(got, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn joint_laplace_with_one_active_argument_is_marginal() {
        let spec = TrawlSpec::exponential(0.9).unwrap();
        let seed = GammaSeed::new(3.0, 2.0).unwrap();
        let times = [0.0, 1.0, 2.5, 3.0];
        let mut us = [0.0; 4];
        us[2] = 1.4;
        let got = joint_laplace(&seed, &spec, &times, &us).unwrap();
        assert_relative_eq!(got, (1.0 + 1.4 / 2.0f64).powf(-3.0), max_relative = 1e-13);
    }

    #[test]
    fn joint_laplace_dimension_mismatch_rejected() {
        let spec = TrawlSpec::exponential(0.9).unwrap();
        let seed = GammaSeed::new(3.0, 2.0).unwrap();
        assert!(joint_laplace(&seed, &spec, &[0.0, 1.0], &[0.1]).is_err());
    }

    #[test]
    fn simulation_is_deterministic_and_collapses_duplicates() {
        let spec = TrawlSpec::exponential(0.3).unwrap();
        let seed = GammaSeed::new(2.0, 3.0).unwrap();
        let times = [0.0, 1.0, 1.0, 2.0];
        let a = simulate_trawl(&seed, &spec, &times, 9).unwrap();
        let b = simulate_trawl(&seed, &spec, &times, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[1], a[2]);
        assert!(a.iter().all(|v| *v > 0.0));
        assert!(simulate_trawl(&seed, &spec, &[], 9).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // interval slices must agree with the generic inclusion-exclusion
        // partition over all index subsets
        #[test]
        fn interval_slices_match_brute_force(
            rho in 0.05f64..3.0,
            w in 0.05f64..0.95,
            rho2 in 0.05f64..3.0,
            gaps in proptest::collection::vec(0.05f64..4.0, 0..4),
            two_terms in proptest::bool::ANY,
        ) {
            let spec = if two_terms {
                TrawlSpec::new(vec![
                    TrawlTerm { weight: w, decay: rho },
                    TrawlTerm { weight: 1.0 - w, decay: rho2 },
                ]).unwrap()
            } else {
                TrawlSpec::exponential(rho).unwrap()
            };
            let mut times = vec![0.0];
            for g in gaps {
                times.push(times.last().unwrap() + g);
            }
            let fast = SlicePartition::new(&spec, &times).unwrap();
            let brute = oracle::brute_force_partition(&spec, &times);
            prop_assert!(oracle::partitions_agree(&fast, &brute, 1e-12));
        }

        // every point is covered by slices totalling exactly leb(A)
        #[test]
        fn marginal_consistency(
            rho in 0.05f64..3.0,
            gaps in proptest::collection::vec(0.05f64..4.0, 0..30),
        ) {
            let spec = TrawlSpec::exponential(rho).unwrap();
            let mut times = vec![0.0];
            for g in gaps {
                times.push(times.last().unwrap() + g);
            }
            let p = SlicePartition::new(&spec, &times).unwrap();
            let leb = spec.leb();
            for idx in 0..times.len() {
                let covered: f64 = p
                    .slices()
                    .iter()
                    .filter(|s| s.first <= idx && idx <= s.last)
                    .map(|s| s.measure)
                    .sum();
                prop_assert!((covered - leb).abs() <= 1e-12 * leb.max(1.0));
            }
            let union = union_measure(&spec, &times).unwrap();
            prop_assert!((p.total_measure() - union).abs() <= 1e-12 * union);
        }
    }
}
