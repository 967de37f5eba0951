//! Brute-force reference implementations kept for validation.
//!
//! These take the generic inclusion-exclusion route over all `2^k - 1` index
//! subsets and are exponential in the number of time points; use them only to
//! cross-check the interval-slice fast paths on small grids.

use crate::trawl::{GammaSeed, SlicePartition, TrawlSpec};
use crate::{Error, Result};

/// Measure of one generic partition element: the points belonging to exactly
/// the trawl sets indexed by `subset` (a nonzero bit mask).
#[derive(Debug, Clone, Copy)]
pub struct SubsetSlice {
    /// Bit `j` set means the slice lies inside `A_{t_j}`.
    pub subset: u32,
    pub measure: f64,
}

fn span(times: &[f64], mask: u32) -> f64 {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for (j, &t) in times.iter().enumerate() {
        if mask & (1 << j) != 0 {
            min = min.min(t);
            max = max.max(t);
        }
    }
    max - min
}

/// The generic `2^k - 1` partition of the union of trawl sets.
///
/// `leb(S_I) = Σ_{J ⊆ I^c} (-1)^{|J|} leb(∩_{l ∈ I∪J} A_{t_l})`, with the
/// intersection measure determined by the time span of the participating
/// points. Panics on more than 20 points.
pub fn brute_force_partition(spec: &TrawlSpec, times: &[f64]) -> Vec<SubsetSlice> {
    let k = times.len();
    assert!(k >= 1 && k <= 20, "brute force partition needs 1..=20 points");
    let full: u32 = if k == 32 { u32::MAX } else { (1 << k) - 1 };
    let mut out = Vec::with_capacity(full as usize);
    for subset in 1..=full {
        let complement = full & !subset;
        // iterate all submasks j of the complement
        let mut measure = 0.0;
        let mut j = complement;
        loop {
            let sign = if (j.count_ones() % 2) == 0 { 1.0 } else { -1.0 };
            measure += sign * spec.leb_span(span(times, subset | j));
            if j == 0 {
                break;
            }
            j = (j - 1) & complement;
        }
        out.push(SubsetSlice { subset, measure });
    }
    out
}

/// True when the interval-slice partition and the generic partition assign the
/// same measure to every subset within `tol`, and every non-interval subset is
/// empty in the generic partition.
pub fn partitions_agree(fast: &SlicePartition, brute: &[SubsetSlice], tol: f64) -> bool {
    for s in brute {
        let measure_fast = interval_of(s.subset)
            .and_then(|(first, last)| {
                fast.slices()
                    .iter()
                    .find(|f| f.first == first && f.last == last)
                    .map(|f| f.measure)
            })
            .unwrap_or(0.0);
        if (measure_fast - s.measure).abs() > tol {
            return false;
        }
    }
    true
}

fn interval_of(mask: u32) -> Option<(usize, usize)> {
    let first = mask.trailing_zeros() as usize;
    let last = (31 - mask.leading_zeros()) as usize;
    let interval: u32 = ((1u64 << (last + 1)) - (1u64 << first)) as u32;
    (interval == mask).then_some((first, last))
}

/// Joint Laplace transform summed over the generic partition, as an
/// independent check of the interval-slice transform.
pub fn brute_force_joint_laplace(
    seed: &GammaSeed,
    spec: &TrawlSpec,
    times: &[f64],
    us: &[f64],
) -> Result<f64> {
    if us.len() != times.len() {
        return Err(Error::InvalidInput("argument/time length mismatch".into()));
    }
    let mut exponent = 0.0;
    for s in brute_force_partition(spec, times) {
        let u_plus: f64 = us
            .iter()
            .enumerate()
            .filter(|(j, _)| s.subset & (1 << *j) != 0)
            .map(|(_, u)| u)
            .sum();
        exponent += s.measure * seed.laplace_cumulant(spec, u_plus)?;
    }
    Ok(exponent.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn brute_force_on_two_points_matches_hand_calculation() {
        let spec = TrawlSpec::exponential(0.2).unwrap();
        let slices = brute_force_partition(&spec, &[0.0, 1.0]);
        let e = (-0.2f64).exp();
        for s in slices {
            let expected = match s.subset {
                0b01 | 0b10 => 5.0 * (1.0 - e),
                0b11 => 5.0 * e,
                _ => unreachable!(),
            };
            assert_relative_eq!(s.measure, expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn joint_laplace_matches_fast_path_on_three_points() {
        let spec = TrawlSpec::exponential(0.6).unwrap();
        let seed = GammaSeed::new(2.0, 1.5).unwrap();
        let times = [0.0, 0.8, 2.0];
        let us = [0.3, 1.1, 0.25];
        let brute = brute_force_joint_laplace(&seed, &spec, &times, &us).unwrap();
        let fast = crate::trawl::joint_laplace(&seed, &spec, &times, &us).unwrap();
        assert_relative_eq!(brute, fast, max_relative = 1e-12);
    }
}
