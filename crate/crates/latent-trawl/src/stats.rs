//! Small sample-statistics helpers shared by thresholding, initial-value
//! heuristics and the Monte Carlo diagnostics in the test suites.

use crate::{Error, Result};

/// Linear-interpolation quantile between order statistics (the common
/// "type 7" convention): index `(n-1) p` interpolated between neighbours.
pub fn quantile_linear(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("quantile of empty sample".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!("quantile level must be in [0,1], got {p}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let pos = (sorted.len() - 1) as f64 * p;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population-style variance (divides by `n`).
pub fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / values.len() as f64
}

/// Sample autocorrelation at lags `0..=max_lag` (biased normalisation).
pub fn sample_acf(values: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 2 || max_lag >= n {
        return Err(Error::InvalidInput(format!(
            "need more than {max_lag} observations for the sample ACF, got {n}"
        )));
    }
    let m = mean(values);
    let denom: f64 = values.iter().map(|x| (x - m) * (x - m)).sum();
    if denom == 0.0 {
        return Err(Error::InvalidInput("constant series has no ACF".into()));
    }
    let mut acf = Vec::with_capacity(max_lag + 1);
    for h in 0..=max_lag {
        let num: f64 = (0..n - h).map(|j| (values[j] - m) * (values[j + h] - m)).sum();
        acf.push(num / denom);
    }
    Ok(acf)
}

/// Sample autocovariance at lags `0..=max_lag` (biased normalisation).
pub fn sample_acov(values: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 2 || max_lag >= n {
        return Err(Error::InvalidInput("series too short for autocovariance".into()));
    }
    let m = mean(values);
    Ok((0..=max_lag)
        .map(|h| (0..n - h).map(|j| (values[j] - m) * (values[j + h] - m)).sum::<f64>() / n as f64)
        .collect())
}

/// Kolmogorov-Smirnov statistic `sup_x |F_n(x) - F(x)|` against a cdf.
pub fn ks_statistic<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> Result<f64> {
    let n = values.len();
    if n == 0 {
        return Err(Error::InvalidInput("KS statistic of empty sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((i as f64 / nf - f).abs()).max(((i + 1) as f64 / nf - f).abs());
    }
    Ok(d)
}

/// Asymptotic KS critical value `sqrt(-ln(level/2)/2) / sqrt(n)`.
pub fn ks_critical_value(n: usize, level: f64) -> f64 {
    (-(level / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Mean and its standard error estimated from `n_batches` contiguous batches;
/// robust to serial dependence when batches dominate the dependence range.
pub fn batch_mean_se(values: &[f64], n_batches: usize) -> Result<(f64, f64)> {
    let n = values.len();
    if n_batches < 2 || n < 2 * n_batches {
        return Err(Error::InvalidInput("too few observations for batch means".into()));
    }
    let batch_len = n / n_batches;
    let batches: Vec<f64> = (0..n_batches)
        .map(|b| mean(&values[b * batch_len..(b + 1) * batch_len]))
        .collect();
    let overall = mean(&batches);
    let var_b = batches.iter().map(|x| (x - overall) * (x - overall)).sum::<f64>()
        / (n_batches - 1) as f64;
    Ok((overall, (var_b / n_batches as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quantile_interpolates() {
        let values: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        // (n-1) p = 99 * 0.95 = 94.05 -> between 95 and 96
        assert_relative_eq!(quantile_linear(&values, 0.95).unwrap(), 95.05);
        assert_relative_eq!(quantile_linear(&values, 0.0).unwrap(), 1.0);
        assert_relative_eq!(quantile_linear(&values, 1.0).unwrap(), 100.0);
        assert!(quantile_linear(&[], 0.5).is_err());
        assert!(quantile_linear(&values, 1.5).is_err());
    }

    #[test]
    fn acf_of_alternating_sequence() {
        let values: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let acf = sample_acf(&values, 2).unwrap();
        assert_relative_eq!(acf[0], 1.0);
        assert!(acf[1] < -0.9);
        assert!(acf[2] > 0.9);
    }

    #[test]
    fn ks_statistic_of_exact_uniform_grid() {
        let values: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d = ks_statistic(&values, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d <= 0.5e-3 + 1e-12);
    }

    #[test]
    fn ks_critical_value_at_one_percent() {
        // the classical 1.628/sqrt(n) constant
        assert_relative_eq!(ks_critical_value(1, 0.01), 1.6276236307187137, max_relative = 1e-12);
    }

    #[test]
    fn batch_means_recover_mean() {
        let values: Vec<f64> = (0..1000).map(|i| (i % 10) as f64).collect();
        let (m, se) = batch_mean_se(&values, 10).unwrap();
        assert_relative_eq!(m, 4.5);
        assert!(se < 1e-12);
    }
}
