//! Resolved command configurations and their implementations.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;

use latent_trawl::extremes::{cond_tail_dep, extremal_index_runs};
use latent_trawl::inference::{fit, PLConfig};
use latent_trawl::io::{ingest_csv, to_exceedances, ColumnSpec, ThresholdSpec};
use latent_trawl::model::{acov_exceedance, simulate_exceedances};
use latent_trawl::stats::{quantile_linear, sample_acf, sample_acov};
use latent_trawl::{ModelParams, TrawlSpec, Variant};

use crate::output::{format_f64, write_csv, write_json};
use crate::svg;

/// Model parameters as they appear on the command line / in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub variant: Variant,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub rho: f64,
    pub kappa: f64,
}

impl ModelConfig {
    pub fn to_params(&self) -> Result<ModelParams> {
        let trawl = TrawlSpec::exponential(self.rho)?;
        let params = match self.variant {
            Variant::Original => {
                let (Some(alpha), Some(beta)) = (self.alpha, self.beta) else {
                    bail!("the original variant needs --alpha and --beta");
                };
                if self.xi.is_some() || self.sigma.is_some() {
                    bail!("--xi/--sigma only apply to the mt variant");
                }
                ModelParams::original(trawl, alpha, beta, self.kappa)?
            }
            Variant::Mt => {
                let (Some(xi), Some(sigma)) = (self.xi, self.sigma) else {
                    bail!("the mt variant needs --xi and --sigma");
                };
                if self.alpha.is_some() || self.beta.is_some() {
                    bail!("--alpha/--beta only apply to the original variant");
                }
                ModelParams::mt(trawl, self.kappa, xi, sigma)?
            }
        };
        Ok(params)
    }

    pub fn from_params(params: &ModelParams) -> Result<Self> {
        let v = params.to_vector()?;
        Ok(match params.variant() {
            Variant::Original => Self {
                variant: Variant::Original,
                alpha: Some(v[0]),
                beta: Some(v[1]),
                xi: None,
                sigma: None,
                rho: v[2],
                kappa: v[3],
            },
            Variant::Mt => Self {
                variant: Variant::Mt,
                alpha: None,
                beta: None,
                xi: Some(v[0]),
                sigma: Some(v[1]),
                rho: v[2],
                kappa: v[3],
            },
        })
    }
}

/// Threshold selection: an absolute value or a percentile of the observed
/// values; defaults to absolute zero (already-thresholded input).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ThresholdConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub percentile: Option<f64>,
}

impl ThresholdConfig {
    pub fn to_spec(&self) -> Result<ThresholdSpec> {
        match (self.threshold, self.percentile) {
            (Some(_), Some(_)) => bail!("--threshold and --percentile are mutually exclusive"),
            (Some(u), None) => Ok(ThresholdSpec::Absolute(u)),
            (None, Some(p)) => Ok(ThresholdSpec::Percentile(p)),
            (None, None) => Ok(ThresholdSpec::Absolute(0.0)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub command: String,
    #[serde(flatten)]
    pub model: ModelConfig,
    pub length: usize,
    pub seed: u64,
    pub out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitConfig {
    pub command: String,
    pub input: PathBuf,
    pub time_column: String,
    pub value_column: String,
    #[serde(flatten)]
    pub threshold: ThresholdConfig,
    pub variant: Variant,
    pub delta: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<ModelConfig>,
    pub out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AcfConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    pub time_column: String,
    pub value_column: String,
    #[serde(flatten)]
    pub threshold: ThresholdConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    pub max_lag: usize,
    pub out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailDepConfig {
    pub command: String,
    #[serde(flatten)]
    pub model: ModelConfig,
    pub lags: Vec<f64>,
    pub u_min: f64,
    pub u_max: f64,
    pub u_count: usize,
    pub out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtremalIndexConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    pub time_column: String,
    pub value_column: String,
    #[serde(flatten)]
    pub threshold: ThresholdConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub percentiles: Vec<f64>,
    pub run_length: usize,
    pub out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot: Option<PathBuf>,
}

/// A fully resolved invocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    Simulate(SimulateConfig),
    Fit(FitConfig),
    Acf(AcfConfig),
    Taildep(TailDepConfig),
    ExtremalIndex(ExtremalIndexConfig),
}

/// Executes a resolved command, writing its artifacts.
pub fn run(command: &Command) -> Result<()> {
    match command {
        Command::Simulate(c) => run_simulate(c),
        Command::Fit(c) => run_fit(c),
        Command::Acf(c) => run_acf(c),
        Command::Taildep(c) => run_taildep(c),
        Command::ExtremalIndex(c) => run_extremal_index(c),
    }
}

fn unit_grid(length: usize) -> Vec<f64> {
    (0..length).map(|i| i as f64).collect()
}

fn load_series(
    input: &Path,
    time_column: &str,
    value_column: &str,
    threshold: &ThresholdConfig,
) -> Result<(latent_trawl::ExceedanceSeries, latent_trawl::io::ThresholdMeta)> {
    let columns = ColumnSpec {
        time: time_column.into(),
        value: value_column.into(),
    };
    let raw = ingest_csv(input, &columns)?;
    let spec = threshold.to_spec()?;
    Ok(to_exceedances(&raw, spec)?)
}

fn run_simulate(config: &SimulateConfig) -> Result<()> {
    if config.length < 2 {
        bail!("simulation length must be >= 2, got {}", config.length);
    }
    let params = config.model.to_params()?;
    let times = unit_grid(config.length);
    let series = simulate_exceedances(&params, &times, config.seed)?;
    let rows: Vec<Vec<String>> = series
        .times()
        .iter()
        .zip(series.values())
        .map(|(t, v)| vec![format_f64(*t), format_f64(*v)])
        .collect();
    write_csv(&config.out, config, &["t", "value"], &rows)?;
    if let Some(plot) = &config.plot {
        let points: Vec<(f64, f64)> = series
            .times()
            .iter()
            .zip(series.values())
            .map(|(t, v)| (*t, *v))
            .collect();
        let doc = svg::line_plot(
            "Simulated exceedances",
            "t",
            "exceedance",
            &[svg::Series {
                label: "series",
                points: &points,
            }],
        );
        std::fs::write(plot, doc).with_context(|| format!("writing {}", plot.display()))?;
    }
    Ok(())
}

fn run_fit(config: &FitConfig) -> Result<()> {
    let (series, meta) = load_series(
        &config.input,
        &config.time_column,
        &config.value_column,
        &config.threshold,
    )?;
    let pl_config = PLConfig {
        delta: config.delta,
        ..PLConfig::default()
    };
    let init = config.init.as_ref().map(|m| m.to_params()).transpose()?;
    let result = fit(&series, config.variant, &pl_config, init)?;
    let estimates = result.params.to_vector()?;
    let names = result.param_names();
    let report = json!({
        "config": config,
        "threshold": meta,
        "n_observations": series.len(),
        "n_exceedances": series.n_positive(),
        "result": {
            "parameter_names": names,
            "estimates": estimates,
            "std_errors": result.std_errors,
            "covariance": result.covariance,
            "log_pairwise_likelihood": result.log_pl,
            "n_pairs": result.n_pairs,
            "grad_norm": result.grad_norm,
            "simplex_iterations": result.simplex_iterations,
            "polish_iterations": result.polish_iterations,
            "converged": result.converged,
        },
    });
    write_json(&config.out, &report)?;
    if let Some(plot) = &config.plot {
        let points: Vec<(f64, f64)> = series
            .times()
            .iter()
            .zip(series.values())
            .map(|(t, v)| (*t, *v))
            .collect();
        let doc = svg::line_plot(
            "Exceedance series",
            "t",
            "exceedance",
            &[svg::Series {
                label: "data",
                points: &points,
            }],
        );
        std::fs::write(plot, doc).with_context(|| format!("writing {}", plot.display()))?;
    }
    Ok(())
}

fn run_acf(config: &AcfConfig) -> Result<()> {
    if config.input.is_none() && config.model.is_none() {
        bail!("acf needs --input and/or model parameters");
    }
    if config.max_lag < 1 {
        bail!("--max-lag must be >= 1");
    }
    let empirical = config
        .input
        .as_ref()
        .map(|input| -> Result<(Vec<f64>, Vec<f64>)> {
            let (series, _) = load_series(
                input,
                &config.time_column,
                &config.value_column,
                &config.threshold,
            )?;
            let acov = sample_acov(series.values(), config.max_lag)?;
            let acf = sample_acf(series.values(), config.max_lag)?;
            Ok((acov, acf))
        })
        .transpose()?;
    let model = config
        .model
        .as_ref()
        .map(|m| -> Result<(ModelParams, f64)> {
            let params = m.to_params()?;
            if params.variant() != Variant::Original {
                bail!(
                    "the closed-form autocovariance applies to the original variant only; \
                     simulate the mt model and use --input instead"
                );
            }
            let var = params.variance_exceedance()?;
            Ok((params, var))
        })
        .transpose()?;

    let mut header = vec!["lag"];
    if empirical.is_some() {
        header.extend_from_slice(&["empirical_acov", "empirical_acf"]);
    }
    if model.is_some() {
        header.extend_from_slice(&["model_acov", "model_acf"]);
    }
    let mut rows = Vec::with_capacity(config.max_lag);
    let mut empirical_points = Vec::new();
    let mut model_points = Vec::new();
    for lag in 1..=config.max_lag {
        let mut row = vec![format_f64(lag as f64)];
        if let Some((acov, acf)) = &empirical {
            row.push(format_f64(acov[lag]));
            row.push(format_f64(acf[lag]));
            empirical_points.push((lag as f64, acf[lag]));
        }
        if let Some((params, var)) = &model {
            let acov = acov_exceedance(params, lag as f64)?;
            row.push(format_f64(acov));
            row.push(format_f64(acov / var));
            model_points.push((lag as f64, acov / var));
        }
        rows.push(row);
    }
    write_csv(&config.out, config, &header, &rows)?;
    if let Some(plot) = &config.plot {
        let mut series = Vec::new();
        if !empirical_points.is_empty() {
            series.push(svg::Series {
                label: "empirical",
                points: &empirical_points,
            });
        }
        if !model_points.is_empty() {
            series.push(svg::Series {
                label: "model",
                points: &model_points,
            });
        }
        let doc = svg::line_plot("Exceedance autocorrelation", "lag", "acf", &series);
        std::fs::write(plot, doc).with_context(|| format!("writing {}", plot.display()))?;
    }
    Ok(())
}

fn taildep_grid(u_min: f64, u_max: f64, count: usize) -> Result<Vec<f64>> {
    if !(0.0 < u_min && u_min < u_max && u_max < 1.0) {
        bail!("need 0 < u_min < u_max < 1, got ({u_min}, {u_max})");
    }
    if count < 2 {
        bail!("--u-count must be >= 2");
    }
    // log-spaced in the tail coordinate 1 - u
    let start = (1.0 - u_min).ln();
    let end = (1.0 - u_max).ln();
    Ok((0..count)
        .map(|i| {
            let f = i as f64 / (count - 1) as f64;
            1.0 - (start + f * (end - start)).exp()
        })
        .collect())
}

fn run_taildep(config: &TailDepConfig) -> Result<()> {
    if config.lags.is_empty() {
        bail!("--lags must name at least one lag");
    }
    let params = config.model.to_params()?;
    let grid = taildep_grid(config.u_min, config.u_max, config.u_count)?;
    let mut rows = Vec::new();
    let mut curves: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for &lag in &config.lags {
        let mut points = Vec::with_capacity(grid.len());
        for &u in &grid {
            let phi = cond_tail_dep(&params, lag, u, u)?;
            rows.push(vec![format_f64(lag), format_f64(u), format_f64(phi)]);
            points.push((u, phi));
        }
        curves.push((format!("lag {lag}"), points));
    }
    write_csv(&config.out, config, &["lag", "u", "phi"], &rows)?;
    if let Some(plot) = &config.plot {
        let series: Vec<svg::Series<'_>> = curves
            .iter()
            .map(|(label, points)| svg::Series {
                label,
                points,
            })
            .collect();
        let doc = svg::line_plot("Conditional tail dependence", "u", "phi(h,u,u)", &series);
        std::fs::write(plot, doc).with_context(|| format!("writing {}", plot.display()))?;
    }
    Ok(())
}

fn run_extremal_index(config: &ExtremalIndexConfig) -> Result<()> {
    if config.input.is_none() && config.model.is_none() {
        bail!("extremal-index needs --input and/or model parameters");
    }
    if config.percentiles.is_empty() {
        bail!("--percentiles must name at least one level");
    }
    let mut sources: Vec<(&str, Vec<f64>)> = Vec::new();
    if let Some(input) = &config.input {
        let (series, _) = load_series(
            input,
            &config.time_column,
            &config.value_column,
            &config.threshold,
        )?;
        sources.push(("data", series.values().to_vec()));
    }
    if let Some(model) = &config.model {
        let params = model.to_params()?;
        let length = config.length.unwrap_or(1_000_000);
        let seed = config
            .seed
            .context("--seed is required when simulating from the model")?;
        let series = simulate_exceedances(&params, &unit_grid(length), seed)?;
        sources.push(("model", series.values().to_vec()));
    }

    let mut rows = Vec::new();
    let mut curves: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for (label, values) in &sources {
        let mut points = Vec::new();
        for &p in &config.percentiles {
            if !(0.0 < p && p < 1.0) {
                bail!("percentile {p} outside (0, 1)");
            }
            let threshold = quantile_linear(values, p)?;
            let summary = extremal_index_runs(values, threshold, config.run_length)?;
            rows.push(vec![
                label.to_string(),
                format_f64(p),
                format_f64(threshold),
                summary.n_exceedances.to_string(),
                summary.n_clusters.to_string(),
                format_f64(summary.theta_hat),
            ]);
            points.push((p, summary.theta_hat));
        }
        curves.push((label.to_string(), points));
    }
    write_csv(
        &config.out,
        config,
        &[
            "source",
            "percentile",
            "threshold",
            "n_exceedances",
            "n_clusters",
            "theta_hat",
        ],
        &rows,
    )?;
    if let Some(plot) = &config.plot {
        let series: Vec<svg::Series<'_>> = curves
            .iter()
            .map(|(label, points)| svg::Series {
                label,
                points,
            })
            .collect();
        let doc = svg::line_plot("Extremal index", "percentile", "theta", &series);
        std::fs::write(plot, doc).with_context(|| format!("writing {}", plot.display()))?;
    }
    Ok(())
}
