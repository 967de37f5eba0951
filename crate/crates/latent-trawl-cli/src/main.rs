//! `ltrawl` — simulate, fit and diagnose the latent trawl exceedance model.
//!
//! Every subcommand can also be driven from a JSON config file via
//! `--config`; explicit flags override file values. Failures print a
//! machine-readable JSON object to stderr and exit nonzero.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use latent_trawl::Variant;
use latent_trawl_cli::{
    run, AcfConfig, Command, ExtremalIndexConfig, FitConfig, ModelConfig, SimulateConfig,
    TailDepConfig, ThresholdConfig,
};

#[derive(Debug, Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum VariantArg {
    Original,
    Mt,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Original => Variant::Original,
            VariantArg::Mt => Variant::Mt,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "ltrawl",
    version,
    about = "Latent trawl model for threshold exceedances: simulation, fitting, diagnostics"
)]
struct Cli {
    /// JSON config file; flags override its fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand, Debug)]
enum CliCommand {
    /// Simulate an exceedance series to CSV
    Simulate(SimulateArgs),
    /// Fit by maximum pairwise likelihood; writes a JSON report
    Fit(FitArgs),
    /// Model and/or empirical autocovariance of the exceedances
    Acf(AcfArgs),
    /// Conditional tail dependence curves phi(h, u, u)
    Taildep(TaildepArgs),
    /// Runs-declustering extremal index across thresholds
    ExtremalIndex(ExtremalIndexArgs),
}

/// Model parameter flags shared by several subcommands.
#[derive(Args, Debug, Default, Deserialize)]
struct ModelArgs {
    /// Model variant: original (alpha, beta) or mt (xi, sigma)
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Trawl decay rate
    #[arg(long)]
    rho: Option<f64>,
    /// Exceedance-control parameter
    #[arg(long)]
    kappa: Option<f64>,
}

impl ModelArgs {
    fn merge(self, file: Option<&Self>) -> Self {
        let take = |a: Option<f64>, b: fn(&Self) -> Option<f64>| a.or(file.and_then(b));
        Self {
            variant: self.variant.or(file.and_then(|f| f.variant)),
            alpha: take(self.alpha, |f| f.alpha),
            beta: take(self.beta, |f| f.beta),
            xi: take(self.xi, |f| f.xi),
            sigma: take(self.sigma, |f| f.sigma),
            rho: take(self.rho, |f| f.rho),
            kappa: take(self.kappa, |f| f.kappa),
        }
    }

    fn is_empty(&self) -> bool {
        self.variant.is_none()
            && self.alpha.is_none()
            && self.beta.is_none()
            && self.xi.is_none()
            && self.sigma.is_none()
            && self.rho.is_none()
            && self.kappa.is_none()
    }

    fn to_config(&self) -> Result<ModelConfig> {
        let variant: Variant = self.variant.context("--variant is required")?.into();
        Ok(ModelConfig {
            variant,
            alpha: self.alpha,
            beta: self.beta,
            xi: self.xi,
            sigma: self.sigma,
            rho: self.rho.context("--rho is required")?,
            kappa: self.kappa.context("--kappa is required")?,
        })
    }
}

#[derive(Args, Debug, Default, Deserialize)]
struct ThresholdArgs {
    /// Absolute threshold applied to the input values
    #[arg(long)]
    threshold: Option<f64>,
    /// Percentile threshold in (0, 1) resolved against the input values
    #[arg(long)]
    percentile: Option<f64>,
}

impl ThresholdArgs {
    fn merge(self, file: Option<&Self>) -> ThresholdConfig {
        ThresholdConfig {
            threshold: self.threshold.or(file.and_then(|f| f.threshold)),
            percentile: self.percentile.or(file.and_then(|f| f.percentile)),
        }
    }
}

#[derive(Args, Debug, Default, Deserialize)]
struct IoArgs {
    /// Input CSV path
    #[arg(long)]
    input: Option<PathBuf>,
    /// Timestamp column name
    #[arg(long)]
    time_column: Option<String>,
    /// Value column name
    #[arg(long)]
    value_column: Option<String>,
    /// Output artifact path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional SVG plot path
    #[arg(long)]
    plot: Option<PathBuf>,
}

impl IoArgs {
    fn merge(self, file: Option<&Self>) -> Self {
        Self {
            input: self.input.or(file.and_then(|f| f.input.clone())),
            time_column: self.time_column.or(file.and_then(|f| f.time_column.clone())),
            value_column: self.value_column.or(file.and_then(|f| f.value_column.clone())),
            out: self.out.or(file.and_then(|f| f.out.clone())),
            plot: self.plot.or(file.and_then(|f| f.plot.clone())),
        }
    }
}

#[derive(Args, Debug, Default, Deserialize)]
struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    /// Number of grid points to simulate
    #[arg(long)]
    length: Option<usize>,
    /// RNG seed (mandatory: simulation must be reproducible)
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    io: IoArgs,
}

#[derive(Args, Debug, Default, Deserialize)]
struct FitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    io: IoArgs,
    #[command(flatten)]
    #[serde(flatten)]
    threshold: ThresholdArgs,
    /// Model variant to fit
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Maximum pair separation
    #[arg(long)]
    delta: Option<usize>,
    /// Starting values (config file only)
    #[serde(default)]
    #[arg(skip)]
    init: Option<ModelConfig>,
}

#[derive(Args, Debug, Default, Deserialize)]
struct AcfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    io: IoArgs,
    #[command(flatten)]
    #[serde(flatten)]
    threshold: ThresholdArgs,
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    /// Largest lag to evaluate
    #[arg(long)]
    max_lag: Option<usize>,
}

#[derive(Args, Debug, Default, Deserialize)]
struct TaildepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    /// Comma-separated lags
    #[arg(long, value_delimiter = ',')]
    lags: Option<Vec<f64>>,
    #[arg(long)]
    u_min: Option<f64>,
    #[arg(long)]
    u_max: Option<f64>,
    #[arg(long)]
    u_count: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    io: IoArgs,
}

#[derive(Args, Debug, Default, Deserialize)]
struct ExtremalIndexArgs {
    #[command(flatten)]
    #[serde(flatten)]
    io: IoArgs,
    #[command(flatten)]
    #[serde(flatten)]
    threshold: ThresholdArgs,
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    /// Simulation length when a model is given
    #[arg(long)]
    length: Option<usize>,
    /// RNG seed for the model simulation
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated percentile grid
    #[arg(long, value_delimiter = ',')]
    percentiles: Option<Vec<f64>>,
    /// Consecutive below-threshold run that terminates a cluster
    #[arg(long)]
    run_length: Option<usize>,
}

fn load_file<T: for<'de> Deserialize<'de>>(path: &Option<PathBuf>) -> Result<Option<T>> {
    let Some(path) = path else { return Ok(None) };
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?;
    Ok(Some(parsed))
}

fn resolve(cli: Cli) -> Result<Command> {
    match cli.command {
        CliCommand::Simulate(args) => {
            let file: Option<SimulateArgs> = load_file(&cli.config)?;
            let model = args.model.merge(file.as_ref().map(|f| &f.model));
            let io = args.io.merge(file.as_ref().map(|f| &f.io));
            Ok(Command::Simulate(SimulateConfig {
                command: "simulate".into(),
                model: model.to_config()?,
                length: args
                    .length
                    .or(file.as_ref().and_then(|f| f.length))
                    .context("--length is required")?,
                seed: args
                    .seed
                    .or(file.as_ref().and_then(|f| f.seed))
                    .context("--seed is required")?,
                out: io.out.context("--out is required")?,
                plot: io.plot,
            }))
        }
        CliCommand::Fit(args) => {
            let file: Option<FitArgs> = load_file(&cli.config)?;
            let io = args.io.merge(file.as_ref().map(|f| &f.io));
            let threshold = args.threshold.merge(file.as_ref().map(|f| &f.threshold));
            let variant = args
                .variant
                .or(file.as_ref().and_then(|f| f.variant))
                .context("--variant is required")?;
            Ok(Command::Fit(FitConfig {
                command: "fit".into(),
                input: io.input.context("--input is required")?,
                time_column: io.time_column.unwrap_or_else(|| "t".into()),
                value_column: io.value_column.unwrap_or_else(|| "value".into()),
                threshold,
                variant: variant.into(),
                delta: args.delta.or(file.as_ref().and_then(|f| f.delta)).unwrap_or(4),
                init: file.and_then(|f| f.init),
                out: io.out.context("--out is required")?,
                plot: io.plot,
            }))
        }
        CliCommand::Acf(args) => {
            let file: Option<AcfArgs> = load_file(&cli.config)?;
            let io = args.io.merge(file.as_ref().map(|f| &f.io));
            let threshold = args.threshold.merge(file.as_ref().map(|f| &f.threshold));
            let model = args.model.merge(file.as_ref().map(|f| &f.model));
            Ok(Command::Acf(AcfConfig {
                command: "acf".into(),
                input: io.input,
                time_column: io.time_column.unwrap_or_else(|| "t".into()),
                value_column: io.value_column.unwrap_or_else(|| "value".into()),
                threshold,
                model: if model.is_empty() {
                    None
                } else {
                    Some(model.to_config()?)
                },
                max_lag: args
                    .max_lag
                    .or(file.as_ref().and_then(|f| f.max_lag))
                    .unwrap_or(20),
                out: io.out.context("--out is required")?,
                plot: io.plot,
            }))
        }
        CliCommand::Taildep(args) => {
            let file: Option<TaildepArgs> = load_file(&cli.config)?;
            let io = args.io.merge(file.as_ref().map(|f| &f.io));
            let model = args.model.merge(file.as_ref().map(|f| &f.model));
            Ok(Command::Taildep(TailDepConfig {
                command: "taildep".into(),
                model: model.to_config()?,
                lags: args
                    .lags
                    .or(file.as_ref().and_then(|f| f.lags.clone()))
                    .unwrap_or_else(|| vec![1.0]),
                u_min: args.u_min.or(file.as_ref().and_then(|f| f.u_min)).unwrap_or(0.5),
                u_max: args
                    .u_max
                    .or(file.as_ref().and_then(|f| f.u_max))
                    .unwrap_or(0.9999),
                u_count: args
                    .u_count
                    .or(file.as_ref().and_then(|f| f.u_count))
                    .unwrap_or(50),
                out: io.out.context("--out is required")?,
                plot: io.plot,
            }))
        }
        CliCommand::ExtremalIndex(args) => {
            let file: Option<ExtremalIndexArgs> = load_file(&cli.config)?;
            let io = args.io.merge(file.as_ref().map(|f| &f.io));
            let threshold = args.threshold.merge(file.as_ref().map(|f| &f.threshold));
            let model = args.model.merge(file.as_ref().map(|f| &f.model));
            if io.input.is_none() && model.is_empty() {
                bail!("extremal-index needs --input and/or model parameters");
            }
            Ok(Command::ExtremalIndex(ExtremalIndexConfig {
                command: "extremal-index".into(),
                input: io.input,
                time_column: io.time_column.unwrap_or_else(|| "t".into()),
                value_column: io.value_column.unwrap_or_else(|| "value".into()),
                threshold,
                model: if model.is_empty() {
                    None
                } else {
                    Some(model.to_config()?)
                },
                length: args.length.or(file.as_ref().and_then(|f| f.length)),
                seed: args.seed.or(file.as_ref().and_then(|f| f.seed)),
                percentiles: args
                    .percentiles
                    .or(file.as_ref().and_then(|f| f.percentiles.clone()))
                    .unwrap_or_else(|| vec![0.95, 0.96, 0.97, 0.98, 0.99, 0.995, 0.999]),
                run_length: args
                    .run_length
                    .or(file.as_ref().and_then(|f| f.run_length))
                    .unwrap_or(3),
                out: io.out.context("--out is required")?,
                plot: io.plot,
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = resolve(cli).and_then(|command| run(&command));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let payload = serde_json::json!({
                "error": format!("{e:#}"),
            });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}
