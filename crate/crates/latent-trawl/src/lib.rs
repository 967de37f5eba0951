//! Latent trawl process model for time series of threshold exceedances.
//!
//! A stationary series is reduced to exceedances `X_j = max(Y_j - u, 0)` over a
//! high threshold `u`. Conditionally on a latent trawl process `Λ` with Gamma
//! marginals, each observation is zero with probability `1 - exp(-κΛ_j)` and
//! otherwise exponential with rate `Λ_j`, which makes the positive part exactly
//! generalised Pareto while the trawl set geometry drives all serial dependence.
//!
//! The crate provides:
//!
//! - [`trawl`] — trawl-set geometry, slice partitions, joint transforms and
//!   exact simulation of the latent Gamma trawl process;
//! - [`model`] — the hierarchical exceedance model (original and
//!   marginal-transformation variants), moments and the joint survivor;
//! - [`inference`] — closed-form pair densities, maximum pairwise-likelihood
//!   fitting and the sandwich covariance estimator;
//! - [`extremes`] — conditional tail dependence, runs declustering and the
//!   empirical chi estimator;
//! - [`io`] — CSV ingestion and thresholding;
//! - [`oracle`] — brute-force reference implementations used to validate the
//!   fast paths.

pub mod extremes;
pub mod gpd;
pub mod inference;
pub mod io;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod stats;
pub mod trawl;

mod error;

pub use error::{Error, Result};
pub use gpd::Gpd;
pub use model::{ExceedanceSeries, ModelParams, MtTransform, Variant};
pub use trawl::{GammaSeed, SlicePartition, TrawlSpec};
