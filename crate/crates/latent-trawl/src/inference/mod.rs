//! Pairwise-likelihood inference: closed-form pair densities, the composite
//! objective, two-stage optimisation and the sandwich covariance estimator.

mod fit;
mod init;
mod likelihood;
mod optim;
mod pairs;
mod sandwich;

pub use fit::{fit, FitResult, ParamTransform, PLConfig};
pub use init::init_heuristic;
pub use likelihood::{full_likelihood_small_k, log_pairwise_likelihood, n_pairs};
pub use optim::{bfgs, nelder_mead, BfgsOptions, BfgsOutcome, NelderMeadOptions};
pub use pairs::{
    pair_density, pair_density_00, pair_density_01, pair_density_10, pair_density_11,
    pair_density_mt,
};
pub use sandwich::{sandwich_covariance, score_block_length};
