//! Command implementations behind the `ltrawl` binary.
//!
//! Every command resolves its full configuration (defaults, seed and all) up
//! front, embeds it in the artifacts it writes, and keeps all numeric output
//! locale-independent at full double precision, so a given configuration and
//! seed reproduce byte-identical files.

mod commands;
mod output;
mod svg;

pub use commands::{
    run, AcfConfig, Command, ExtremalIndexConfig, FitConfig, ModelConfig, SimulateConfig,
    TailDepConfig, ThresholdConfig,
};
pub use output::format_f64;
