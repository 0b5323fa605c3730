//! Scenario runs, figure bundles, parameter sweeps and the validation suite
//! built on `tlsme-core`.

pub mod config;
pub mod error;
pub mod figure;
pub mod presets;
pub mod runner;
pub mod validate;

pub use config::{Scenario, ScenarioConfig};
pub use error::{CliError, Result};
