//! Monte-Carlo experiment runner, scenario presets and CSV output.

mod config;
mod csv;
mod run;

pub use config::{parse_list, parse_mu, preset, CustomGeometry, ExperimentConfig, PathPrior, Reports, Scenario};
pub use csv::{render_csv, write_csv, MetricName, MetricRecord};
pub use run::{run, trial_seed, Report};
