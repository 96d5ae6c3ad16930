//! Scenario configuration, initial data, reference comparison, studies and
//! output writers used by the command-line front end.

pub mod config;
pub mod initial;
pub mod presets;
pub mod report;
pub mod scenario;
pub mod studies;

pub use config::{Dec, ScenarioConfig};
pub use initial::{gaussian_bump_ic, noise_disk_ic, restrict_to_physical};
pub use scenario::{reference_run, run_scenario, RunArtifacts, RunSummary};
