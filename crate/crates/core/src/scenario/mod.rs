//! Declarative scenarios: the configuration format, built-in presets, run
//! orchestration with file outputs, and the run manifest.

pub mod config;
pub mod manifest;
pub mod presets;
pub mod run;

pub use config::{load_config, parse_config, ConfigErrors, ConfigIssue, FormulationChoice, ScenarioConfig};
pub use manifest::Manifest;
pub use presets::{export_preset, preset, PRESET_NAMES};
pub use run::{run_scenario, RunOptions, RunReport};
