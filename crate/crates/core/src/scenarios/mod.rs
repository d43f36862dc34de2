//! Config-driven reproduction runs. Each scenario writes CSV tables and a
//! `summary.json` with key results and recorded checks into
//! `<output_dir>/<scenario>/`.

pub mod analysis;
mod config;
mod run;

pub use config::{
    apply_override, default_config, load_config, merge_json, RunCase, Scenario, ScenarioConfig,
    SweepSpec, TimeGrid,
};
pub use run::{run_scenario, Check, ScenarioOutput, Summary};
