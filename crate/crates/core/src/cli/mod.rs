//! Configuration loading, study orchestration and run manifests.

mod config;
mod run;

pub use config::{
    load_config, parse_config, ErrorBounds, Format, GridConfig, InitialConfig, OutputConfig, RunConfig, StudyConfig,
    StudyKind, TimeConfig,
};
pub use run::{exit_code, run, Check, RunContext, RunOutcome};
