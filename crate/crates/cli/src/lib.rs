//! Scenario files, reports, plots and the `opaque-reach` command surface.

pub mod commands;
pub mod expr;
pub mod plot;
pub mod report;
pub mod scenario;

pub use commands::{run, Cli, Failure, Outcome};
pub use report::Report;
pub use scenario::{load_path, load_str, LoadError, Loaded, ScenarioFile};
