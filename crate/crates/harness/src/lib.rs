//! Scenario runner for the flocking simulator: loading, running, batch
//! execution, plots and the acceptance checks.

pub mod acceptance;
pub mod batch;
pub mod driver;
pub mod plot;
pub mod random;
pub mod run;
pub mod scenario;

pub use run::{run_scenario, Metrics, RunOutput};
pub use scenario::{LoadedScenario, Scenario, ScenarioError};
