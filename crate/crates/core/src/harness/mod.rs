//! Configuration, runs, sweeps, κ calibration and canned scenario suites.

mod calibrate;
mod config;
mod presets;
mod run;
mod suites;
mod sweep;

use thiserror::Error;

pub use calibrate::{calibrate_kappa, KappaCalibration, KappaProbe};
pub use config::{ConfigError, RunConfig, SourceKindSpec, SourceProfile, SourceSpec};
pub use presets::{random_modes, InitialSpec, PresetKind};
pub use run::{run, run_observed, RunRecord, StepExtremes};
pub use suites::{scenario_suite, SuiteCheck, SuiteOptions, SuiteReport, SUITE_NAMES};
pub use sweep::{sweep, sweep_summary, SweepEntry};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("model: {0}")]
    Model(#[from] crate::model::ModelError),
    #[error("solver: {0}")]
    Solver(#[from] crate::solver::SolverError),
    #[error("diagnostics: {0}")]
    Diagnostics(#[from] crate::diagnostics::DiagnosticsError),
    #[error("grid: {0}")]
    Grid(#[from] crate::grid::GridError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("unknown sweep axis {0:?}; expected a numeric key such as params.xi")]
    UnknownAxis(String),
    #[error("unknown suite {0:?}; available: {}", SUITE_NAMES.join(", "))]
    UnknownSuite(String),
    #[error("calibration: {0}")]
    Calibration(String),
}

impl HarnessError {
    /// Whether the failure stems from user input rather than the run itself.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            HarnessError::Config(_)
                | HarnessError::Model(_)
                | HarnessError::UnknownAxis(_)
                | HarnessError::UnknownSuite(_)
        )
    }
}
