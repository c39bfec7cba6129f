//! Configuration-driven checks with machine-readable reports.

mod checks;
mod config;
mod report;

pub use checks::{run_check, CHECK_NAMES};
pub use config::{
    ExperimentConfig, FieldSpec, IntegratorSpec, KernelSpec, LoopSpec, ManifoldSpec,
    QuadratureSpec, TransitionSpec,
};
pub use report::{CheckReport, CheckStatus, PointError};
