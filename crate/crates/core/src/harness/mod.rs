//! Configuration, CSV and plot-script output, the experiment commands and
//! the acceptance criteria.

pub mod config;
pub mod experiments;
pub mod plots;
pub mod report;
pub mod tables;
pub mod validate;

pub use config::{ConfigBuilder, Perturbation, RunConfig};
pub use report::{CriterionResult, ExperimentReport};
pub use validate::{Suite, Validation, CRITERIA};
