//! Experiment harness: scenario files, CSV sweeps, and the control-plane
//! launchers used by the `ris-lab` binary.

pub mod error;
pub mod repl;
pub mod scenario;
pub mod service;
pub mod sweep;

pub use error::CliError;
pub use scenario::Scenario;
