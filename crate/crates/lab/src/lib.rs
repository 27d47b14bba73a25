//! Scenario runner, figure reproduction and property sweeps on top of `ineq-core`.

pub mod config;
pub mod error;
pub mod figures;
pub mod run;
pub mod svg;
pub mod sweep;

pub use error::{LabError, Result};
