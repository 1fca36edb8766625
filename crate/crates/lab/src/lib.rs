//! Experiment runner for `ganlab-core`: TOML configs, seeded runs that write
//! a manifest plus CSV and SVG outputs, and re-verification of finished runs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dist;
pub mod error;
pub mod experiments;
pub mod params;
pub mod plot;
pub mod table;
pub mod verify;

pub use error::{LabError, Result};
pub use experiments::{run, Experiment, RunArtifact};
pub use params::{ConfigFile, Params};
pub use verify::{verify, Report};
