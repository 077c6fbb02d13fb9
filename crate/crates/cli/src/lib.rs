//! Command-line front end: argument parsing, dispatch into `lmp-core`, and
//! all file formats.

pub mod config;
pub mod emit;
pub mod run;

pub use config::{Cli, RunConfig};
pub use run::{run, Outcome};
