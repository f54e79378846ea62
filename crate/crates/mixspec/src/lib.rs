//! Config files, report formats and the command-line driver for
//! `mixspec-core`.

pub mod config;
pub mod output;
pub mod presets;
pub mod run;

pub use run::{cmd_solve, cmd_sweep, cmd_verify, Options};
