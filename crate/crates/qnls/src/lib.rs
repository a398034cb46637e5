//! File formats, run configuration and the `qnls` command-line front end
//! for the numerics in `qnls-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod exit;
pub mod io;
pub mod json;
pub mod system;

pub use exit::CliError;
