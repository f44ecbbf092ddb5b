//! Batch front end: configuration files, presets, output files and the
//! `run`, `analyze` and `verify` commands.

pub mod commands;
pub mod config;
pub mod io;
pub mod presets;
pub mod verify;

pub use commands::{cmd_analyze, cmd_run, RunStatus};
pub use config::{parse_config, InitSpec, RunConfig};
pub use presets::preset;
pub use verify::{cmd_verify, Mutation};
