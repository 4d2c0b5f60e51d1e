//! Command-line front end for styletree: dataset extraction into a TSV
//! feature store, repeated train/test evaluation, class similarity matrices
//! and neighbor-joining trees.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;
pub mod store;

pub use args::{run, Cli, Command};
pub use config::{Overrides, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One-line machine-parsable rendering of an error: `error: kind=<kind> message=<text>`.
pub fn error_line(err: &styletree_core::Error) -> String {
    let message = err.to_string().replace(['\n', '\r'], " ");
    format!("error: kind={} message={message}", err.kind())
}
