use std::process::ExitCode;

use clap::Parser;
use styletree::{error_line, run, Cli};
use styletree_core::Error;

/// Sizes the global worker pool from `STYLETREE_THREADS`, if set.
fn init_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var("STYLETREE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("STYLETREE_THREADS: '{value}' is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("STYLETREE_THREADS: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match init_threads().and_then(|()| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::FAILURE
        }
    }
}
