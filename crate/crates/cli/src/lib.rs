//! Command-line front end for hypangle-core.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use anyhow::Result;
use std::time::Instant;

/// Exit status for invalid flags or arguments.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for capacity, overflow and I/O failures.
pub const EXIT_RESOURCE: i32 = 3;

/// Resolves the configuration, runs the command on a pool of the requested
/// size and writes the artifacts.
pub fn run(cli: &args::Cli) -> Result<()> {
    let cfg = config::resolve(cli)?;
    let start = Instant::now();
    let (art, threads) = match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            (pool.install(|| commands::run(&cfg))?, n)
        }
        None => (commands::run(&cfg)?, rayon::current_num_threads()),
    };
    output::emit(&cfg, &art, start.elapsed().as_secs_f64(), threads)
}

/// Maps an error to the documented exit status.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<config::UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<hypangle_core::Error>() {
            return match e {
                hypangle_core::Error::Capacity { .. }
                | hypangle_core::Error::Overflow(_)
                | hypangle_core::Error::SearchLimit(_) => EXIT_RESOURCE,
                _ => EXIT_USAGE,
            };
        }
        if cause.is::<std::io::Error>() || cause.is::<rayon::ThreadPoolBuildError>() {
            return EXIT_RESOURCE;
        }
    }
    EXIT_USAGE
}
