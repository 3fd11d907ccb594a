//! The `mplab` command-line tool.

mod args;
mod commands;
mod config;

use std::ffi::OsString;

use clap::Parser;

pub use args::{Cli, Command};

/// Exit status: 0 on success, 1 when a check fails, 2 on usage or input errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    CheckFailed,
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Some(n) = std::env::var("MPLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match commands::dispatch(&cli) {
        Ok(Status::Ok) => 0,
        Ok(Status::CheckFailed) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}
