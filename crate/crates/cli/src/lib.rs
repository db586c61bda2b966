//! The `malpha` command-line tool as a library, so runs can be driven
//! in-process.

pub mod args;
pub mod error;
pub mod ingest;
pub mod report;
pub mod run;

pub use args::{Cli, Command, Format};
pub use error::{exit, CliError};
pub use run::{run, Outcome};

/// Writes `text` to `path`, or to standard output for `-`.
pub fn write_output(path: &str, text: &str) -> std::io::Result<()> {
    use std::io::Write;
    if path == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())?;
        out.flush()
    } else {
        std::fs::write(path, text)
    }
}
