//! Thin binary wrapper around the library's command-line interface.

use std::process::ExitCode;

fn main() -> ExitCode {
    let code = cellpat::cli::run(
        std::env::args(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    ExitCode::from(code as u8)
}
