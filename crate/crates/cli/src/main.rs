use std::io;
use std::process::ExitCode;

use clap::Parser;
use dpse_cli::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = dpse_cli::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let code = run(cli, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
