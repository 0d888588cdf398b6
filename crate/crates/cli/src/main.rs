mod cli;
mod commands;
mod error;

use clap::Parser;

fn main() {
    let args = cli::Cli::parse();
    if let Err(e) = commands::run(args) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
