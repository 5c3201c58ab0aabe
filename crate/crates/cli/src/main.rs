//! `eaqc`: command-line front end. Every data command writes a `#` header block
//! (version, resolved config, seed, timing) followed by one CSV table.

mod args;
mod commands;
mod error;
mod output;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use error::CliError;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or_default();
            let err = CliError::Config(first.trim_start_matches("error: ").to_string());
            eprintln!("{err}");
            std::process::exit(err.exit_code());
        }
    };
    if let Err(err) = commands::run(&cli) {
        eprintln!("{err}");
        std::process::exit(err.exit_code());
    }
}
