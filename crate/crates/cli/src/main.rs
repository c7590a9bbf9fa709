use std::process::ExitCode;

use clap::Parser;
use ia_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match ia_cli::run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.report.table);
            for p in &outcome.written {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("mmw-ia: error: {e:#}");
            ExitCode::from(ia_cli::exit_code(&e))
        }
    }
}
