use std::process::ExitCode;

use clap::Parser;
use prepost_cli::args::Cli;
use prepost_cli::error::TOLERANCE_FAILURE;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let doc = match prepost_cli::run(&cli) {
        Ok(doc) => doc,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    for w in &doc.warnings {
        eprintln!("warning: {w}");
    }
    match prepost_cli::render(&doc, cli.out) {
        Ok(text) if text.ends_with('\n') => print!("{text}"),
        Ok(text) => println!("{text}"),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    }
    if doc.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: tolerance check failed");
        ExitCode::from(TOLERANCE_FAILURE as u8)
    }
}
