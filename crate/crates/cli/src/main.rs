use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use selflink_cli::{run, Cli, CliError, Format};

// 0: every requested computation passed its contracts
// 1: a computation failed, disagreed or missed the published value
// 2: bad arguments or input files (clap uses 2 as well)
fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(report) => {
            let text = match cli.command.format() {
                Format::Json => report.to_json() + "\n",
                Format::Text => report.render_text(),
            };
            // a closed pipe (`| head`) is not an error worth a panic
            let _ = std::io::stdout().write_all(text.as_bytes());
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Input(_) | CliError::Invalid(_) => ExitCode::from(2),
            }
        }
    }
}
