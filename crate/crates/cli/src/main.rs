use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use permlab_cli::{execute, Cli, OutputFormat};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = execute(cli.command);
    if let Some(report) = &run.report {
        let text = match run.format {
            OutputFormat::Json => report.to_json() + "\n",
            OutputFormat::Text => report.to_text(),
        };
        let _ = std::io::stdout().lock().write_all(text.as_bytes());
    }
    match run.error {
        None => ExitCode::SUCCESS,
        Some(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
