use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use fdp_cli::{run, Cli, CliError};

fn emit(cli: &Cli) -> Result<(), CliError> {
    let out = run(cli)?;
    let text = if cli.json {
        let mut s = serde_json::to_string_pretty(&out.json).expect("JSON values always serialize");
        s.push('\n');
        s
    } else {
        out.csv
    };
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        }),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io {
            path: "<stdout>".into(),
            source: e,
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let message = e.render().to_string();
            let first = message.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("{}", CliError::Usage(first.to_string()).record());
            return ExitCode::from(2);
        }
    };
    match emit(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::FAILURE
        }
    }
}
