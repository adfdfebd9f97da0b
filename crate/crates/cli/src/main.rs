use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use oqho_cli::{run, CliError, RunConfig};

fn emit(config: &RunConfig, text: &str) -> Result<(), CliError> {
    match &config.output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn main() -> ExitCode {
    let config = RunConfig::parse();
    let result = run(&config).and_then(|out| emit(&config, &out.text).map(|_| out));
    match result {
        Ok(out) => {
            if let Some(d) = &out.diagnostic {
                eprintln!("{d}");
            }
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
