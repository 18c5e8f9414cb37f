use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use closing_cli::report::write_atomic;
use closing_cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let json = outcome.report.to_json();
    let written = (|| -> std::io::Result<()> {
        if let Some((path, text)) = &outcome.map_out {
            write_atomic(path, text.as_bytes())?;
        }
        if let Some(path) = &cli.csv_out {
            write_atomic(path, &outcome.report.to_csv())?;
        }
        match &cli.json_out {
            Some(path) => write_atomic(path, json.as_bytes()),
            None => std::io::stdout().lock().write_all(json.as_bytes()),
        }
    })();
    if let Err(e) = written {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(3);
    }
    ExitCode::from(outcome.exit_code)
}
