use clap::Parser;
use ellmeasure_cli::{run, RunConfig};
use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let config = RunConfig::parse();
    let report = match run(&config) {
        Ok(r) => r.render(),
        Err(e) => {
            eprintln!("ellmeasure {}: {e}", config.command.name());
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let written = match &config.command.output().out {
        Some(path) => std::fs::write(path, report.as_bytes()),
        None => std::io::stdout().lock().write_all(report.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("ellmeasure: cannot write report: {e}");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
