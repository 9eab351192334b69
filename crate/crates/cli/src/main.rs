mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use commands::Usage;
use output::Run;

fn main() -> ExitCode {
    let (argv, echo) = match config::expand(std::env::args_os().collect()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(argv);
    let name = cli.command.name();
    let result = Run::new(&cli.out, name).and_then(|mut run| {
        let outcome = commands::run(&cli.command, &mut run);
        if let Err(e) = &outcome {
            if e.downcast_ref::<Usage>().is_none() {
                run.fail(name, format_args!("{e:#}"));
            }
        }
        let (manifest, failures) = run.finish(serde_json::to_value(&cli.command)?, echo.as_ref())?;
        outcome.map(|()| (manifest, failures))
    });
    match result {
        Ok((manifest, failures)) if failures.is_empty() => {
            println!("manifest: {}", manifest.display());
            ExitCode::SUCCESS
        }
        Ok((manifest, failures)) => {
            for f in &failures {
                eprintln!("failed: {f}");
            }
            eprintln!("{} item(s) failed; see {}", failures.len(), manifest.display());
            ExitCode::FAILURE
        }
        Err(e) if e.downcast_ref::<Usage>().is_some() => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
