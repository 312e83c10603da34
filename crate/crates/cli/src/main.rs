mod args;
mod commands;
mod output;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Format, ReplayArgs};
use output::{destination, usage, write_to, CliError, Outcome, RunManifest};

fn dispatch(command: &Command, manifest: &RunManifest) -> Result<Outcome, CliError> {
    match command {
        Command::Bell(a) => commands::bell::run(a),
        Command::Ensemble(a) => commands::ensemble::run(a, manifest),
        Command::Inequality(a) => commands::inequality::run(a),
        Command::Wigner(a) => commands::wigner::run(a, manifest),
        Command::Eraser(a) => commands::eraser::run(a),
        Command::Replay(_) => Err(usage("replay cannot be nested")),
    }
}

fn fail_on_checks(outcome: &Outcome) -> Result<(), CliError> {
    let failed = outcome.failed_checks();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invariant(failed.join("; ")))
    }
}

fn execute(command: &Command, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let manifest = RunManifest::new(command, format)?;
    let outcome = dispatch(command, &manifest)?;
    let dest = destination(out, command.name(), format);
    write_to(dest.as_deref(), &outcome.render(&manifest))?;
    for (path, text) in &outcome.side_files {
        write_to(Some(path), text)?;
    }
    fail_on_checks(&outcome)
}

fn replay(args: &ReplayArgs, out: Option<&Path>) -> Result<(), CliError> {
    let original = std::fs::read_to_string(&args.file)?;
    let stored = RunManifest::extract(&original)?;
    let command = stored.command()?;
    let mut manifest = RunManifest::new(&command, stored.format)?;
    manifest.timestamp = stored.timestamp;
    let outcome = dispatch(&command, &manifest)?;
    let rendered = outcome.render(&manifest);
    if args.check {
        if rendered != original {
            return Err(CliError::Invariant(format!("replay of {} differs from the file", args.file.display())));
        }
        eprintln!("replay of {} is identical", args.file.display());
    } else {
        write_to(out, &rendered)?;
    }
    fail_on_checks(&outcome)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Replay(a) => replay(a, cli.out.as_deref()),
        command => execute(command, cli.format, cli.out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
