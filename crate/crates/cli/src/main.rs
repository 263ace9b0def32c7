//! `normdef` — run deformation checks described by scenario files.

mod catalog;
mod report;
mod runner;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::runner::{run_scenario, CheckKind, RunOptions};
use crate::scenario::Scenario;

#[derive(Parser)]
#[command(
    name = "normdef",
    version,
    about = "Normal deformations of G-structures on local charts",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Global tolerance override applied to every check.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Per-axis grid resolution override.
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Output format.
    #[arg(long, global = true, default_value = "json", value_parser = ["json", "csv"])]
    format: String,

    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check requested by the scenario.
    Check { file: PathBuf },
    /// Run only the connection-deformation check.
    Deform { file: PathBuf },
    /// Run only the obstruction-form check.
    Zeta { file: PathBuf },
    /// Run only the intrinsic-torsion check.
    Torsion { file: PathBuf },
    /// Run only the instanton check.
    Instanton { file: PathBuf },
    /// List bundled scenarios, or emit one by name.
    Catalog { name: Option<String> },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    let (file, only) = match &cli.command {
        Command::Check { file } => (file, None),
        Command::Deform { file } => (file, Some(CheckKind::Deform)),
        Command::Zeta { file } => (file, Some(CheckKind::Zeta)),
        Command::Torsion { file } => (file, Some(CheckKind::Torsion)),
        Command::Instanton { file } => (file, Some(CheckKind::Instanton)),
        Command::Catalog { name } => {
            return run_catalog(name.as_deref(), cli.output.as_deref());
        }
    };

    let raw = match std::fs::read(file) {
        Ok(raw) => raw,
        Err(e) => {
            eprintln!("error: cannot read `{}`: {e}", file.display());
            return ExitCode::from(1);
        }
    };
    let sc = match Scenario::from_json(&raw) {
        Ok(sc) => sc,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    let opts = RunOptions {
        tol: cli.tol,
        grid: cli.grid,
        only,
    };
    let report = match run_scenario(&sc, &raw, &opts) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    let rendered = report.render(&cli.format);
    if let Err(e) = emit(&rendered, cli.output.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn run_catalog(name: Option<&str>, output: Option<&std::path::Path>) -> ExitCode {
    match name {
        None => {
            let listing = catalog::BUILTIN_NAMES.join("\n") + "\n";
            match emit(&listing, output) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Some(name) => match catalog::builtin_catalog(name) {
            Ok(sc) => match emit(&sc.to_json(), output) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            },
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}

fn emit(text: &str, output: Option<&std::path::Path>) -> Result<(), String> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write `{}`: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
