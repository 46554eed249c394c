//! Command-line front end.
//!
//! One binary with subcommands for scenario solving, lattice property sweeps,
//! identification, tariffs, the applications and the golden regression table. Every
//! report opens with the subcommand, the seed and a hash of the effective config, and
//! re-running with the same inputs reproduces it byte for byte.
//!
//! Exit codes: 0 on success, 1 when a checked property or internal assertion fails
//! (with a `violation {json}` line on standard error), 2 on input errors.

mod builtin;
mod commands;
mod golden;
mod manifest;
mod report;

use std::io::Write;
use std::path::Path;

use clap::{Parser, Subcommand};

pub use builtin::{builtin_scenario, BUILTIN_SCENARIOS};
pub use commands::{
    ElicitArgs, GoldenArgs, IdentifyArgs, ProjectArgs, PropcheckArgs, SolveArgs, StickyArgs, TariffArgs,
};
pub use golden::{golden_suite, GoldenRow};
pub use manifest::{dispatch, manifest_args, RunManifest};
pub use report::{
    config_hash, Emitted, Failure, Format, Outcome, Provenance, Table, EXIT_INPUT, EXIT_OK, EXIT_VIOLATION,
};

/// Parsed command line.
#[derive(Debug, Parser)]
#[command(name = "expost", version, about = "Two-period choice with ex post rationalization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a scenario file and report every second-period choice.
    Solve(SolveArgs),
    /// Sweep generated lattice instances through the monotone-distortion checker.
    Propcheck(PropcheckArgs),
    /// Recover cone normals and the regret weight from a simulated choice oracle.
    Identify(IdentifyArgs),
    /// Optimal two-part tariff and demand curve.
    Tariff(TariffArgs),
    /// Project persistence application.
    Project(ProjectArgs),
    /// Sticky repeated choice application.
    Sticky(StickyArgs),
    /// Belief elicitation simulator.
    Elicit(ElicitArgs),
    /// Expected-versus-actual table of the reference examples.
    Golden(GoldenArgs),
    /// Run a subcommand described by a JSON manifest.
    Run {
        /// Path of the manifest file.
        #[arg(long)]
        manifest: std::path::PathBuf,
    },
}

/// Runs one parsed command and returns what it produced.
pub fn run_command(command: &Command) -> Result<Outcome, Failure> {
    match command {
        Command::Solve(a) => commands::solve(a),
        Command::Propcheck(a) => commands::propcheck(a),
        Command::Identify(a) => commands::identify(a),
        Command::Tariff(a) => commands::tariff(a),
        Command::Project(a) => commands::project(a),
        Command::Sticky(a) => commands::sticky(a),
        Command::Elicit(a) => commands::elicit(a),
        Command::Golden(a) => golden::golden(a),
        Command::Run { manifest } => {
            let m = RunManifest::load(manifest)?;
            let args = manifest_args(&m)?;
            let cli = Cli::try_parse_from(args).map_err(|e| Failure::Input(e.to_string()))?;
            if matches!(cli.command, Command::Run { .. }) {
                return Err(Failure::Input("a manifest cannot run another manifest".into()));
            }
            run_command(&cli.command)
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

/// Runs a command, writes its outputs and maps the result to an exit code.
pub fn execute(command: &Command) -> i32 {
    let outcome = match run_command(command) {
        Ok(o) => o,
        Err(f) => {
            report_failure(&f);
            return f.exit_code();
        }
    };
    let stdout = std::io::stdout();
    for e in &outcome.emitted {
        let written = match &e.path {
            Some(p) => write_file(p, &e.text),
            None => stdout.lock().write_all(e.text.as_bytes()).map_err(Failure::from),
        };
        if let Err(f) = written {
            report_failure(&f);
            return f.exit_code();
        }
    }
    for line in &outcome.summary {
        eprintln!("{line}");
    }
    for v in &outcome.violations {
        eprintln!("violation {v}");
    }
    if outcome.violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn report_failure(f: &Failure) {
    match f {
        Failure::Input(m) => eprintln!("error: {m}"),
        Failure::Violation(m) => eprintln!("violation {}", serde_json::json!({ "kind": "error", "detail": m })),
    }
}

/// Parses `args` (including the program name) and executes; clap errors exit with 2.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli.command),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
