use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use biver::semantics::Domain;
use biver_cli::{cmd_check, cmd_transform, cmd_translate, cmd_verify, Backend, CliError, Report, VerifyOptions};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "biver", version, about = "Check forall-exists relational properties through alignment products")]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sort-check a problem and check well-formedness, framing and projections.
    Check { file: PathBuf },
    /// Print the bi-command with its adequacy checks inserted.
    Transform { file: PathBuf },
    /// Print the unary product program of the instrumented bi-command.
    Translate { file: PathBuf },
    /// Verify the problem's specification.
    Verify {
        file: PathBuf,
        #[arg(long, default_value = "oracle")]
        backend: Backend,
        /// Value range for integers, e.g. -2..2.
        #[arg(long, default_value = "-2..2", allow_hyphen_values = true, value_parser = biver_cli::parse_domain)]
        domain: Domain,
        /// Loop iteration bound per loop.
        #[arg(long, default_value_t = 32)]
        fuel: u32,
        /// Initial range for one variable, e.g. n=1..3. Repeatable.
        #[arg(long, allow_hyphen_values = true, value_parser = biver_cli::parse_init)]
        init: Vec<(String, Domain)>,
        /// Solver command line (default: $BIVER_SOLVER, then "z3 -in").
        #[arg(long)]
        solver: Option<String>,
        /// Per-obligation solver timeout in seconds.
        #[arg(long, default_value_t = 10.0)]
        timeout: f64,
    },
}

fn run(cli: Cli) -> Result<Report, CliError> {
    match cli.cmd {
        Cmd::Check { file } => cmd_check(&file),
        Cmd::Transform { file } => cmd_transform(&file),
        Cmd::Translate { file } => cmd_translate(&file),
        Cmd::Verify {
            file,
            backend,
            domain,
            fuel,
            init,
            solver,
            timeout,
        } => {
            if !(timeout.is_finite() && timeout > 0.0) {
                return Err(CliError::Usage(format!("--timeout must be positive, got {timeout}")));
            }
            let opts = VerifyOptions {
                backend,
                domain,
                fuel,
                init,
                solver,
                timeout: Duration::from_secs_f64(timeout),
            };
            cmd_verify(&file, &opts)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    let json = cli.json;
    let (code, out) = match run(cli) {
        Ok(report) => {
            let out = if json {
                serde_json::to_string_pretty(&report.json).unwrap()
            } else {
                report.text.trim_end().to_string()
            };
            (report.exit_code(), out)
        }
        Err(e) => {
            if json {
                println!("{}", serde_json::to_string_pretty(&e.to_json()).unwrap());
            }
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    println!("{out}");
    ExitCode::from(code as u8)
}
