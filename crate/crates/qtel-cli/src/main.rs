use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qtel_cli::config::load_config;
use qtel_cli::report::{
    emit_feasibility_jsonl, emit_feasibility_text, emit_run_jsonl, emit_run_text,
    emit_session_jsonl, emit_session_text, emit_verify_jsonl, emit_verify_text, VerifyLine,
};
use qtel_cli::scenario::{assemble, parse_transport, Scenario, ScenarioMode};
use qtel_core::{
    condition_residual, feasibility, run_session, run_with, synthesize, Error, FeasibilityVerdict,
    Result, RunMode,
};

/// Synthesizes and simulates exact teleportation protocols.
#[derive(Parser)]
#[command(name = "qtel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario and report every protocol branch.
    Run(CommonArgs),
    /// Synthesize and check the exact-transfer condition; no simulation.
    Verify(CommonArgs),
    /// Print the resource's Schmidt spectrum and the feasibility verdict.
    Feasibility(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario configuration file.
    config: PathBuf,
    /// Seed for seeded inputs, sampling and sessions; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Classical channel, memory or tcp:<host:port>; overrides the config.
    #[arg(long)]
    transport: Option<String>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Jsonl,
}

/// Reads QT_TOL, falling back to the command's default tolerance.
fn tolerance(default: f64) -> Result<f64> {
    match std::env::var("QT_TOL") {
        Ok(text) => {
            let value: f64 = text
                .trim()
                .parse()
                .map_err(|_| Error::Validation(format!("QT_TOL is not a number: {text:?}")))?;
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::Validation(format!(
                    "QT_TOL must be a positive finite number, got {text:?}"
                )));
            }
            Ok(value)
        }
        Err(std::env::VarError::NotPresent) => Ok(default),
        Err(e) => Err(Error::Validation(format!("QT_TOL unreadable: {e}"))),
    }
}

fn load_scenario(args: &CommonArgs) -> Result<Scenario> {
    let config = load_config(&args.config)?;
    let transport = args
        .transport
        .as_deref()
        .map(parse_transport)
        .transpose()?;
    assemble(&config, args.seed, transport)
}

fn report_infeasible(
    out: &mut impl Write,
    name: &str,
    n1: usize,
    spectrum: Vec<f64>,
    format: Format,
) -> Result<u8> {
    let verdict = FeasibilityVerdict {
        feasible: false,
        lambdas: spectrum,
        required: n1,
    };
    match format {
        Format::Text => emit_feasibility_text(out, name, &verdict)?,
        Format::Jsonl => emit_feasibility_jsonl(out, &verdict)?,
    }
    Ok(2)
}

fn cmd_run(args: &CommonArgs) -> Result<u8> {
    let sc = load_scenario(args)?;
    let tol = tolerance(1e-8)?;
    let out = &mut std::io::stdout().lock();

    let (unitary, family) = match synthesize(&sc.resource, sc.n1, &sc.phases) {
        Ok(pair) => pair,
        Err(Error::Infeasible { n1, spectrum }) => {
            return report_infeasible(out, &sc.name, n1, spectrum, args.format);
        }
        Err(e) => return Err(e),
    };

    match &sc.mode {
        ScenarioMode::Exhaustive | ScenarioMode::Sampled { .. } => {
            let (mode, mode_name) = match &sc.mode {
                ScenarioMode::Exhaustive => (RunMode::Exhaustive, "exhaustive"),
                ScenarioMode::Sampled { count } => (
                    RunMode::Sampled {
                        count: *count,
                        seed: sc.seed,
                    },
                    "sampled",
                ),
                ScenarioMode::Session { .. } => unreachable!(),
            };
            let report = run_with(&sc.input, &sc.resource, &unitary, &family, mode)?;
            match args.format {
                Format::Text => emit_run_text(out, &sc.name, &report, &family, mode_name)?,
                Format::Jsonl => emit_run_jsonl(out, &report, &family)?,
            }
            if report.branches.is_empty() || report.min_fidelity >= 1.0 - tol {
                Ok(0)
            } else {
                eprintln!(
                    "minimum branch fidelity {:.12} is below 1 - {tol:e}",
                    report.min_fidelity
                );
                Ok(1)
            }
        }
        ScenarioMode::Session { transport } => {
            let session = run_session(
                &sc.input,
                &sc.resource,
                &unitary,
                &family,
                sc.seed,
                transport,
            )?;
            match args.format {
                Format::Text => emit_session_text(out, &sc.name, &session, &family)?,
                Format::Jsonl => emit_session_jsonl(out, &session, &family)?,
            }
            if session.fidelity >= 1.0 - tol {
                Ok(0)
            } else {
                eprintln!(
                    "session fidelity {:.12} is below 1 - {tol:e}",
                    session.fidelity
                );
                Ok(1)
            }
        }
    }
}

fn cmd_verify(args: &CommonArgs) -> Result<u8> {
    let sc = load_scenario(args)?;
    let tol = tolerance(1e-10)?;
    let out = &mut std::io::stdout().lock();

    let (unitary, _) = match synthesize(&sc.resource, sc.n1, &sc.phases) {
        Ok(pair) => pair,
        Err(Error::Infeasible { n1, spectrum }) => {
            return report_infeasible(out, &sc.name, n1, spectrum, args.format);
        }
        Err(e) => return Err(e),
    };
    let residual = condition_residual(&unitary, &sc.resource, &sc.phases, &sc.input)?;
    let pass = residual <= tol;
    let line = VerifyLine {
        n1: sc.n1,
        n2: sc.resource.dim_sender(),
        n3: sc.resource.dim_receiver(),
        residual,
        tolerance: tol,
        verdict: if pass { "pass".into() } else { "fail".into() },
    };
    match args.format {
        Format::Text => emit_verify_text(out, &sc.name, &line)?,
        Format::Jsonl => emit_verify_jsonl(out, &line)?,
    }
    Ok(if pass { 0 } else { 1 })
}

fn cmd_feasibility(args: &CommonArgs) -> Result<u8> {
    let sc = load_scenario(args)?;
    let out = &mut std::io::stdout().lock();
    let verdict = feasibility(&sc.resource, sc.n1)?;
    match args.format {
        Format::Text => emit_feasibility_text(out, &sc.name, &verdict)?,
        Format::Jsonl => emit_feasibility_jsonl(out, &verdict)?,
    }
    Ok(if verdict.feasible { 0 } else { 2 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Feasibility(args) => cmd_feasibility(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        // A closed stdout (head, broken pager) is not a scenario failure.
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
