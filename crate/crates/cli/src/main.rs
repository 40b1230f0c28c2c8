//! Command-line driver: `simulate` propagates a configured model and writes
//! population traces, `design` solves a transfer protocol and echoes the
//! retuned fields, `verify` runs the seeded self-check suite.
//!
//! Exit codes: 0 success, 1 validation failure (bad config, rejected
//! protocol, failed verification), 2 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use esst_core::config::{self, Config, EnantiomerSelection, ModelKind, ProtocolRequest};
use esst_core::model::eliminate_resonant;
use esst_core::protocol::{evaluate_plan, realize_fields, FidelityReport, ProtocolSolution};
use esst_core::units::TWO_PI;
use esst_core::vibronic::Chirality;
use esst_core::{drive, output, sim, verify, Error};

#[derive(Parser)]
#[command(
    name = "esst",
    version,
    about = "Enantio-specific state transfer: simulate, design, and verify"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the configured model and write CSV traces plus a summary.
    Simulate(SimulateArgs),
    /// Solve a transfer protocol and print the field plan as JSON.
    Design(DesignArgs),
    /// Run the self-verification suite and print its report as JSON.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Effective,
    Full,
    Lab,
}

impl From<ModelArg> for ModelKind {
    fn from(value: ModelArg) -> Self {
        match value {
            ModelArg::Effective => ModelKind::Effective,
            ModelArg::Full => ModelKind::Full,
            ModelArg::Lab => ModelKind::Lab,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EnantiomerArg {
    #[value(alias = "l")]
    Left,
    #[value(alias = "r")]
    Right,
    Both,
}

impl From<EnantiomerArg> for EnantiomerSelection {
    fn from(value: EnantiomerArg) -> Self {
        match value {
            EnantiomerArg::Left => EnantiomerSelection::Left,
            EnantiomerArg::Right => EnantiomerSelection::Right,
            EnantiomerArg::Both => EnantiomerSelection::Both,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for populations_<enantiomer>.csv and summary.json.
    #[arg(long)]
    out: PathBuf,
    /// Override the configured model.
    #[arg(long, value_enum, ignore_case = true)]
    model: Option<ModelArg>,
    /// Override the configured enantiomer selection (left/L, right/R, both).
    #[arg(long, value_enum, ignore_case = true)]
    enantiomer: Option<EnantiomerArg>,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ModeArg {
    DarkLeft,
    DarkRight,
    SyncRight,
    SyncLeft,
    Search,
}

#[derive(Args)]
struct DesignArgs {
    /// Run configuration file; supplies fields, dipoles, and detunings.
    #[arg(long)]
    config: PathBuf,
    /// Optional path for the JSON report (also printed to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Protocol mode; falls back to the config's [protocol] section.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Half-period count for the dark modes.
    #[arg(long)]
    n: Option<u32>,
    /// Full periods of the returning left form (synchronized modes).
    #[arg(long)]
    n_left: Option<u32>,
    /// Periods of the transferring right form (synchronized modes).
    #[arg(long)]
    n_right: Option<u32>,
    /// Coupling ratio to approach in search mode.
    #[arg(long)]
    target_ratio: Option<f64>,
    /// Search bound on the period integers.
    #[arg(long)]
    n_max: Option<u32>,
    /// Skip the four-level cross-check of the designed protocol.
    #[arg(long)]
    no_full_check: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Optional configuration; when given it is validated and its loop
    /// phases are checked alongside the generic suite.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for the randomized sweeps.
    #[arg(long, default_value_t = 2026)]
    seed: u64,
    /// Optional path for the JSON report (also printed to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Field amplitude and phase in the units config files use.
#[derive(Serialize)]
struct FieldEcho {
    amplitude_2pi_mhz: f64,
    phase_rad: f64,
}

impl FieldEcho {
    fn from_field(field: &drive::DriveField) -> Self {
        FieldEcho {
            amplitude_2pi_mhz: field.amplitude / (TWO_PI * 1e6),
            phase_rad: field.phase,
        }
    }
}

#[derive(Serialize)]
struct FieldsEcho {
    field_12: FieldEcho,
    field_23: FieldEcho,
    field_13: FieldEcho,
}

/// JSON report of a solved protocol: the solution, the fields realizing it,
/// and the enantio-discrimination it achieves.
#[derive(Serialize)]
struct DesignReport<'a> {
    version: &'static str,
    solution: &'a ProtocolSolution,
    detuning_2pi_mhz: f64,
    omega_eff_2pi_mhz: f64,
    omega21_2pi_mhz: f64,
    fields: FieldsEcho,
    fidelity: &'a FidelityReport,
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Error> {
    let mut config = config::load_config(&args.config)?;
    if let Some(model) = args.model {
        config.simulation.model = model.into();
    }
    if let Some(enantiomer) = args.enantiomer {
        config.simulation.enantiomer = enantiomer.into();
    }
    let run = sim::run(&config)?;
    let written = sim::write_outputs(&run, &args.out)?;
    for (er, summary) in run.traces.iter().zip(&run.summary.runs) {
        log::info!(
            "{:?}: peak p2 = {:.6} at {:.4e} s",
            er.chirality,
            summary.peak_p2,
            summary.peak_p2_time_s
        );
    }
    for path in &written {
        println!("{}", path.display());
    }
    Ok(())
}

fn protocol_request(args: &DesignArgs, config: &Config) -> Result<ProtocolRequest, Error> {
    let Some(mode) = args.mode else {
        return config.protocol.ok_or_else(|| {
            Error::Protocol(
                "no protocol requested: pass --mode or add a [protocol] section".into(),
            )
        });
    };
    let n = args.n.unwrap_or(0);
    let n_left = args.n_left.unwrap_or(1);
    let n_right = args.n_right.unwrap_or(0);
    Ok(match mode {
        ModeArg::DarkLeft => ProtocolRequest::DarkLeft { n },
        ModeArg::DarkRight => ProtocolRequest::DarkRight { n },
        ModeArg::SyncRight => ProtocolRequest::SyncRight { n_left, n_right },
        ModeArg::SyncLeft => ProtocolRequest::SyncLeft { n_left, n_right },
        ModeArg::Search => ProtocolRequest::Search {
            target_ratio: args.target_ratio.ok_or_else(|| {
                Error::Protocol("search mode needs --target-ratio".into())
            })?,
            n_max: args.n_max.unwrap_or(8),
        },
    })
}

fn cmd_design(args: &DesignArgs) -> Result<(), Error> {
    let config = config::load_config(&args.config)?;
    let request = protocol_request(args, &config)?;
    let left = drive::build_coupling_set(&config.fields, &config.dipoles, Chirality::Left)?;
    let eff = eliminate_resonant(&left, &config.detunings)?;
    let solution = sim::solve_request(&eff, &request)?;
    let delta = config.detunings.shared()?;
    let plan = realize_fields(&solution, &config.fields, &config.dipoles, delta)?;
    let fidelity = evaluate_plan(&plan, !args.no_full_check)?;
    let report = DesignReport {
        version: sim::VERSION,
        solution: &plan.solution,
        detuning_2pi_mhz: delta / (TWO_PI * 1e6),
        omega_eff_2pi_mhz: plan.effective.omega_eff.norm() / (TWO_PI * 1e6),
        omega21_2pi_mhz: plan.couplings_left.omega21.norm() / (TWO_PI * 1e6),
        fields: FieldsEcho {
            field_12: FieldEcho::from_field(&plan.fields.field_12),
            field_23: FieldEcho::from_field(&plan.fields.field_23),
            field_13: FieldEcho::from_field(&plan.fields.field_13),
        },
        fidelity: &fidelity,
    };
    let text = output::render_json(&report)?;
    print!("{text}");
    if let Some(path) = &args.out {
        output::write_text(path, &text)?;
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode, Error> {
    let config = match &args.config {
        Some(path) => Some(config::load_config(path)?),
        None => None,
    };
    let report = verify::run_verification_with(args.seed, config.as_ref())?;
    let text = output::render_json(&report)?;
    print!("{text}");
    if let Some(path) = &args.out {
        output::write_text(path, &text)?;
    }
    if report.passed {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: verification failed; see the report for the failing checks");
        Ok(ExitCode::from(1))
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args).map(|()| ExitCode::SUCCESS),
        Command::Design(args) => cmd_design(args).map(|()| ExitCode::SUCCESS),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
