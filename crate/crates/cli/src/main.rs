mod documents;
mod json;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use noether_core::actions::ActionKind;
use noether_core::conservation::{first_integral, noether_constant};
use noether_core::frames::invariants_of;
use noether_core::numeric::set_epsilon;
use noether_core::reconstruction::{reconstruct, IntegrationConstants, ReconstructionInput};
use noether_core::suite::run_suite;
use noether_core::variational::el_residual_max;
use noether_core::Error;
use serde::Serialize;

use documents::{parse, ConstantsDocument, InvariantsDocument, LagrangianDocument, PathDocument};

/// Pass threshold for `check`.
const CHECK_TOLERANCE: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "noether", version, about = "Invariants, conservation laws and reconstruction for lattice paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the difference invariants of a path.
    Invariants {
        #[arg(long)]
        path: PathBuf,
    },
    /// Report EL residual, Noether constant, drift and first integral.
    Check {
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        lagrangian: PathBuf,
    },
    /// Rebuild a path from invariants and conservation constants.
    Reconstruct {
        #[arg(long)]
        action: String,
        #[arg(long)]
        invariants: PathBuf,
        #[arg(long)]
        constants: PathBuf,
        #[arg(long)]
        length: usize,
    },
    /// Run the seeded property suite.
    Verify {
        #[arg(long)]
        action: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum CliError {
    Parse(String),
    Degenerate(String),
    CheckFailed(String),
    Hypothesis(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Degenerate(_) => 2,
            CliError::CheckFailed(_) => 3,
            CliError::Hypothesis(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Parse(m) | CliError::Degenerate(m) | CliError::CheckFailed(m) | CliError::Hypothesis(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let m = e.to_string();
        match e {
            Error::DegenerateConstants(_) | Error::ZeroV2 { .. } | Error::ZeroV45 { .. } | Error::InconsistentConstants { .. } => {
                CliError::Hypothesis(m)
            }
            Error::UnknownAction(_)
            | Error::InvalidInput(_)
            | Error::DimensionMismatch { .. }
            | Error::KindMismatch { .. }
            | Error::MissingVelocities => CliError::Parse(m),
            _ => CliError::Degenerate(m),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn read_doc<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    parse(&path.display().to_string(), &read(path)?)
}

fn action(tag: &str) -> Result<ActionKind, CliError> {
    tag.parse().map_err(|_| CliError::Parse(format!("--action: unknown action {tag:?}")))
}

#[derive(Serialize)]
struct CheckReport {
    el_residual_max: f64,
    noether_k: Vec<f64>,
    drift: f64,
    first_integral: f64,
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Invariants { path } => {
            let (kind, path) = read_doc::<PathDocument>(&path)?.to_path()?;
            let inv = invariants_of(kind.strategy(), &path)?;
            Ok(json::to_string(&InvariantsDocument::from_sequence(&inv)))
        }
        Command::Check { path, lagrangian } => {
            let (kind, path) = read_doc::<PathDocument>(&path)?.to_path()?;
            let l = read_doc::<LagrangianDocument>(&lagrangian)?.to_lagrangian(kind)?;
            let action = kind.strategy();
            let inv = invariants_of(action, &path)?;
            let rec = noether_constant(action, &l, &path)?;
            let report = CheckReport {
                el_residual_max: el_residual_max(action, &l, &inv)?,
                noether_k: rec.constant().to_vec(),
                drift: rec.relative_drift(),
                first_integral: first_integral(kind, rec.constant())?,
            };
            let text = json::to_string(&report);
            if report.el_residual_max < CHECK_TOLERANCE && report.drift < CHECK_TOLERANCE {
                Ok(text)
            } else {
                println!("{text}");
                Err(CliError::CheckFailed(format!(
                    "not conserved: el_residual_max {:e}, drift {:e}",
                    report.el_residual_max, report.drift
                )))
            }
        }
        Command::Reconstruct { action: tag, invariants, constants, length } => {
            let kind = action(&tag)?;
            let inv = read_doc::<InvariantsDocument>(&invariants)?.to_sequence(kind)?;
            let c = read_doc::<ConstantsDocument>(&constants)?;
            let integration = match (kind, c.d0) {
                (ActionKind::Sa2Linear, None) => IntegrationConstants::Sa2 { c0: c.c0 },
                (ActionKind::Sa2Linear, Some(_)) => return Err(CliError::Parse("field `d0`: not used by the sa2 action".into())),
                (_, Some(d0)) => IntegrationConstants::Sl2 { c0: c.c0, d0 },
                (_, None) => return Err(CliError::Parse(format!("field `d0`: required for the {kind} action"))),
            };
            let input = match (c.v, c.lagrangian) {
                (Some(v), None) => ReconstructionInput {
                    kind,
                    inv,
                    v_offset: c.v_offset.unwrap_or(0),
                    v,
                    k: c.k,
                    constants: integration,
                },
                (None, Some(l)) => {
                    let l = l.to_lagrangian(kind)?;
                    ReconstructionInput::from_invariants(kind.strategy(), &l, inv, c.k, integration)?
                }
                _ => return Err(CliError::Parse("constants: give exactly one of `v` and `lagrangian`".into())),
            };
            let rec = reconstruct(&input, length)?;
            Ok(json::to_string(&PathDocument::from_path(kind, &rec.path)))
        }
        Command::Verify { action: tag, trials, seed } => {
            let report = run_suite(action(&tag)?, trials, seed);
            let table = report.table();
            if report.passed() {
                Ok(table.trim_end().to_string())
            } else {
                println!("{}", table.trim_end());
                Err(CliError::CheckFailed(format!("failed properties: {}", report.failures().join(", "))))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(eps) = std::env::var("NOETHER_EPS") {
        match eps.parse::<f64>().map_err(|e| e.to_string()).and_then(|x| set_epsilon(x).map_err(|e| e.to_string())) {
            Ok(()) => {}
            Err(e) => {
                eprintln!("error: NOETHER_EPS: {e}");
                return ExitCode::from(1);
            }
        }
    }
    match run(cli) {
        Ok(out) => {
            // A closed pipe (e.g. `| head`) is not an error for the caller.
            let _ = writeln!(std::io::stdout(), "{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
