use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod config;

use config::Experiment;

/// Graded newest-vertex bisection meshes for functions with point
/// singularities.
///
/// Exit codes: 0 when every enabled check passes, 1 when a check fails,
/// 2 for invalid usage or input, 3 when a computation fails.
#[derive(Parser, Debug)]
#[command(name = "gradmesh", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Grade the initial mesh for a single delta and check the size lemma.
    Grade { config: PathBuf },
    /// Run a delta sweep and fit the error decay rate.
    Converge { config: PathBuf },
    /// Re-run the verifiers on a saved mesh for the config's delta.
    Verify {
        config: PathBuf,
        /// Defaults to mesh.txt in the output directory.
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Defaults to ledger.csv next to the mesh, when present.
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
    /// Solve for the checkerboard interface coefficients.
    Kellogg {
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
    },
    /// Convert a plain-text mesh file.
    Export {
        mesh: PathBuf,
        #[arg(long, value_enum)]
        format: ExportFormat,
        /// Write here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Text,
    Vtk,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Failed(anyhow::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Failed(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Failed(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<gradmesh::Error> for CliError {
    fn from(e: gradmesh::Error) -> Self {
        use gradmesh::Error::*;
        match e {
            InvalidParameter(_)
            | Parse { .. }
            | DegenerateTriangle(_)
            | VertexOutOfRange { .. }
            | NonFiniteVertex(_)
            | NotConforming
            | IncompatibleFlags(..) => CliError::Input(e.to_string()),
            other => CliError::Failed(other.into()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Failed(e)
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Grade { config } => commands::grade_cmd(&Experiment::load(&config)?),
        Command::Converge { config } => commands::converge_cmd(&Experiment::load(&config)?),
        Command::Verify {
            config,
            mesh,
            ledger,
        } => commands::verify_cmd(&Experiment::load(&config)?, mesh.as_deref(), ledger.as_deref()),
        Command::Kellogg { gamma } => commands::kellogg_cmd(gamma),
        Command::Export {
            mesh,
            format,
            output,
        } => commands::export_cmd(&mesh, format, output.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
