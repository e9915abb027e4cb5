use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use twistcart::corpus::resolve_path;
use twistcart::report::{self, EllipticCommand, GcCommand, GridOptions, ModelOptions, Report, ReportError};
use twistcart::spectral::FiltrationKind;

/// Exact twisted equivariant cohomology, spectral sequences, generalized
/// complex checks and elliptic grid checks.
///
/// Model and data arguments accept a path or `corpus:<name>`.
/// Exit codes: 0 pass, 1 property failure, 2 input error, 3 unstable window.
#[derive(Parser)]
#[command(name = "twistcart", version)]
struct Cli {
    /// Print a plain-text table instead of JSON.
    #[arg(long, global = true)]
    table: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// Torus rank r.
    #[arg(long)]
    rank: Option<usize>,
    /// Polynomial cap D.
    #[arg(long)]
    polycap: Option<u32>,
}

impl ModelArgs {
    fn options(&self) -> ModelOptions {
        ModelOptions { rank: self.rank, poly_cap: self.polycap }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Graded equivariant cohomology, and twisted dims with --eta.
    Cohomology {
        model: String,
        #[arg(long)]
        eta: Option<String>,
        #[command(flatten)]
        opts: ModelArgs,
    },
    /// Pages of the F (total degree) or L (polynomial degree) spectral sequence.
    Spectral {
        model: String,
        eta: Option<String>,
        #[arg(long, default_value = "L")]
        filtration: FiltrationKind,
        #[arg(long, default_value_t = 4)]
        maxpage: i32,
        #[command(flatten)]
        opts: ModelArgs,
    },
    /// Inclusions between the F and L filtrations.
    Cofinality {
        model: String,
        eta: Option<String>,
        #[command(flatten)]
        opts: ModelArgs,
    },
    /// check | eigen | gk | moment | bracket on a pointwise data file.
    Gc { action: String, data: String },
    /// rc | coeffs | maxcheck on `gen:<sample>` or a grid file.
    Elliptic {
        action: String,
        grid: String,
        #[arg(long, default_value_t = 1.0 / 32.0)]
        h: f64,
        #[arg(long, default_value_t = 1.0)]
        extent: f64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn path(spec: &str) -> Result<PathBuf, ReportError> {
    resolve_path(spec).map_err(|e| ReportError::Input(e.to_string()))
}

fn run(cmd: &Command) -> Result<Report, ReportError> {
    match cmd {
        Command::Cohomology { model, eta, opts } => {
            let eta = eta.as_deref().map(path).transpose()?;
            report::cohomology(&path(model)?, &opts.options(), eta.as_deref())
        }
        Command::Spectral { model, eta, filtration, maxpage, opts } => {
            let eta = eta.as_deref().map(path).transpose()?;
            report::spectral(&path(model)?, eta.as_deref(), *filtration, *maxpage, &opts.options())
        }
        Command::Cofinality { model, eta, opts } => {
            let eta = eta.as_deref().map(path).transpose()?;
            report::cofinality_report(&path(model)?, eta.as_deref(), &opts.options())
        }
        Command::Gc { action, data } => report::gc(action.parse::<GcCommand>()?, &path(data)?),
        Command::Elliptic { action, grid, h, extent, dim, tol } => {
            let spec = if grid.starts_with("gen:") { grid.clone() } else { path(grid)?.display().to_string() };
            let opts = GridOptions { spec, h: *h, extent: *extent, dim: *dim, tol: *tol };
            report::elliptic(action.parse::<EllipticCommand>()?, &opts)
        }
    }
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(r) => {
            print!("{}", if cli.table { r.to_table() } else { r.to_json() });
            Ok(ExitCode::from(r.exit_code() as u8))
        }
        Err(e) => {
            eprintln!("error: {e}");
            Ok(ExitCode::from(e.exit_code() as u8))
        }
    }
}
