use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Probabilistic frame toolkit: frame bounds, transport duals, Wasserstein
/// geodesics and semi-discrete couplings.
#[derive(Debug, Parser)]
#[command(name = "pframe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    opts: GlobalOpts,
}

#[derive(Debug, Clone, Args, serde::Serialize)]
pub struct GlobalOpts {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Number of grid points on [0, 1] for path commands.
    #[arg(long, global = true, default_value_t = pframe::geodesics::DEFAULT_GRID)]
    pub grid: usize,

    /// Monte Carlo sample count for semi-discrete commands.
    #[arg(long, global = true, default_value_t = pframe::semidiscrete::DEFAULT_SAMPLES)]
    pub samples: usize,

    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Mass tolerance for weight adaptation.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frame bounds and second moment of a discrete or Gaussian measure.
    FrameReport { measure: PathBuf },
    /// The canonical dual (S⁻¹)_#μ of a discrete frame.
    CanonicalDual { measure: PathBuf },
    /// Decide whether NU is a transport dual of MU; prints a plan or a Farkas certificate.
    TransportDual { mu: PathBuf, nu: PathBuf },
    /// Squared 2-Wasserstein distance and an optimal plan.
    Wasserstein { mu: PathBuf, nu: PathBuf },
    /// Cyclical monotonicity of {"pairs": [[x, y], ...]}.
    Monotone { pairs: PathBuf },
    /// Frame bounds along the W₂ geodesic from MU to NU, as CSV.
    GeodesicProfile { mu: PathBuf, nu: PathBuf },
    /// Closed-form W₂² between two centred Gaussians.
    GaussianW2 { g0: PathBuf, g1: PathBuf },
    /// Optimal linear map and frame bounds along the Gaussian geodesic.
    GaussianPath { g0: PathBuf, g1: PathBuf },
    /// Power-diagram weights whose cells carry the target masses.
    SemidiscreteAdapt { sites: PathBuf },
    /// Analysis followed by synthesis through an adapted coupling, applied to the standard basis.
    Reconstruct {
        coupling: PathBuf,
        /// Analysis frame, one atom per site.
        phi: PathBuf,
        /// Synthesis frame; defaults to the canonical dual of PHI weighted by the targets.
        psi: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.command, &cli.opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            if let Some(detail) = &e.detail {
                eprintln!("{detail}");
            }
            ExitCode::from(e.code)
        }
    }
}
