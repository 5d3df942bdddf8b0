mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Norm equations, girth polylines and Daugavet defects in preduals of
/// finite-dimensional W*-algebras.
#[derive(Debug, Parser)]
#[command(name = "predual", version)]
pub struct Cli {
    /// Number mode; defaults to the instance document's mode.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Float-mode acceptance tolerance for decisions and verification.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide `‖φ ± ψ‖ = ‖φ‖ = ‖ψ‖` and print a certificate (exit 1 if unsolvable).
    Solve {
        instance: PathBuf,
        /// List up to this many solution selections instead (exact mode).
        #[arg(long)]
        enumerate: Option<usize>,
        /// Attach an independent verification report.
        #[arg(long)]
        verify: bool,
    },
    /// Print the certificate of minimal defect.
    Split {
        instance: PathBuf,
        #[arg(long)]
        verify: bool,
    },
    /// Build and verify a girth polyline with N steps.
    Girth {
        instance: PathBuf,
        #[arg(long, short = 'n', default_value_t = 2)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Sweep the Daugavet defect over resolutions, or evaluate a rank-one instance.
    Daugavet {
        /// `const:<c>`, `sine[:<amp>[:<freq>]]`, `samples:<v,…>` or `file:<path>`.
        #[arg(long, default_value = "const:1")]
        g: String,
        #[arg(long, default_value = "const:-1")]
        h: String,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32,64,128,256,512,1024")]
        resolutions: Vec<usize>,
        /// Instance document with a `rank_one` section; overrides --g/--h.
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Run a generated sequence and report its defect limit.
    Ultra {
        #[arg(long, default_value = "uniform-diffuse")]
        generator: String,
        #[arg(long, default_value_t = 100)]
        stages: usize,
        #[arg(long, default_value_t = predual::ultra::DEFAULT_CAUCHY_TOL)]
        cauchy_tol: f64,
        /// Also require every tail defect to be at most this.
        #[arg(long)]
        certify: Option<f64>,
    },
    /// Generate an instance document: density, spectral or rank-one.
    Gen {
        kind: String,
        /// Block size (density).
        #[arg(long, default_value_t = 4)]
        dim: usize,
        /// Number of atoms (spectral).
        #[arg(long, default_value_t = 4)]
        atoms: usize,
        /// Weight grid (spectral).
        #[arg(long, default_value = "1/16")]
        grid: String,
        #[arg(long, default_value = "const:1")]
        g: String,
        #[arg(long, default_value = "const:-1")]
        h: String,
        /// Resolution (rank-one).
        #[arg(long, short = 'n', default_value_t = 16)]
        n: usize,
    },
    /// Re-check a certificate against an instance (exit 1 on violation).
    Verify { instance: PathBuf, certificate: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(outcome) => {
            if let Err(e) = commands::emit(&cli, &outcome.output) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            for line in &outcome.notes {
                eprintln!("{line}");
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
