mod commands;
mod report;
mod specs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use report::ReportDocument;

const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(
    name = "interplab",
    version,
    about = "Interpolation spaces, weight classes and sectorial calculus"
)]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Log-uniform grid `TMIN,TMAX,N`.
    #[arg(long, global = true, default_value = "1e-6,1e6,4800")]
    grid: String,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Weight-class constants.
    Weights {
        #[command(subcommand)]
        action: WeightsCommand,
    },
    /// Lower bound for the norm of a Hardy operator on a weighted space.
    Hardy {
        #[arg(long, value_parser = ["P", "Q", "S"])]
        op: String,
        #[arg(long)]
        space: String,
        /// `default` or a CSV whose first column is `t` and each further column a test function.
        #[arg(long, default_value = "default")]
        family: String,
    },
    /// K-method and trace-method norms of one vector.
    Knorm {
        #[arg(long)]
        couple: String,
        #[arg(long)]
        space: String,
        #[arg(long)]
        x: String,
        /// Dump `t ↦ K(t, x)` as CSV.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// `f(A)` by contour quadrature.
    Calculus {
        #[arg(long = "A")]
        a: String,
        #[arg(long)]
        f: String,
        /// `BETA,RMIN,RMAX,NPD`; chosen from the spectrum when omitted.
        #[arg(long)]
        contour: Option<String>,
    },
    /// Six equivalent interpolation norms on `(X, dom A)`.
    InterpReport {
        #[arg(long = "A")]
        a: String,
        #[arg(long)]
        space: String,
        /// One vector per line; seeded random unit vectors when omitted.
        #[arg(long)]
        xs: Option<String>,
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
    /// Interpolation norms of `f(A)x` against `‖f‖_∞`.
    Dore {
        #[arg(long = "A")]
        a: String,
        #[arg(long)]
        space: String,
        #[arg(long, value_parser = ["default"], default_value = "default")]
        family: String,
        #[arg(long)]
        xs: Option<String>,
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
    /// Maximal-regularity seminorms of `u' + Au = f`, `u(0) = x0`.
    Maxreg {
        #[arg(long = "A")]
        a: String,
        #[arg(long)]
        space: String,
        /// `zero` or `const:V1,V2,..`.
        #[arg(long, default_value = "zero")]
        f: String,
        #[arg(long)]
        x0: Option<String>,
        /// Horizon; defaults to the end of the grid.
        #[arg(long = "T")]
        t: Option<f64>,
        /// Estimate the constant over seeded random right-hand sides.
        #[arg(long)]
        sweep: bool,
        #[arg(long, default_value_t = 10)]
        problems: usize,
    },
    /// Boyd indices of a rearrangement-invariant space.
    Boyd {
        #[arg(long)]
        space: String,
        /// Dump `(s, ‖D_s‖)` as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum WeightsCommand {
    Classify {
        #[arg(long)]
        weight: String,
        #[arg(long)]
        p: f64,
        /// Half-width of the sweep in decades.
        #[arg(long)]
        decades: Option<usize>,
        /// Prefix for one constant-vs-range CSV per class.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn seed() -> Result<u64, String> {
    match std::env::var("INTERPLAB_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| format!("INTERPLAB_SEED must be an unsigned integer, got `{s}`")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = match seed() {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let mut doc = ReportDocument::new(argv, json!({ "grid": cli.grid }), seed);
    let outcome =
        specs::grid(&cli.grid).and_then(|grid| commands::run(&cli.command, &grid, seed, &mut doc));
    let code = match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            doc.error = Some(json!({ "message": e.to_string() }));
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    };
    let text = doc.to_json();
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
        }
        None => print!("{text}"),
    }
    code
}
