//! `gp`: command-line front end for gp-core.
//!
//! Exit codes: 0 when every asserted property holds, 1 on a property
//! violation, 2 on an input error, 3 when a resource cap is hit.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gp_core::Config;

#[derive(Parser)]
#[command(name = "gp", version, about = "Potential theory checks for Schrödinger operators on weighted graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a graph file.
    Validate {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Write a generated graph in the edge-list format.
    Generate {
        /// path, cycle, star, lattice1..lattice3 or treeD (D ≥ 3)
        #[arg(long)]
        family: String,
        /// vertex count (path, cycle), leaf count (star) or ball radius (lattice, tree)
        #[arg(long)]
        param: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the Dirichlet problem (-Δ + Q)u = f on S, u = bc on δS.
    Solve {
        #[command(flatten)]
        source: Source,
        /// interior vertex file (default: every complete non-leaf vertex)
        #[arg(long)]
        interior: Option<PathBuf>,
        /// zero, const:VALUE or a function file
        #[arg(long, default_value = "zero")]
        q: String,
        /// right-hand side on S (default 0)
        #[arg(long)]
        f: Option<PathBuf>,
        /// boundary values on δS (default 0)
        #[arg(long)]
        bc: Option<PathBuf>,
        /// write u on S̄ as a function file
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Principal Dirichlet eigenvalue of -Δ + Q, on one region or along an exhaustion.
    Lambda1 {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        interior: Option<PathBuf>,
        #[arg(long, default_value = "zero")]
        q: String,
        /// comma-separated ball radii; switches to an exhaustion
        #[arg(long, value_delimiter = ',')]
        radii: Vec<usize>,
        /// exhaustion centre
        #[arg(long, default_value_t = 0)]
        origin: u64,
        #[command(flatten)]
        output: Output,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Green functions of a region, or along an exhaustion by balls.
    Green {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        interior: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<GreenMode>,
        #[arg(long, value_delimiter = ',')]
        radii: Vec<usize>,
        /// probe pairs x:y, comma-separated
        #[arg(long, value_delimiter = ',')]
        probes: Vec<String>,
        #[arg(long, default_value_t = 0)]
        origin: u64,
        #[command(flatten)]
        output: Output,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Gradient bound and Harnack constant for a positive solution of (-Δ + Q)u = 0.
    Harnack {
        #[command(flatten)]
        source: Source,
        /// potential on the vertices where the equation is asserted (with --u)
        #[arg(long, requires = "u")]
        q: Option<PathBuf>,
        /// positive solution (with --q); without both, a pair u = exp(ξ),
        /// Q = Δu/u is sampled from --seed
        #[arg(long, requires = "q")]
        u: Option<PathBuf>,
        /// the set S (default: every vertex where Q is given)
        #[arg(long)]
        interior: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Run the seeded property suite.
    CheckAll {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        output: Output,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Compare two reports, ignoring wall time.
    ReportDiff { a: PathBuf, b: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum GreenMode {
    Series,
    Direct,
    Exhaustion,
}

#[derive(Args)]
struct Source {
    /// graph file
    #[arg(long, conflicts_with = "generator")]
    graph: Option<PathBuf>,
    /// generated family, as for `generate --family`
    #[arg(long)]
    generator: Option<String>,
    #[arg(long)]
    param: Option<usize>,
}

#[derive(Args)]
struct Output {
    /// write the JSON report here instead of stdout
    #[arg(long)]
    report: Option<PathBuf>,
    /// write per-radius series as CSV
    #[arg(long)]
    csv: Option<PathBuf>,
}

macro_rules! tolerances {
    ($($field:ident: $ty:ty => $flag:literal),* $(,)?) => {
        #[derive(Args)]
        struct Tolerances {
            $(
                #[arg(long = $flag, hide_short_help = true)]
                $field: Option<$ty>,
            )*
        }

        impl Tolerances {
            fn apply(&self, mut cfg: Config) -> Config {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
                cfg
            }
        }
    };
}

tolerances! {
    identity: f64 => "tol-identity",
    gradient: f64 => "tol-gradient",
    harnack: f64 => "tol-harnack",
    pair_residual: f64 => "tol-pair-residual",
    eigen_residual: f64 => "tol-eigen-residual",
    rayleigh_step: f64 => "tol-rayleigh-step",
    power_max_iter: usize => "limit-power-iterations",
    dense_eigen_max: usize => "limit-dense-eigen",
    monotone: f64 => "tol-monotone",
    solve_residual: f64 => "tol-solve-residual",
    direct_solve_max: usize => "limit-direct-solve",
    cg_tol: f64 => "tol-cg",
    cg_max_iter: usize => "limit-cg-iterations",
    poisson_bound: f64 => "tol-poisson-bound",
    green_identity: f64 => "tol-green-identity",
    kernel_symmetry: f64 => "tol-kernel-symmetry",
    series_tol: f64 => "tol-series",
    series_max_terms: usize => "limit-series-terms",
    series_matrix_max: usize => "limit-series-matrix",
    converge: f64 => "tol-converge",
    geometric_ratio: f64 => "tol-geometric-ratio",
    eigen_bound: f64 => "tol-eigen-bound",
    representation: f64 => "tol-representation",
    superharmonic: f64 => "tol-superharmonic",
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match commands::run(cli.command, argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
