use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  usage error (unknown flag, missing or malformed argument)
  3  unreadable or malformed input file, or an output that cannot be written
  4  invalid parameter (bad network, unknown strategy, out-of-range value)
  5  numerical failure (solver did not converge, residual or accuracy bound missed)
  6  incompatible source (nonzero mean on an all-Kirchhoff network)
  7  time step violates the stability bound";

#[derive(Debug, Parser)]
#[command(name = "metnet", version, about = "PDEs on metric networks", after_help = EXIT_CODES)]
pub struct Cli {
    /// Output file. Required by `spectrum`, `solve` and `bench`; other
    /// commands print to stdout without it.
    #[arg(short = 'o', long = "out", global = true)]
    pub out: Option<PathBuf>,

    /// Seed for randomized generators.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for the spectral scan (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Decimal digits kept when merging refined wavenumbers.
    #[arg(long, global = true, default_value_t = 8)]
    pub precision: u32,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a network and write it as JSON.
    #[command(subcommand)]
    Net(NetCommand),
    /// Characteristic wavenumbers and eigenmodes, written as spectrum JSON.
    Spectrum(SpectrumArgs),
    /// Solve Poisson, heat or wave problems.
    #[command(subcommand)]
    Solve(SolveCommand),
    /// Weyl counting function and bounds on a k grid, as CSV.
    Weyl(WeylArgs),
    /// Symmetric-group character tables and decompositions.
    #[command(subcommand)]
    Symmetry(SymmetryCommand),
    /// Timing and error-scaling studies.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Debug, Args)]
pub struct Boundary {
    /// Node ids that get Dirichlet conditions (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub dirichlet: Vec<usize>,
    /// Make every node Dirichlet.
    #[arg(long, conflicts_with = "dirichlet")]
    pub all_dirichlet: bool,
}

#[derive(Debug, Subcommand)]
pub enum NetCommand {
    /// One edge between two nodes.
    Interval {
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[command(flatten)]
        boundary: Boundary,
    },
    /// Star graph; leaves are nodes 0..M, the hub is node M.
    Star {
        #[arg(long, default_value_t = 3)]
        edges: usize,
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        /// Per-edge lengths (comma separated); overrides --edges/--length.
        #[arg(long, value_delimiter = ',')]
        lengths: Option<Vec<f64>>,
        #[command(flatten)]
        boundary: Boundary,
    },
    /// Hexagonal lattice of unit edges.
    Hex {
        #[arg(long, default_value_t = 5)]
        rows: usize,
        #[arg(long, default_value_t = 12)]
        cols: usize,
        #[command(flatten)]
        boundary: Boundary,
    },
    /// Crossings of random needles in the unit square (uses --seed).
    RandomLine {
        #[arg(long, default_value_t = 6)]
        needles: usize,
        #[arg(long, default_value_t = 1.0)]
        needle_length: f64,
        #[command(flatten)]
        boundary: Boundary,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SpectralArgs {
    /// Upper end of the wavenumber scan.
    #[arg(long, default_value_t = 100.0)]
    pub k_max: f64,
    /// Number of equidistant scan points on [0, k_max].
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
    /// Inverse condition number below which a grid point is a candidate.
    #[arg(long, default_value_t = 1e-2)]
    pub cutoff: f64,
    /// Half-width of the refinement bracket around a candidate.
    #[arg(long, default_value_t = 0.1)]
    pub bracket: f64,
    /// Relative singular-value threshold for roots and nullspaces.
    #[arg(long, default_value_t = 1e-8)]
    pub rank_tol: f64,
    /// Singular-value estimator (default picks by matrix size).
    #[arg(long)]
    pub estimator: Option<String>,
    #[arg(long, default_value = "brent")]
    pub minimizer: String,
    /// Nullspace method (default picks by matrix size).
    #[arg(long)]
    pub nullspace: Option<String>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Network JSON.
    #[arg(short = 'i', long = "input")]
    pub input: PathBuf,
    #[command(flatten)]
    pub spectral: SpectralArgs,
    /// Also write the scan trace `k,inverse_condition` to this CSV.
    #[arg(long)]
    pub scan: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Fd,
    Spectral,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Network JSON.
    #[arg(short = 'i', long = "input")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Fd)]
    pub method: Method,
    /// Grid intervals per edge (FD grid and output grid).
    #[arg(long, default_value_t = 1000)]
    pub n_per_edge: usize,
    /// Linear solver for FD systems.
    #[arg(long, default_value = "condensed")]
    pub solver: String,
}

#[derive(Debug, Subcommand)]
pub enum SolveCommand {
    /// Delta phi = rho.
    Poisson {
        #[command(flatten)]
        common: Common,
        /// Source: zero, cos2pi, cos2pi-scaled, or a CSV of edge_id,x,value.
        #[arg(long)]
        rho: String,
        /// Precomputed spectrum JSON for --method spectral.
        #[arg(long)]
        spectrum: Option<PathBuf>,
        #[command(flatten)]
        spectral: SpectralArgs,
    },
    /// d phi/dt = Delta phi - rho, Crank-Nicolson.
    Heat {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "zero")]
        rho: String,
        /// Initial state (named or CSV).
        #[arg(long, default_value = "zero")]
        phi0: String,
        /// Factor applied to the initial state.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        phi0_scale: f64,
        #[command(flatten)]
        time: TimeArgs,
    },
    /// d2 phi/dt2 = Delta phi, leapfrog.
    Wave {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "zero")]
        phi0: String,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        phi0_scale: f64,
        /// Initial velocity (named or CSV).
        #[arg(long, default_value = "zero")]
        phidot0: String,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        phidot0_scale: f64,
        #[command(flatten)]
        time: TimeArgs,
        /// Write `step,t,energy` to this CSV.
        #[arg(long)]
        energy: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct TimeArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// Keep every n-th step in the output (the last step is always kept).
    #[arg(long, default_value_t = 100)]
    pub stride: usize,
}

#[derive(Debug, Args)]
pub struct WeylArgs {
    /// Network JSON.
    #[arg(short = 'i', long = "input")]
    pub input: PathBuf,
    /// Precomputed spectrum JSON; computed from the scan flags otherwise.
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
    /// Last k of the grid (default: the spectrum's k_max).
    #[arg(long)]
    pub k_end: Option<f64>,
    /// Grid points on [0, k_end].
    #[arg(long, default_value_t = 1001)]
    pub points: usize,
    #[command(flatten)]
    pub spectral: SpectralArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum SymmetryCommand {
    /// Character table of S_n.
    Table {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Irreducible decomposition of a character (default: the permutation
    /// character of S_n acting on n points).
    Decompose {
        #[arg(long)]
        n: usize,
        /// Character values in table class order (comma separated).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        character: Option<Vec<i64>>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Degeneracies predicted for an equal-length star with M edges.
    StarDegeneracies {
        #[arg(long)]
        edges: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// FD Poisson on growing 5-row hexagonal lattices; writes a timing table.
    PoissonScaling {
        #[arg(long, default_value_t = 1000)]
        n_per_edge: usize,
        #[arg(long, default_value = "condensed")]
        solver: String,
        /// Lattice column counts (comma separated).
        #[arg(long, value_delimiter = ',', default_values_t = metnet::bench::LATTICE_COLUMNS)]
        cols: Vec<usize>,
        /// Bound on the MSE against the closed form, checked at every size.
        #[arg(long, default_value_t = 1e-12)]
        max_mse: f64,
    },
    /// FD eigenvalues of -Delta against the spectral ones; writes an error CSV.
    FdEigenvalues {
        /// Network JSON.
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
        /// Interval counts to compare (comma separated).
        #[arg(long, value_delimiter = ',', default_values_t = [200usize])]
        n_per_edge: Vec<usize>,
        /// Number of eigenvalues, zero mode included.
        #[arg(long, default_value_t = 50)]
        modes: usize,
    },
}
