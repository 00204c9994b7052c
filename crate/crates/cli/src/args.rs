use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Yrast states of bosons on a ring: exact solvers, sampling, Bohmian dynamics
/// and mean-field solitons.
#[derive(Debug, Parser)]
#[command(name = "yrast", version)]
pub struct Cli {
    /// Master seed; per-task seeds are derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Directory for every written file.
    #[arg(long, global = true, env = "YRAST_OUTPUT_DIR", default_value = ".")]
    pub output_dir: PathBuf,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the size and states of a momentum block.
    Basis(BasisArgs),
    /// Elementary and yrast branch energies of the ideal gas.
    Branches(BranchesArgs),
    /// Lowest state of a momentum block.
    Yrast(YrastArgs),
    /// Fidelity of the K = N/2 yrast state with the twin Fock state.
    FidelitySweep(SweepArgs),
    /// Conditional single-particle wave function.
    Conditional(ConditionalArgs),
    /// Position samples and their histogram.
    Sample(SampleArgs),
    /// Histogram of conditional notch depths.
    NotchHist(NotchHistArgs),
    /// Bohmian trajectories of the freely evolving state.
    Bohmian(BohmianArgs),
    /// Mean-field soliton profile.
    Gpe(GpeArgs),
    /// Every data series of one figure, plus a manifest.
    Fig(FigArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Basis(_) => "basis",
            Command::Branches(_) => "branches",
            Command::Yrast(_) => "yrast",
            Command::FidelitySweep(_) => "fidelity-sweep",
            Command::Conditional(_) => "conditional",
            Command::Sample(_) => "sample",
            Command::NotchHist(_) => "notch-hist",
            Command::Bohmian(_) => "bohmian",
            Command::Gpe(_) => "gpe",
            Command::Fig(_) => "fig",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct BasisArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub k: i64,
    #[arg(long)]
    pub kmax: usize,
    /// Print at most this many states.
    #[arg(long)]
    pub limit: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct BranchesArgs {
    #[arg(long)]
    pub n: usize,
    /// Largest K listed; an elementary excitation needs mode K inside the cutoff.
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub l: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendArg {
    Power,
    Lanczos,
}

#[derive(Debug, Args, Serialize)]
pub struct YrastArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub k: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub g: f64,
    /// Fixed cutoff; omitted means doubling from 2 until converged.
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub l: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iters: usize,
    #[arg(long, value_enum, default_value_t = BackendArg::Power)]
    pub backend: BackendArg,
    /// Number of leading components reported.
    #[arg(long, default_value_t = 5)]
    pub top: usize,
    /// Also write every amplitude as CSV.
    #[arg(long)]
    pub amplitudes: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16])]
    pub ns: Vec<usize>,
    /// Healing lengths ξ (units of L); conflicts with --g-values.
    #[arg(long, value_delimiter = ',', conflicts_with = "g_values")]
    pub xi: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub g_values: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    pub l: f64,
    #[arg(long, default_value_t = 16)]
    pub kmax_limit: usize,
    /// Cutoff doubling stops before a basis larger than this.
    #[arg(long, default_value_t = 400_000)]
    pub max_dim: u128,
    #[arg(long, default_value_t = 1e-6)]
    pub cutoff_tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ConditionalArgs {
    #[arg(long)]
    pub state: String,
    /// Comma-separated N-1 positions, or `sample` to draw them from |ψ|².
    #[arg(long, default_value = "sample")]
    pub fixed: String,
    #[arg(long, default_value_t = 1024)]
    pub grid: usize,
    #[arg(long, default_value_t = 1.0)]
    pub l: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerArg {
    /// Exact sequential draws from the conditional marginals.
    Exact,
    Metropolis,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long, default_value_t = 1000)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 64)]
    pub bins: usize,
    /// Rotate every sample so its center of mass sits at 0.
    #[arg(long)]
    pub align: bool,
    /// Fourier harmonic used for alignment.
    #[arg(long, default_value_t = 1)]
    pub harmonic: u32,
    #[arg(long, value_enum, default_value_t = SamplerArg::Exact)]
    pub method: SamplerArg,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long, default_value_t = 1.0)]
    pub l: f64,
    /// Also write every position.
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct NotchHistArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long, default_value_t = 1000)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    #[arg(long, default_value_t = 1024)]
    pub grid: usize,
    #[arg(long, default_value_t = 1.0)]
    pub l: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct BohmianArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long, default_value_t = 1000)]
    pub n_real: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4])]
    pub t_snapshots: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    pub bins: usize,
    #[arg(long, default_value_t = 1)]
    pub harmonic: u32,
    #[arg(long, default_value_t = 1.0)]
    pub l: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct GpeArgs {
    /// Interaction gN.
    #[arg(long)]
    pub gn: f64,
    /// Average momentum per particle in units of 2π/L.
    #[arg(long)]
    pub kavg: f64,
    #[arg(long, default_value_t = 1024)]
    pub grid: usize,
    #[arg(long, default_value_t = 1.0)]
    pub l: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Use imaginary-time relaxation instead of the elliptic construction.
    #[arg(long)]
    pub relax: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureName {
    Fig2,
    Fig3,
    Fig5,
    Fig7,
    Fig8,
    Fig9,
}

#[derive(Debug, Args, Serialize)]
pub struct FigArgs {
    #[arg(long, value_enum)]
    pub name: FigureName,
    /// Particle number (largest one for multi-N figures).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 64)]
    pub bins: usize,
    /// Bohmian realizations.
    #[arg(long, default_value_t = 1000)]
    pub n_real: usize,
    #[arg(long, default_value_t = 1.0)]
    pub l: f64,
}
