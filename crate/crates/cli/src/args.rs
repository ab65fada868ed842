//! Command-line surface.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "hypangle", version, about = "Angles in hyperbolic lattices of PSL(2,Z)")]
pub struct Cli {
    /// Base point: `i`, `rho`, or `u=p/q,ksq=p/q` [default: i]
    #[arg(long, global = true)]
    pub omega: Option<String>,
    /// Worker threads [default: all cores]
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; a `<out>.meta.json` sidecar is written next to it [default: stdout]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Random seed for Monte Carlo [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON file with default values for any flag; flags given on the command line win
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List or count the elements of a ball T ≤ Q²
    Enumerate(EnumerateArgs),
    /// Empirical pair correlation of the ball's angles
    Paircorr(PaircorrArgs),
    /// Conjectured pair correlation density from the lattice series
    Density(DensityArgs),
    /// Empirical and conjectured curves on one grid
    Compare(CompareArgs),
    /// Volume of the body S_{M,ξ}
    Volumes(VolumesArgs),
    /// Closed geodesics through rho by discriminant
    Geodesics(GeodesicsArgs),
    /// Selberg/Harish-Chandra transform of the kernel k_X
    Selberg(SelbergArgs),
}

#[derive(Args, Debug, Default)]
pub struct BallArgs {
    /// Ball radius Q (rational, e.g. 300 or 1001/2)
    #[arg(long)]
    pub q: Option<String>,
    /// full, half_inner or half_outer [default: full]
    #[arg(long)]
    pub mode: Option<String>,
    /// Refuse balls projected to hold more elements than this [default: 400000000]
    #[arg(long)]
    pub max_elements: Option<u64>,
}

#[derive(Args, Debug, Default)]
pub struct GridArgs {
    /// Elliptic factor: 1, or the stabilizer order of omega [default: stabilizer order]
    #[arg(long)]
    pub elliptic: Option<u32>,
    /// Histogram bin width [default: 0.05]
    #[arg(long)]
    pub bin_width: Option<f64>,
    /// Largest grid value [default: 4]
    #[arg(long)]
    pub xi_max: Option<f64>,
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub ball: BallArgs,
    /// count or csv [default: count]
    #[arg(long)]
    pub emit: Option<String>,
}

#[derive(Args, Debug)]
pub struct PaircorrArgs {
    #[command(flatten)]
    pub ball: BallArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    /// Series truncation T ≤ t_cut (rational) [default: 10000]
    #[arg(long)]
    pub t_cut: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub ball: BallArgs,
    /// Series truncation T ≤ t_cut (rational) [default: 10000]
    #[arg(long)]
    pub t_cut: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug)]
pub struct VolumesArgs {
    /// Matrix entries a,b,c,d
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long)]
    pub xi: Option<f64>,
    /// mc, closed or both [default: both]
    #[arg(long)]
    pub method: Option<String>,
    /// Monte Carlo sample count [default: 1000000]
    #[arg(long)]
    pub samples: Option<u64>,
    /// json or csv [default: json]
    #[arg(long)]
    pub emit: Option<String>,
}

#[derive(Args, Debug)]
pub struct GeodesicsArgs {
    /// A single discriminant
    #[arg(long, conflicts_with = "delta_max")]
    pub delta: Option<u64>,
    /// All discriminants up to this bound
    #[arg(long)]
    pub delta_max: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SelbergArgs {
    /// Kernel parameter X > 0
    #[arg(long)]
    pub x: Option<f64>,
    /// start:stop:step [default: 0:10:0.5]
    #[arg(long)]
    pub t_grid: Option<String>,
    /// csv [default: csv]
    #[arg(long)]
    pub emit: Option<String>,
}
