//! Batch front end over the core library: reproducible experiments with
//! JSON/CSV input and output.
//!
//! Exit codes: 0 success, 1 usage/input errors, 2 mathematical failure
//! (hypothesis violation, quadrature or continuation breakdown, a failed
//! verification), 3 a trace whose dihedral swing is below the flexion
//! threshold.

mod cmds;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "bellows",
    version,
    about = "Collapse certificates, curved simplex volumes, and flexion traces for small-edge polyhedra"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Collapse a Gram-weighted complex below rank r; write the replayable certificate
    #[command(name = "collapse")]
    Collapse(CollapseArgs),
    /// Select the closeness threshold for a Gram matrix and list the graph edges
    #[command(name = "kappa")]
    Kappa(KappaArgs),
    /// Random low-rank Gram campaign: one collapse certificate per trial, results as CSV
    #[command(name = "thm51")]
    Thm51(Thm51Args),
    /// Oriented volume of the simplex spanned by a configuration
    #[command(name = "simplex-volume")]
    SimplexVolume(SimplexVolumeArgs),
    /// Generalized volume of a cycle polyhedron, by bounding chain or by the collapse pipeline
    #[command(name = "poly-volume")]
    PolyVolume(PolyVolumeArgs),
    /// Trace an edge-length-preserving deformation from a start configuration
    #[command(name = "flex")]
    Flex(FlexArgs),
    /// Construct or verify a flexion trace and test volume constancy
    #[command(name = "bellows")]
    Bellows(BellowsArgs),
    /// Generate a random Gram matrix of bounded rank
    #[command(name = "randgram")]
    Randgram(RandgramArgs),
}

impl Command {
    fn label(&self) -> &'static str {
        match self {
            Command::Collapse(_) => "collapse",
            Command::Kappa(_) => "kappa",
            Command::Thm51(_) => "thm51",
            Command::SimplexVolume(_) => "simplex-volume",
            Command::PolyVolume(_) => "poly-volume",
            Command::Flex(_) => "flex",
            Command::Bellows(_) => "bellows",
            Command::Randgram(_) => "randgram",
        }
    }
}

#[derive(Args)]
struct CollapseArgs {
    /// Input JSON: {"m": .., "maximal": [[..]], "gram": {..}, "r": ..?}
    #[arg(long)]
    input: PathBuf,
    /// Collapse threshold; overrides the input file's value
    #[arg(long)]
    r: Option<u32>,
    /// Certificate JSON path (stdout if absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KappaArgs {
    /// Gram matrix JSON, bare or wrapped as {"gram": {..}}
    #[arg(long)]
    input: PathBuf,
    /// Rank parameter controlling the required gap width
    #[arg(long, default_value_t = 2)]
    r: u32,
    /// Output JSON path (stdout if absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Thm51Args {
    /// Number of configuration points per trial
    #[arg(long, default_value_t = 10)]
    m: usize,
    /// Rank bound of the random Gram matrices (must be at most 2r)
    #[arg(long, default_value_t = 4)]
    rank: usize,
    /// Collapse threshold
    #[arg(long, default_value_t = 2)]
    r: u32,
    /// Number of random instances
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Root seed; per-trial seeds are derived by a fixed splitting scheme
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Results CSV path (stdout if absent); files get a sibling .manifest.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Laguerre,
    MonteCarlo,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpaceArg {
    Sphere,
    Hyperbolic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PipelineArg {
    /// Cone bounding chain over the least support vertex
    Chain,
    /// Threshold graph, clique complex, collapse, then the residual bounding chain
    Collapse,
}

#[derive(Args)]
struct SimplexVolumeArgs {
    /// Configuration JSON (n + 1 points for an n-simplex)
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Laguerre)]
    method: MethodArg,
    /// Laguerre order per axis
    #[arg(long, default_value_t = 24)]
    order: usize,
    /// Monte-Carlo sample count
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    /// Monte-Carlo stream seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative tolerance target for the error estimate
    #[arg(long)]
    tol: Option<f64>,
    /// Output JSON path (stdout if absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PolyVolumeArgs {
    /// Cycle polyhedron JSON
    #[arg(long)]
    poly: PathBuf,
    /// Configuration JSON with one point per polyhedron vertex
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value_t = PipelineArg::Chain)]
    pipeline: PipelineArg,
    /// Real model for the collapse pipeline; required when the configuration is complex
    #[arg(long, value_enum)]
    model: Option<SpaceArg>,
    /// Laguerre order per axis
    #[arg(long, default_value_t = 24)]
    order: usize,
    /// Output JSON path (stdout if absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FlexArgs {
    /// Cycle polyhedron JSON
    #[arg(long)]
    poly: PathBuf,
    /// Target edge lengths JSON
    #[arg(long)]
    lengths: PathBuf,
    /// Start configuration JSON
    #[arg(long)]
    config: PathBuf,
    /// Number of continuation steps
    #[arg(long, default_value_t = 200)]
    steps: usize,
    /// Arclength step size
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    /// Bundle JSON (polyhedron + lengths + trace) path, stdout if absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional plot-ready CSV of the trace
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BellowsArgs {
    /// Verify an existing bundle instead of constructing a trace
    #[arg(
        long,
        conflicts_with_all = ["space", "scale", "shape", "seed", "steps", "h", "trace_out", "csv"]
    )]
    trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SpaceArg::Sphere)]
    space: SpaceArg,
    /// Edge scale of the constructed octahedron
    #[arg(long, default_value_t = 0.05)]
    scale: f64,
    /// Shape parameter in [-1, 1] breaking the construction's regularity
    #[arg(long, default_value_t = 0.3)]
    shape: f64,
    #[arg(long, default_value_t = 11)]
    seed: u64,
    /// Number of continuation steps
    #[arg(long, default_value_t = 80)]
    steps: usize,
    /// Arclength step size
    #[arg(long, default_value_t = 2e-3)]
    h: f64,
    /// Absolute volume-constancy tolerance
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Dihedral swing below this radian threshold is "not a flexion"
    #[arg(long, default_value_t = 0.1)]
    min_flex: f64,
    /// Report JSON path (stdout if absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bundle JSON for later verification
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Plot-ready CSV of the trace
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct RandgramArgs {
    /// Matrix size
    #[arg(long)]
    m: usize,
    /// Rank bound
    #[arg(long)]
    rank: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON path (stdout if absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let label = cli.command.label();
    let started = Instant::now();
    let outcome = cmds::run(cli.command);
    // Wall-clock goes to stderr only; output files must be reproducible.
    eprintln!("{label}: wall-clock {:.3} s", started.elapsed().as_secs_f64());
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
