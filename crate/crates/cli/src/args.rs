use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

/// Integral mean curvatures, tube bounds, lattice counts and John ellipsoids.
#[derive(Parser, Debug, Clone, Serialize)]
#[command(name = "ellmeasure", version)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Integral mean curvatures M_0..M_{n-1}
    Measures(MeasuresArgs),
    /// Pinch bounds on M_i from the circumscribed box
    Bounds(BoundsArgs),
    /// Tube polynomial and parallel-body area/volume bounds
    Tube(TubeArgs),
    /// Hit-measure ratio of random affine flats
    Grassmann(GrassmannArgs),
    /// Lattice point count and discrepancy
    Lattice(LatticeArgs),
    /// Minimum-volume enclosing ellipsoid and John sandwich
    John(JohnArgs),
    /// Batch studies: dilation families and random ellipsoid batches
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Measures(_) => "measures",
            Command::Bounds(_) => "bounds",
            Command::Tube(_) => "tube",
            Command::Grassmann(_) => "grassmann",
            Command::Lattice(_) => "lattice",
            Command::John(_) => "john",
            Command::Sweep(_) => "sweep",
        }
    }

    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Measures(a) => &a.output,
            Command::Bounds(a) => &a.output,
            Command::Tube(a) => &a.output,
            Command::Grassmann(a) => &a.output,
            Command::Lattice(a) => &a.output,
            Command::John(a) => &a.output,
            Command::Sweep(a) => &a.output,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BodyArgs {
    /// Semi-axes (side lengths with --shape box); a single value with --dim gives a ball
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required_unless_present = "input"
    )]
    pub axes: Option<Vec<f64>>,
    /// JSON ellipsoid `{dim, center, frame, semi_axes}` instead of --axes
    #[arg(long, conflicts_with_all = ["axes", "dim", "frame", "center"])]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Orthonormal frame, row-major, columns are the principal directions
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub frame: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub center: Option<Vec<f64>>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Write the report here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Ellipsoid,
    Box,
    Sphere,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMethod {
    /// Gauss-map line integral (any dimension)
    Quadrature,
    /// Direct surface quadrature (dimension <= 6)
    Surface,
    /// Monte Carlo fit of the Steiner polynomial
    Steiner,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MeasuresArgs {
    #[command(flatten)]
    pub body: BodyArgs,
    #[arg(long, value_enum, default_value_t = Shape::Ellipsoid)]
    pub shape: Shape,
    #[arg(long, value_enum, default_value_t = MeasureMethod::Quadrature)]
    pub method: MeasureMethod,
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
    /// Sample count for --method steiner
    #[arg(long, default_value_t = 400_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub body: BodyArgs,
    /// Only this index; all indices by default
    #[arg(long)]
    pub index: Option<usize>,
    /// Tolerance of the quadrature value reported alongside the bounds
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TubeArgs {
    #[command(flatten)]
    pub body: BodyArgs,
    #[arg(long)]
    pub rho: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GrassmannArgs {
    #[command(flatten)]
    pub body: BodyArgs,
    /// Semi-axes of the comparison ellipsoid (centered at the origin); unit ball by default
    #[arg(long, value_delimiter = ',')]
    pub reference_axes: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1)]
    pub r_flat: usize,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LatticeArgs {
    #[command(flatten)]
    pub body: BodyArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct JohnArgs {
    /// Point file: JSON array of points or CSV with one point per row
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub symmetric: bool,
    #[arg(long, default_value_t = 1e-8)]
    pub epsilon: f64,
    /// Measured M_0..M_{n-1} of the body, to bound symmetric functions of the John semi-axes
    #[arg(long, value_delimiter = ',')]
    pub mean_curvatures: Option<Vec<f64>>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Lattice discrepancy of λE for λ = 1..lambda-max
    Dilation,
    /// Quadrature M_i against pinch bounds for random ellipsoids
    Pinch,
    /// Tube area bounds and breakdown radius for random ellipsoids
    Tube,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub kind: SweepKind,
    /// Base ellipsoid for --kind dilation
    #[arg(long, value_delimiter = ',')]
    pub axes: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub frame: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub center: Option<Vec<f64>>,
    #[arg(long, default_value_t = 50)]
    pub lambda_max: u32,
    /// Number of random ellipsoids
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
    /// Smallest and largest dimension of random ellipsoids
    #[arg(long, value_delimiter = ',', default_values_t = [2, 5])]
    pub dims: Vec<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}
