use std::path::PathBuf;
use std::process::ExitCode;

use christoffel_core::scoring::DEFAULT_QUANTILE;
use christoffel_core::{Domain, ErrorClass};
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

#[derive(Parser, Debug)]
#[command(name = "christoffel", version, about = "Christoffel-Darboux anomaly detection for trajectories")]
struct Cli {
    /// Run every loop on one thread. Outputs are byte-identical either way;
    /// this pins the schedule as well.
    #[arg(long, global = true)]
    deterministic: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a model on a trajectory table and write the model file.
    Fit(FitArgs),
    /// Score probe trajectories against a model.
    Score(ScoreArgs),
    /// Absorb new trajectories into a model.
    Update(UpdateArgs),
    /// Remove previously absorbed trajectories from a model.
    Downdate(UpdateArgs),
    /// Generate the synthetic reference experiments.
    Synth(SynthArgs),
    /// Compare the CD score with nearest-trajectory and pointwise baselines.
    Baseline(BaselineArgs),
    /// Print a model file's header and spectrum.
    Info(InfoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonArg {
    Auto,
    Value(f64),
}

impl std::str::FromStr for EpsilonArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(EpsilonArg::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v >= 0.0 && v.is_finite() => Ok(EpsilonArg::Value(v)),
            _ => Err(format!("expected 'auto' or a finite number >= 0, got '{s}'")),
        }
    }
}

impl std::fmt::Display for EpsilonArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EpsilonArg::Auto => f.write_str("auto"),
            EpsilonArg::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameArg {
    Standardized,
    Raw,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleArg {
    Example1,
    Example2,
}

#[derive(Args, Debug, Clone)]
pub struct ThresholdArgs {
    /// Nearest-rank quantile of calibration CD values.
    #[arg(long, conflicts_with = "threshold_multiple")]
    pub threshold_quantile: Option<f64>,
    /// Threshold as a multiple of the polynomial space dimension.
    #[arg(long)]
    pub threshold_multiple: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Model file to write.
    #[arg(long, alias = "model")]
    pub output: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub degree_d: usize,
    #[arg(long, default_value_t = 4)]
    pub degree_n: usize,
    #[arg(long, default_value = "auto")]
    pub epsilon: EpsilonArg,
    /// Gauss-Chebyshev nodes for projection [default: max(256, 8n)].
    #[arg(long)]
    pub quad_points: Option<usize>,
    /// Time interval lo:hi [default: span of the sample times, or -1:1].
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<Domain>,
    #[arg(long, value_enum, default_value_t = FrameArg::Standardized)]
    pub frame: FrameArg,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ScoreArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Probe trajectories.
    #[arg(long)]
    pub input: PathBuf,
    /// Report file [default: stdout].
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Histogram of CD values as bin_lo,bin_hi,count.
    #[arg(long)]
    pub histogram_out: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    /// Trajectories to recalibrate the threshold on.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Reference dataset; fills the baseline_l2 column.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub quad_points: Option<usize>,
    /// Must equal the model's domain when given.
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<Domain>,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
}

#[derive(Args, Debug, Clone)]
pub struct UpdateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Model file to write.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub quad_points: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<Domain>,
}

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value_t = ExampleArg::Example1)]
    pub example: ExampleArg,
    /// Number of inlier trajectories.
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Harmonic outlier amplitude (example2).
    #[arg(long, default_value_t = christoffel_core::synth::HARMONIC_OUTLIER_AMPLITUDE)]
    pub amplitude: f64,
    /// Output directory.
    #[arg(long)]
    pub output: PathBuf,
    /// Also write every curve at 201 uniform times.
    #[arg(long)]
    pub overlay: bool,
}

#[derive(Args, Debug, Clone)]
pub struct BaselineArgs {
    /// Reference trajectories.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Probe trajectories.
    #[arg(long)]
    pub input: PathBuf,
    /// Model for the cd column [default: fit one on the dataset].
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub degree_d: usize,
    #[arg(long, default_value_t = 4)]
    pub degree_n: usize,
    #[arg(long, default_value = "auto")]
    pub epsilon: EpsilonArg,
    #[arg(long)]
    pub quad_points: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<Domain>,
    /// Total degree of the pointwise (t, x) Christoffel function.
    #[arg(long, default_value_t = 4)]
    pub naive_degree: usize,
    /// Pointwise level below which a node counts as abnormal [default: in-cloud floor].
    #[arg(long)]
    pub naive_delta: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct InfoArgs {
    #[arg(long)]
    pub model: PathBuf,
}

fn run_header(cli: &Cli) -> String {
    let (epsilon, quad) = match &cli.command {
        Command::Fit(a) => (a.epsilon.to_string(), a.quad_points),
        Command::Baseline(a) => (a.epsilon.to_string(), a.quad_points),
        Command::Score(a) => ("from model".to_owned(), a.quad_points),
        Command::Update(a) | Command::Downdate(a) => ("from model".to_owned(), a.quad_points),
        Command::Synth(_) | Command::Info(_) => ("n/a".to_owned(), None),
    };
    let quad = quad.map_or_else(|| "max(256, 8n)".to_owned(), |m| m.to_string());
    format!(
        "# christoffel {}: epsilon={epsilon} quad_points={quad} threshold=quantile {DEFAULT_QUANTILE} (default) execution={}",
        commands::name(&cli.command),
        if cli.deterministic { "sequential" } else { "parallel" }
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    eprintln!("{}", run_header(&cli));
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Input => 2,
                ErrorClass::Numerical => 3,
                ErrorClass::Mismatch => 4,
            })
        }
    }
}
