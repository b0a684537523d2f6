//! `specsynth`: command-line workbench for spectral synthesis on Z_N^d.
//!
//! Single runs print `{"config": ..., "result": ...}` JSON; sweeps print CSV
//! whose header lines (`# config:`, `# generated_unix:`) carry the resolved
//! configuration and a timestamp, so bodies are byte-comparable.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use spectral_synthesis::experiments::PMode;
use spectral_synthesis::{Exponent, GridShape};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_ASSERTION: u8 = 3;
pub const EXIT_DATA: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "specsynth", version, about = "Spectral synthesis inequalities, extremal sets and exact recovery on Z_N^d")]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, env = "SPECSYNTH_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output format; CSV for sweeps and batches, JSON otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the output to this file (atomically) instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Describe what the subcommand computes and exit.
    #[arg(long, global = true)]
    pub explain: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Forward transform of a space-domain file, or inverse of a frequency-domain one.
    Transform(TransformArgs),
    /// Check a sup-norm bound for a signal with spectrum in a set.
    Verify(VerifyArgs),
    /// Build a random set, a coordinate subgroup pair, or a sharpness witness.
    Construct(ConstructArgs),
    /// Tail of the largest nontrivial Fourier coefficient of random sets.
    PhiStats(PhiStatsArgs),
    /// Search for a set with small empirical Λ(p) constant.
    LambdaSearch(LambdaSearchArgs),
    /// Recover a separated signal with hidden frequencies.
    Recover(RecoverArgs),
    /// Decay of the sup-norm threshold and the endpoint family across N.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct TransformArgs {
    /// Signal or spectrum file.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    /// `‖f‖_∞ ≤ sqrt(|S|/N^{2d/p}) ‖f‖_p`, for p ≥ 2.
    Support,
    /// `‖f‖_∞ ≤ N^{-d/2} ‖f‖_p ‖1̂_S‖_{p'}`.
    Indicator,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub which: Which,
    #[arg(long, value_parser = parse_grid)]
    pub grid: GridShape,
    #[arg(long, value_parser = parse_exponent)]
    pub p: Exponent,
    #[arg(long)]
    pub set_file: PathBuf,
    #[arg(long)]
    pub signal_file: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// Uniform random set of `--size` (or `⌈N^α⌉`) frequencies.
    Random,
    /// Coordinate subgroup on `--axes` and its annihilator.
    Subspace,
    /// Random set whose normalised indicator has `‖f‖_p ≤ 2^{1/p}`.
    Sharpness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    MeasuredNorm,
    PhiCertified,
}

#[derive(Args, Debug, Serialize)]
pub struct ConstructArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, value_parser = parse_grid)]
    pub grid: GridShape,
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// One-based free axes of the subgroup, e.g. `1,3`.
    #[arg(long, value_delimiter = ',')]
    pub axes: Vec<usize>,
    #[arg(long, value_parser = parse_exponent)]
    pub p: Option<Exponent>,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = Rule::MeasuredNorm)]
    pub rule: Rule,
    #[arg(long, default_value_t = 10_000)]
    pub max_draws: usize,
    /// Also write the associated signal: the normalised indicator for
    /// random and sharpness sets, `1̂_H` for subgroups.
    #[arg(long)]
    pub signal_out: Option<PathBuf>,
    /// Also write the set (for subgroups, `H`) as a set file.
    #[arg(long)]
    pub set_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PhiStatsArgs {
    #[arg(long, value_parser = parse_grid)]
    pub grid: GridShape,
    #[arg(long)]
    pub size: usize,
    /// Threshold `a`; defaults to `|S|^{exponent}`.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, default_value_t = 0.75)]
    pub exponent: f64,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct LambdaSearchArgs {
    #[arg(long, value_parser = parse_grid)]
    pub grid: GridShape,
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_parser = parse_exponent)]
    pub p: Exponent,
    /// Swap budget per restart.
    #[arg(long, default_value_t = 200)]
    pub budget: usize,
    /// Coefficient probes per evaluation.
    #[arg(long, default_value_t = 64)]
    pub trials: usize,
    /// Fail when the certified constant exceeds this.
    #[arg(long)]
    pub max_constant: Option<f64>,
    #[arg(long)]
    pub set_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct RecoverArgs {
    /// Solve a problem file instead of generating instances.
    #[arg(long, conflicts_with_all = ["grid", "hidden_size", "instances"])]
    pub problem_file: Option<PathBuf>,
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<GridShape>,
    /// Alphabet of the generated truth, and the snapping alphabet.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alphabet: Vec<f64>,
    #[arg(long)]
    pub hidden_size: Option<usize>,
    /// Fixed exponent; chosen per instance when absent.
    #[arg(long, value_parser = parse_exponent)]
    pub p: Option<Exponent>,
    #[arg(long, default_value_t = 1)]
    pub instances: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 50_000)]
    pub max_iters: usize,
    /// Skip the exhaustive cross-check.
    #[arg(long)]
    pub no_oracle: bool,
    /// Append result rows to this CSV file.
    #[arg(long)]
    pub append_csv: Option<PathBuf>,
    /// Write the generated problem (first instance) as a problem file.
    #[arg(long)]
    pub problem_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = PModeArg::Critical)]
    pub p_mode: PModeArg,
    /// `LO..HI`: every power-of-two multiple of LO up to HI.
    #[arg(long, value_parser = parse_range)]
    pub grid_range: (usize, usize),
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 100)]
    pub budget: usize,
    #[arg(long, default_value_t = 32)]
    pub trials: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PModeArg {
    Subcritical,
    Critical,
    Supercritical,
}

impl From<PModeArg> for PMode {
    fn from(m: PModeArg) -> Self {
        match m {
            PModeArg::Subcritical => PMode::Subcritical,
            PModeArg::Critical => PMode::Critical,
            PModeArg::Supercritical => PMode::Supercritical,
        }
    }
}

fn parse_grid(s: &str) -> Result<GridShape, String> {
    let (n, d) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NxD, e.g. 16x2, got {s:?}"))?;
    let n: usize = n.trim().parse().map_err(|_| format!("bad modulus in {s:?}"))?;
    let d: usize = d.trim().parse().map_err(|_| format!("bad dimension in {s:?}"))?;
    GridShape::new(n, d).map_err(|e| e.to_string())
}

fn parse_exponent(s: &str) -> Result<Exponent, String> {
    s.parse::<Exponent>().map_err(|e| e.to_string())
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected LO..HI, got {s:?}"))?;
    let lo: usize = lo.trim().parse().map_err(|_| format!("bad lower end in {s:?}"))?;
    let hi: usize = hi.trim().parse().map_err(|_| format!("bad upper end in {s:?}"))?;
    if lo < 2 || hi < lo {
        return Err(format!("range must satisfy 2 ≤ LO ≤ HI, got {s:?}"));
    }
    Ok((lo, hi))
}

/// A failure with a chosen exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    pub fn assertion(message: impl Into<String>) -> Self {
        Failure { code: EXIT_ASSERTION, message: message.into() }
    }
}

impl From<spectral_synthesis::Error> for Failure {
    fn from(e: spectral_synthesis::Error) -> Self {
        use spectral_synthesis::Error as E;
        let code = match &e {
            E::InvalidGrid(_) | E::Domain(_) | E::EmptySet | E::IndexOutOfRange { .. } | E::DimensionMismatch { .. } => {
                EXIT_USAGE
            }
            E::Data(_)
            | E::Json(_)
            | E::Csv(_)
            | E::Io(_)
            | E::SupportViolation { .. }
            | E::ShapeMismatch { .. }
            | E::LengthMismatch { .. }
            | E::NonFinite(_)
            | E::Unrecoverable(_) => EXIT_DATA,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
