//! Argument parsing and command dispatch for the `treesample` binary.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use treesample::colbourn;
use treesample::oracle::{exact_distribution_capped, DEFAULT_ENUM_CAP};
use treesample::scaling::{run_scaling, size_range, ScalingConfig, WeightDistribution};
use treesample::{swor, Algorithm, Graph, PreparedSampler, RandomSource, TreeKind};

pub mod output;
pub mod selftest;

use output::{Format, RecordWriter};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    InvalidGraph(treesample::Error),
    #[error("{0}")]
    Domain(treesample::Error),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("write failed: {0}")]
    Write(#[from] io::Error),
    #[error("selftest failed: {}", .0.join(", "))]
    SelftestFailed(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::InvalidGraph(_) | CliError::Read { .. } => 2,
            CliError::Domain(_) | CliError::Write(_) => 3,
            CliError::SelftestFailed(_) => 4,
        }
    }
}

impl From<treesample::Error> for CliError {
    fn from(e: treesample::Error) -> Self {
        match e {
            treesample::Error::InvalidArgument(msg) => CliError::Usage(msg),
            e if e.is_invalid_graph() => CliError::InvalidGraph(e),
            e => CliError::Domain(e),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "treesample", version, about = "Sample spanning and dependency trees from weighted graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw k independent trees.
    Sample(SampleArgs),
    /// Draw up to k distinct trees without replacement.
    Swor(SworArgs),
    /// List every tree with its weight and probability (small graphs only).
    Enumerate(ExactArgs),
    /// Print the (N+1)x(N+1) edge-marginal matrix.
    Marginals(KindArgs),
    /// Print the partition function, by determinant and (if small) by enumeration.
    Partition(ExactArgs),
    /// Time samplers on random complete graphs of growing size.
    Bench(BenchArgs),
    /// Check the samplers against the exact oracle on built-in fixtures.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Spanning,
    Dependency,
}

impl From<KindArg> for TreeKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Spanning => TreeKind::Spanning,
            KindArg::Dependency => TreeKind::Dependency,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Wilson,
    WilsonRc,
    WilsonReject,
    Colbourn,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Wilson => Algorithm::Wilson,
            AlgorithmArg::WilsonRc => Algorithm::WilsonRc,
            AlgorithmArg::WilsonReject => Algorithm::WilsonReject,
            AlgorithmArg::Colbourn => Algorithm::Colbourn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightsArg {
    Uniform,
    Exponential,
    SoftmaxGumbel,
}

impl From<WeightsArg> for WeightDistribution {
    fn from(w: WeightsArg) -> Self {
        match w {
            WeightsArg::Uniform => WeightDistribution::Uniform,
            WeightsArg::Exponential => WeightDistribution::Exponential,
            WeightsArg::SoftmaxGumbel => WeightDistribution::SoftmaxGumbel,
        }
    }
}

#[derive(Debug, Args)]
pub struct KindArgs {
    /// Graph JSON file: {"n": N, "weights": [[...], ...]}.
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value = "dependency")]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub output: Format,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub common: KindArgs,
    /// Largest N the brute-force enumerator accepts.
    #[arg(long, default_value_t = DEFAULT_ENUM_CAP)]
    pub enum_cap: usize,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: KindArgs,
    #[arg(long, value_enum, default_value = "colbourn")]
    pub algorithm: AlgorithmArg,
    /// Number of trees.
    #[arg(short, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SworArgs {
    #[command(flatten)]
    pub common: KindArgs,
    /// Maximum number of distinct trees.
    #[arg(short, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 5)]
    pub n_min: usize,
    #[arg(long, default_value_t = 40)]
    pub n_max: usize,
    #[arg(long, default_value_t = 5)]
    pub n_step: usize,
    /// Explicit comma-separated sizes; overrides the n range.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Timed samples drawn from each graph.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples_per_size: u64,
    /// Random graphs generated per size.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub graphs_per_size: u64,
    /// Algorithms to time; may be repeated.
    #[arg(long, value_enum, default_values = ["colbourn", "wilson-rc"])]
    pub algorithm: Vec<AlgorithmArg>,
    #[arg(long, value_enum, default_value = "uniform")]
    pub weight_distribution: WeightsArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub output: Format,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Samples per distributional check.
    #[arg(long, default_value_t = 50_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match run(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn load_graph(path: &Path) -> Result<Graph, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    let g = Graph::from_json(&text).map_err(CliError::InvalidGraph)?;
    g.validate().map_err(CliError::InvalidGraph)?;
    Ok(g)
}

fn warn_cap(cap: usize, err: &mut dyn Write) -> io::Result<()> {
    if cap > DEFAULT_ENUM_CAP {
        writeln!(err, "warning: --enum-cap {cap} exceeds {DEFAULT_ENUM_CAP}; enumeration may be very slow")?;
    }
    Ok(())
}

pub fn run(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Sample(a) => cmd_sample(a, out),
        Command::Swor(a) => cmd_swor(a, out),
        Command::Enumerate(a) => cmd_enumerate(a, out, err),
        Command::Marginals(a) => cmd_marginals(a, out),
        Command::Partition(a) => cmd_partition(a, out, err),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Selftest(a) => {
            let report = selftest::run(&selftest::Implementations::default(), a.seed, a.samples, out)?;
            if report.failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::SelftestFailed(report.failed))
            }
        }
    }
}

fn cmd_sample(a: SampleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let algorithm = Algorithm::from(a.algorithm);
    let kind = TreeKind::from(a.common.kind);
    if !algorithm.supports(kind) {
        return Err(CliError::Usage(format!("{algorithm} cannot sample {kind} trees")));
    }
    let g = load_graph(&a.common.graph)?;
    let sampler = PreparedSampler::new(&g, algorithm, kind)?;
    let mut w = RecordWriter::new(out, a.common.output);
    for index in 0..a.k {
        let mut rng = RandomSource::stream(a.seed, index);
        let (tree, stats) = sampler.draw(&mut rng)?;
        w.sample(&g, &tree, stats.map(|s| s.steps_taken))?;
    }
    Ok(w.finish()?)
}

fn cmd_swor(a: SworArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let kind = TreeKind::from(a.common.kind);
    let g = load_graph(&a.common.graph)?;
    let k = usize::try_from(a.k).map_err(|_| CliError::Usage("k is too large".into()))?;
    let outcome = swor(&g, kind, k, &mut RandomSource::new(a.seed))?;
    let mut w = RecordWriter::new(out, a.common.output);
    for d in &outcome.draws {
        w.swor_draw(&g, d)?;
    }
    w.swor_summary(k, outcome.draws.len(), outcome.exhausted)?;
    Ok(w.finish()?)
}

fn cmd_enumerate(a: ExactArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    warn_cap(a.enum_cap, err)?;
    let g = load_graph(&a.common.graph)?;
    let exact = exact_distribution_capped(&g, a.common.kind.into(), a.enum_cap)?;
    let mut w = RecordWriter::new(out, a.common.output);
    for e in exact.entries.values() {
        w.exact_entry(e)?;
    }
    Ok(w.finish()?)
}

fn cmd_marginals(a: KindArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?;
    let m = colbourn::marginals(&g, a.kind.into())?;
    RecordWriter::new(out, a.output).matrix(&m)?;
    Ok(())
}

fn cmd_partition(a: ExactArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    warn_cap(a.enum_cap, err)?;
    let kind = TreeKind::from(a.common.kind);
    let g = load_graph(&a.common.graph)?;
    let z_mtt = colbourn::partition(&g, kind)?;
    let z_oracle = if g.n() <= a.enum_cap {
        match exact_distribution_capped(&g, kind, a.enum_cap) {
            Ok(d) => Some(d.z),
            Err(treesample::Error::EmptySupport) => Some(0.0),
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    RecordWriter::new(out, a.common.output).partition(z_mtt, z_oracle, kind)?;
    Ok(())
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let sizes = match a.sizes {
        Some(s) if s.is_empty() || s.iter().any(|&n| n < 2) => {
            return Err(CliError::Usage("--sizes must list sizes of at least 2".into()))
        }
        Some(s) => s,
        None => size_range(a.n_min, a.n_max, a.n_step)?,
    };
    let mut algorithms: Vec<Algorithm> = a.algorithm.into_iter().map(Algorithm::from).collect();
    algorithms.dedup();
    let cfg = ScalingConfig {
        sizes,
        algorithms,
        graphs_per_size: a.graphs_per_size as usize,
        samples_per_graph: a.samples_per_size as usize,
        weights: a.weight_distribution.into(),
        seed: a.seed,
        ..ScalingConfig::default()
    };
    let report = run_scaling(&cfg)?;
    let mut w = RecordWriter::new(out, a.output);
    w.bench(&report, &cfg.algorithms)?;
    Ok(w.finish()?)
}
