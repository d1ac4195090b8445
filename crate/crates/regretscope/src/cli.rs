use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use regretscope_core::maze::{PerturbMode, PreFilter};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "regretscope", version, about = "Recognition/decision regret analysis")]
pub struct Cli {
    /// Directory for report files and the run manifest.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads for per-seed runs (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// First seed; seeds are `seed_base .. seed_base + seeds`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed_base: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Reproduce every quantity of the three-state worked example.
    WorkedExample(WorkedArgs),
    /// Decompose the regret of a recognition/decision pair read from JSON.
    Solve(SolveArgs),
    /// Key-door maze experiments.
    #[command(subcommand)]
    Maze(MazeCommand),
    /// Re-run a manifest and compare the outputs byte for byte.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum StartArg {
    #[value(name = "1")]
    One,
    #[value(name = "0")]
    Zero,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct WorkedArgs {
    #[arg(long, default_value_t = 0.9)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Initial state of the grayscale test environment.
    #[arg(long, value_enum, default_value_t = StartArg::One)]
    pub test_start: StartArg,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub env: PathBuf,
    #[arg(long)]
    pub rho: PathBuf,
    #[arg(long)]
    pub pi: PathBuf,
    #[arg(long, default_value_t = 0.9)]
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MazeCommand {
    /// Generalisation regret per pre-filter.
    Run(MazeRunArgs),
    /// Regret under forced random actions or observation masking.
    Perturb(PerturbArgs),
    /// Representation distance matrix between the twelve configurations.
    Similarity(SimilarityArgs),
    /// Generalisation regret as observation channels are dropped.
    Coarsen(CoarsenArgs),
}

pub fn parse_filter(s: &str) -> Result<PreFilter, String> {
    PreFilter::parse(s).ok_or_else(|| format!("unknown filter `{s}` (identity|hidecolors|hidedoor|blind|onehot)"))
}

pub fn parse_mode(s: &str) -> Result<PerturbMode, String> {
    PerturbMode::parse(s).ok_or_else(|| format!("unknown mode `{s}` (random-actions|mask)"))
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LearnArgs {
    #[arg(long, default_value_t = 5)]
    pub seeds: usize,
    /// Training episodes per learner.
    #[arg(long, default_value_t = 20_000)]
    pub episodes: usize,
    /// Evaluation episodes per value estimate.
    #[arg(long, default_value_t = 300)]
    pub eval_episodes: usize,
    /// Maximum number of distinct tokens per learner.
    #[arg(long, default_value_t = 100_000)]
    pub token_budget: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MazeRunArgs {
    #[arg(long, value_delimiter = ',', value_parser = parse_filter,
          default_value = "identity,hidecolors,hidedoor,blind,onehot")]
    pub filter: Vec<PreFilter>,
    #[command(flatten)]
    pub learn: LearnArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PerturbArgs {
    #[arg(long, value_parser = parse_mode)]
    pub mode: PerturbMode,
    /// Perturbation strengths (default 0, 0.1, …, 0.5).
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    #[command(flatten)]
    pub learn: LearnArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimilarityArgs {
    #[arg(long, value_parser = parse_filter, default_value = "identity")]
    pub filter: PreFilter,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CoarsenArgs {
    #[arg(long, value_parser = parse_filter, default_value = "identity")]
    pub filter: PreFilter,
    #[command(flatten)]
    pub learn: LearnArgs,
}
