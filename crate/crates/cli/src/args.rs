use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use prunedirect_core::simpop::CrossType;
use prunedirect_core::DEFAULT_EPSILON;

#[derive(Debug, Parser)]
#[command(name = "prunedirect", version, about = "Quantile-pruned DIRECT search for multi-locus QTL mapping")]
pub struct Cli {
    /// Worker threads for permutation runs.
    #[arg(long, global = true, env = "PRUNEDIRECT_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a cross and write map, population and truth files.
    Simulate(SimulateArgs),
    /// Locate the best d-locus model.
    Scan(ScanArgs),
    /// Permutation test of a candidate fit.
    Permute(PermuteArgs),
    /// Run PruneDIRECT and the exhaustive scan on the same data.
    Compare(CompareArgs),
    /// Evaluation counts over simulated replicates.
    Bench(BenchArgs),
    /// Summarise scan/permutation outputs and export plot data.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossArg {
    Bc,
    F2,
}

impl From<CrossArg> for CrossType {
    fn from(c: CrossArg) -> Self {
        match c {
            CrossArg::Bc => CrossType::Backcross,
            CrossArg::F2 => CrossType::Intercross,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelArg {
    /// Class means add up across loci.
    Additive,
    /// The trait shifts only when every locus carries a Q allele.
    Interaction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineArg {
    Shortcut,
    Search,
    Exhaustive,
}

/// Genome and trait model shared by `simulate` and `bench`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimSpec {
    /// Map file; overrides --chromosomes and --length.
    #[arg(long)]
    pub map: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub chromosomes: usize,
    /// Chromosome length in cM.
    #[arg(long, default_value_t = 100.0)]
    pub length: f64,
    /// Lattice step in cM.
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    #[arg(long, value_enum, default_value_t = CrossArg::Bc)]
    pub cross: CrossArg,
    /// Individuals.
    #[arg(long, short = 'n', default_value_t = 200)]
    pub n: usize,
    /// Heritability in [0, 1).
    #[arg(long, default_value_t = 0.3)]
    pub h2: f64,
    /// Number of simulated QTL.
    #[arg(long, default_value_t = 1)]
    pub qtl_count: usize,
    /// QTL positions as name:cM, comma separated; random when omitted.
    #[arg(long, value_delimiter = ',')]
    pub qtl: Vec<String>,
    #[arg(long, value_enum, default_value_t = ModelArg::Additive)]
    pub model: ModelArg,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub spec: SimSpec,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the map file.
    #[arg(long)]
    pub out_map: PathBuf,
    /// Where to write the population file.
    #[arg(long)]
    pub out_pop: PathBuf,
    /// Where to write the simulated truth as JSON (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Inputs and search settings shared by the analysis commands.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DataArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub pop: PathBuf,
    /// Loci in the model.
    #[arg(long, short = 'd', default_value_t = 1)]
    pub d: usize,
    /// Scan on a coarser lattice; a multiple of the population's step, in cM.
    #[arg(long)]
    pub step: Option<f64>,
    /// Per-test miss probability of the pruning bound.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Largest exhaustive scan attempted.
    #[arg(long, default_value_t = prunedirect_core::search::DEFAULT_BUDGET)]
    pub budget: u128,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ScanArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Use the exhaustive lattice scan instead of PruneDIRECT.
    #[arg(long, conflicts_with = "no_prune")]
    pub exhaustive: bool,
    /// Run PruneDIRECT without pruning.
    #[arg(long)]
    pub no_prune: bool,
    /// Write the final quantile table as CSV.
    #[arg(long)]
    pub dump_quantiles: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PermuteArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Candidate RSS; defaults to the optimum of a PruneDIRECT scan.
    #[arg(long)]
    pub candidate_rss: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub perms: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = EngineArg::Shortcut)]
    pub engine: EngineArg,
    /// Significance levels for thresholds (e.g. 0.95); needs a recording engine.
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BenchArgs {
    #[command(flatten)]
    pub spec: SimSpec,
    /// Loci in the scanned model.
    #[arg(long, short = 'd', default_value_t = 1)]
    pub d: usize,
    #[arg(long, default_value_t = 10)]
    pub replicates: usize,
    /// Shortcut permutations per replicate.
    #[arg(long, default_value_t = 0)]
    pub perms: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Also run the exhaustive main scan and count agreements.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = prunedirect_core::search::DEFAULT_BUDGET)]
    pub budget: u128,
    /// Write the text table here as well.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReportArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub pop: PathBuf,
    /// Output of `scan`.
    #[arg(long)]
    pub scan: Option<PathBuf>,
    /// Output of `permute`.
    #[arg(long)]
    pub permutations: Option<PathBuf>,
    /// Write the objective along one chromosome as CSV.
    #[arg(long)]
    pub profile_csv: Option<PathBuf>,
    /// Chromosome for the profile; defaults to that of the first optimum locus.
    #[arg(long)]
    pub chromosome: Option<String>,
    /// Write a histogram of permuted optimum RSS as CSV.
    #[arg(long)]
    pub hist_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
