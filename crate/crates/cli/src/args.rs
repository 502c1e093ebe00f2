use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "metacorr", version, about = "Meta-evaluate automatic metrics against human scores")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a dataset manifest and print its shape and tie statistics.
    Validate(ValidateArgs),
    /// Evaluate measures for every metric.
    Measures(MeasuresArgs),
    /// Discriminative power via pairwise permutation tests.
    Dp(StochasticArgs),
    /// Ranking consistency via split-half resampling.
    Rc(RcArgs),
    /// Agreement between the metric rankings of every pair of measures.
    Agreement(AgreementArgs),
    /// Granularity simulation, optionally sweeping the metric granularity.
    Simulate(SimulateArgs),
    /// Estimate simulation parameters from a dataset.
    Estimate(EstimateArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Comma-separated measure tokens such as `global-pearson`, or `all`.
    #[arg(long, default_value = "all")]
    pub measures: String,
    /// Worker threads; never changes numeric results.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Print the summary as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct MeasuresArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory; the table goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct StochasticArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RcArgs {
    #[command(flatten)]
    pub run: StochasticArgs,
    /// Also write the per-iteration taus of every measure.
    #[arg(long)]
    pub dump_taus: bool,
}

#[derive(Debug, Args)]
pub struct AgreementArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON parameter file; built-in defaults when omitted.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    /// Inclusive metric granularity range, e.g. `2..15`.
    #[arg(long)]
    pub sweep_gm: Option<String>,
    /// Human granularity override.
    #[arg(long)]
    pub gh: Option<usize>,
    /// Sets both T1 and T2.
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Metric to estimate from; every metric when omitted.
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
