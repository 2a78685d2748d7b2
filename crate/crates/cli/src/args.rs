use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Critical beta-splitting random trees: samplers, exact recurrences, growth, fringe,
/// statistics and the acceptance suite.
#[derive(Debug, Parser)]
#[command(name = "betasplit", version, disable_help_subcommand = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Seed and worker count shared by every subcommand.
#[derive(Debug, Args, Clone, Copy)]
pub struct Common {
    /// Master seed for all random streams [env: BETASPLIT_SEED, default 0]
    #[arg(long, env = "BETASPLIT_SEED", default_value_t = 0, hide_env = true)]
    pub seed: u64,
    /// Worker threads for replicate loops; never changes the output
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=1024))]
    pub workers: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    /// Discrete-time tree, shape only
    Dtcs,
    /// Continuous-time tree with Exponential(h[m-1]) holds
    Ctcs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one discrete-time tree DTCS(n)
    SampleDtcs(Sample),
    /// Sample one continuous-time tree CTCS(n)
    SampleCtcs(Sample),
    /// Grow CTCS(n) from CTCS(2) one leaf at a time
    Grow(Grow),
    /// Prune a CTCS tree to the subtree spanned by chosen leaves
    Prune(Prune),
    /// Sample the first levels of the fringe process around a leaf
    Fringe(Fringe),
    /// Tabulate the exact leaf-height moments t, m2, var and thop
    Recurrence(Recurrence),
    /// Tabulate the occupation probabilities a(n, i)
    Occupancy(Occupancy),
    /// Per-replicate statistics of sampled trees
    Stats(Stats),
    /// Run the acceptance suite and write JSON, CSV and SVG reports
    Verify(Verify),
    /// Split statistics of a Newick cladogram, optionally compared with the model
    NewickStats(NewickStats),
}

#[derive(Debug, Args)]
pub struct Sample {
    /// Number of leaves
    #[arg(long)]
    pub n: usize,
    /// Output format: preorder CSV, JSON, or an SVG cladogram
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write Newick instead of --format (CTCS branch lengths are hold times)
    #[arg(long)]
    pub newick: bool,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Grow {
    /// Number of buds in the final tree (at least 2)
    #[arg(long)]
    pub n: usize,
    /// Also emit one CSV record per growth step after the tree
    #[arg(long)]
    pub trace: bool,
    /// Output format of the final tree
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Prune {
    /// Leaves of the sampled CTCS tree (ignored with --input)
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Timed tree in preorder CSV to prune instead of a fresh sample
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Keep this many uniformly chosen leaves
    #[arg(long, conflicts_with = "leaves")]
    pub k: Option<usize>,
    /// Keep these leaf positions (0-based, comma separated)
    #[arg(long, value_delimiter = ',')]
    pub leaves: Vec<usize>,
    /// Output format of the pruned tree
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Fringe {
    /// Number of upward steps to sample
    #[arg(long, default_value_t = 10)]
    pub levels: usize,
    /// Size n of the occupancy table a(n, .) that drives the steps; walks stop at n
    #[arg(long, default_value_t = 10_000)]
    pub horizon: usize,
    /// Output format: step CSV, JSON, or an SVG render
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Recurrence {
    /// Largest n tabulated
    #[arg(long = "N", value_name = "N")]
    pub n_max: usize,
    /// Output format (csv or json)
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Occupancy {
    /// Start state n of the chain
    #[arg(long)]
    pub n: usize,
    /// Use the O(n^2) reference solver instead of the FFT solver
    #[arg(long)]
    pub reference: bool,
    /// Output format (csv or json)
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Stats {
    /// Leaves per tree
    #[arg(long)]
    pub n: usize,
    /// Number of trees
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    /// Tree model
    #[arg(long, value_enum, default_value_t = Model::Ctcs)]
    pub model: Model,
    /// Exponents p of the power sums S^(p) (comma separated)
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
    pub powers: Vec<f64>,
    /// Output format: one CSV row per tree, or JSON
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Verify {
    /// core: the acceptance criteria; full: adds larger supplementary runs
    #[arg(long, default_value = "core")]
    pub suite: String,
    /// Run only these criteria (1 to 13, comma separated) instead of the suite
    #[arg(long, value_delimiter = ',')]
    pub criterion: Vec<usize>,
    /// Directory for the JSON, CSV and SVG reports (created if missing)
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct NewickStats {
    /// Newick file with one tree
    pub file: PathBuf,
    /// Compare the tree with DTCS simulations on the same leaf count (needs 10 leaves)
    #[arg(long)]
    pub compare: bool,
    /// Simulated trees for --compare
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    /// Output format (csv or json)
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}
