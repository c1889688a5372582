use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use forumsim::embed::{Dims, EmbeddingMode};
use forumsim::netstruct::Linkage;

#[derive(Debug, Parser)]
#[command(name = "forumsim", version, about = "Forum post and user similarity analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus, write it as normalized JSONL and print its statistics
    Ingest(IngestArgs),
    /// Print corpus statistics
    Stats(StatsArgs),
    /// Compute the post dissimilarity matrix
    Similarity(SimilarityArgs),
    /// Embed a dissimilarity matrix in principal coordinates
    Embed(EmbedArgs),
    /// Compute user centroids and user distances
    Users(UsersArgs),
    /// Hierarchical clustering of a distance matrix
    Cluster(ClusterArgs),
    /// Minimum spanning tree of a distance matrix
    Mst(MstArgs),
    /// Render an SVG scatter plot of two principal coordinates
    Scatter(ScatterArgs),
    /// Run every stage from corpus to dendrogram and spanning tree
    Pipeline(PipelineArgs),
    /// Generate synthetic data
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Corpus file: JSONL records, or a posts CSV paired with --threads
    #[arg(short, long)]
    pub input: PathBuf,
    /// Input format; inferred from the file extension when omitted
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Threads CSV (thread_id,title) for CSV input
    #[arg(long)]
    pub threads: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PrepArgs {
    /// Stopword file, one word per line; replaces the bundled English list
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Disable Porter stemming
    #[arg(long)]
    pub no_stem: bool,
    /// Keep HTML markup instead of stripping it
    #[arg(long)]
    pub keep_html: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SubsetArgs {
    /// Only analyse users with at least this many posts
    #[arg(long, default_value_t = 0)]
    pub min_posts: usize,
    /// Only analyse users with at most this many posts
    #[arg(long)]
    pub max_posts: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct LambdaArgs {
    /// Author similarity constant
    #[arg(long, conflicts_with = "lambda_quantile")]
    pub lambda: Option<f64>,
    /// Select lambda as this quantile of the nonzero post similarities [default: 0.75]
    #[arg(long)]
    pub lambda_quantile: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    PaperLiteral,
    ClassicalPcoa,
}

impl From<ModeArg> for EmbeddingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::PaperLiteral => EmbeddingMode::PaperLiteral,
            ModeArg::ClassicalPcoa => EmbeddingMode::ClassicalPcoa,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinkageArg {
    Complete,
    Single,
}

impl From<LinkageArg> for Linkage {
    fn from(l: LinkageArg) -> Self {
        match l {
            LinkageArg::Complete => Linkage::Complete,
            LinkageArg::Single => Linkage::Single,
        }
    }
}

pub fn parse_dims(s: &str) -> Result<Dims, String> {
    match s {
        "auto" => Ok(Dims::Auto),
        "full" => Ok(Dims::Full),
        n => n
            .parse()
            .map(Dims::Fixed)
            .map_err(|_| format!("expected `auto`, `full` or a count, got `{n}`")),
    }
}

pub fn parse_axes(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [x, y] => match (x.parse(), y.parse()) {
            (Ok(x), Ok(y)) => Ok((x, y)),
            _ => Err(format!("axes must be two integers, got `{s}`")),
        },
        _ => Err(format!("expected two comma-separated axes, got `{s}`")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct EmbedOptions {
    #[arg(long, value_enum, default_value = "paper-literal")]
    pub mode: ModeArg,
    /// Coordinates to keep: `auto` (90% of the spectrum), `full` or a count
    #[arg(long, value_parser = parse_dims, default_value = "auto")]
    pub dims: Dims,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Normalized JSONL output
    #[arg(short, long)]
    pub output: PathBuf,
    /// Also write the statistics table here
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub prep: PrepArgs,
    /// Print statistics as JSON instead of a table
    #[arg(long)]
    pub json: bool,
    /// Write the preprocessed tokens of every post here (post_id TAB tokens)
    #[arg(long)]
    pub tokens: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimilarityArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub prep: PrepArgs,
    #[command(flatten)]
    pub subset: SubsetArgs,
    #[command(flatten)]
    pub lambda: LambdaArgs,
    /// Dissimilarity matrix CSV
    #[arg(short, long)]
    pub output: PathBuf,
    /// Lambda report (TOML)
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Dissimilarity matrix CSV
    #[arg(short, long)]
    pub matrix: PathBuf,
    #[command(flatten)]
    pub embed: EmbedOptions,
    /// Coordinates CSV; the spectrum goes next to it as `<name>.spectrum.csv`
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct UsersArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Post coordinates CSV from `embed`
    #[arg(short, long, required_unless_present = "average")]
    pub embedding: Option<PathBuf>,
    /// Use the mean post distance between users instead of centroids
    #[arg(long, conflicts_with = "embedding")]
    pub average: bool,
    #[command(flatten)]
    pub prep: PrepArgs,
    #[command(flatten)]
    pub subset: SubsetArgs,
    /// User distance matrix CSV
    #[arg(short, long)]
    pub distances: PathBuf,
    /// User centroid CSV
    #[arg(long)]
    pub centroids: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Distance matrix CSV
    #[arg(short, long)]
    pub distances: PathBuf,
    #[arg(long, value_enum, default_value = "complete")]
    pub linkage: LinkageArg,
    /// Cut the tree into this many clusters
    #[arg(short, long)]
    pub k: Option<usize>,
    /// Dendrogram JSON output
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Dendrogram Newick output; printed to stdout when no output is given
    #[arg(long)]
    pub newick: Option<PathBuf>,
    /// Cluster labels CSV (needs --k)
    #[arg(long, requires = "k")]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MstArgs {
    /// Distance matrix CSV
    #[arg(short, long)]
    pub distances: PathBuf,
    /// DOT output; printed to stdout when omitted
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Edge list CSV
    #[arg(long)]
    pub edges: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    /// Post coordinates CSV
    #[arg(short, long)]
    pub embedding: PathBuf,
    /// User centroid CSV, drawn as numbered markers
    #[arg(long)]
    pub centroids: Option<PathBuf>,
    /// Corpus used to colour posts by author
    #[arg(short, long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub threads: Option<PathBuf>,
    /// Two 1-based coordinate indices, e.g. `2,3`
    #[arg(long, default_value = "1,2", value_parser = parse_axes)]
    pub axes: (usize, usize),
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub prep: PrepArgs,
    #[command(flatten)]
    pub subset: SubsetArgs,
    #[command(flatten)]
    pub lambda: LambdaArgs,
    #[command(flatten)]
    pub embed: EmbedOptions,
    #[arg(long, value_enum, default_value = "complete")]
    pub linkage: LinkageArg,
    /// Also write cluster labels for a cut into this many clusters
    #[arg(short, long)]
    pub k: Option<usize>,
    /// Also compute the text-only baseline for comparison
    #[arg(long)]
    pub baseline: bool,
    /// Directory for all artifacts (created if missing)
    #[arg(short, long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    /// Planted-community forum corpus (JSONL)
    Forum(SynthForumArgs),
    /// Gaussian point groups (CSV)
    Gaussian(SynthGaussianArgs),
}

#[derive(Debug, Args)]
pub struct SynthForumArgs {
    /// TOML config; defaults are used for missing keys
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Keep the bodies of thread-mates disjoint
    #[arg(long)]
    pub sparse: bool,
    /// Print the effective config as TOML and exit
    #[arg(long)]
    pub print_config: bool,
    #[arg(short, long, required_unless_present = "print_config")]
    pub output: Option<PathBuf>,
    /// Planted community of every user (CSV)
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthGaussianArgs {
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub print_config: bool,
    /// Points CSV (id,group,x,y)
    #[arg(short, long, required_unless_present = "print_config")]
    pub output: Option<PathBuf>,
    /// Also write the point dissimilarity matrix for this lambda
    #[arg(long, requires = "matrix")]
    pub lambda: Option<f64>,
    #[arg(long, requires = "lambda")]
    pub matrix: Option<PathBuf>,
}
