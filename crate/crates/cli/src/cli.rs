use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "greedyprune", version, about = "Diversity-constrained token subset selection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one selector and write a selection record.
    Prune(PruneArgs),
    /// Run several selectors at the same budget and tabulate the results.
    Compare(CompareArgs),
    /// Run the greedy selector over a list of thresholds.
    SweepTau(SweepArgs),
    /// Evaluate the prefill compute ratio, or the token count for a target ratio.
    Flops(FlopsArgs),
    /// Generate a planted-cluster token file plus a JSON sidecar.
    Gen(GenArgs),
    /// Draw the retained-token grid of a selection record.
    Viz(VizArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Greedy,
    Topk,
    Maxmin,
    Random,
    Grid,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeedRuleArg {
    Lowest,
    MaxNorm,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Token file (TOKD format).
    #[arg(long, short)]
    pub input: PathBuf,
    /// Whitespace-separated saliency weights; overrides the embedded query.
    #[arg(long)]
    pub saliency_file: Option<PathBuf>,
    /// Planted-cluster metadata; defaults to `<input>.planted.json` when present.
    #[arg(long)]
    pub planted: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectorArgs {
    /// Number of tokens to keep.
    #[arg(long, short = 'm')]
    pub budget: usize,
    /// Redundancy threshold.
    #[arg(long, default_value_t = 0.9, allow_negative_numbers = true)]
    pub tau: f64,
    /// Keep fewer than `budget` tokens instead of backfilling eliminated ones.
    #[arg(long)]
    pub no_backfill: bool,
    /// Seed for the random selector.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Token grid as WIDTHxHEIGHT (required by the grid selector).
    #[arg(long)]
    pub grid: Option<String>,
    /// Starting token for the maxmin selector.
    #[arg(long, value_enum, default_value_t = SeedRuleArg::Lowest)]
    pub seed_rule: SeedRuleArg,
    /// Largest instance the exact solver accepts.
    #[arg(long, default_value_t = greedyprune::exact::DEFAULT_EXACT_CAP)]
    pub exact_cap: usize,
    /// Report zero runtimes so output bytes are reproducible.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct PruneArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Greedy)]
    pub method: MethodArg,
    #[command(flatten)]
    pub selector: SelectorArgs,
    /// Selection record path; stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated method list; rows follow this order.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Greedy, MethodArg::Topk, MethodArg::Maxmin, MethodArg::Random])]
    pub methods: Vec<MethodArg>,
    #[command(flatten)]
    pub selector: SelectorArgs,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated thresholds.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub taus: Vec<f64>,
    #[arg(long, short = 'm')]
    pub budget: usize,
    #[arg(long)]
    pub no_backfill: bool,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct FlopsArgs {
    /// Total decoder layers (T).
    #[arg(long)]
    pub layers: u64,
    /// Layers run at full length before pruning (K).
    #[arg(long)]
    pub prune_layer: u64,
    /// Text tokens (N).
    #[arg(long)]
    pub text_len: u64,
    /// Visual tokens before pruning (M).
    #[arg(long)]
    pub visual: u64,
    /// Visual tokens after pruning.
    #[arg(long, conflicts_with = "target", required_unless_present = "target")]
    pub pruned: Option<u64>,
    /// Target ratio; prints the largest pruned count that meets it.
    #[arg(long)]
    pub target: Option<f64>,
    /// Hidden size (d).
    #[arg(long)]
    pub hidden: u64,
    /// Feed-forward intermediate size (m).
    #[arg(long)]
    pub ffn: u64,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub clusters: usize,
    #[arg(long)]
    pub per_cluster: usize,
    #[arg(long)]
    pub dim: usize,
    /// Minimum same-cluster cosine.
    #[arg(long, default_value_t = 0.95)]
    pub intra: f64,
    /// Maximum cross-cluster cosine.
    #[arg(long, default_value_t = 0.3)]
    pub inter: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Token file to write; the sidecar goes to `<out>.planted.json`.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VizArgs {
    /// Selection record to draw.
    #[arg(long, short)]
    pub selection: PathBuf,
    /// Token file the selection was computed from.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Token grid as WIDTHxHEIGHT.
    #[arg(long)]
    pub grid: String,
    /// Output stem; writes `<out>.pgm` and `<out>.svg`.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Pixels per grid cell.
    #[arg(long, default_value_t = 16)]
    pub cell_px: usize,
}
