use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oodbench::split::{BaseDistribution, BuildConfig, RarenessThresholds};
use oodbench::{Decimal, Error};

const FORMATS: &str = "\
File formats:

  Corpus (input of stats/build/synth-preds, output of synth):
    {\"q1\": {\"question\": \"What color is the rose?\", \"answer\": \"red\",
            \"imageId\": \"n123\", \"groups\": {\"local\": \"color-rose\", \"global\": \"color\"},
            \"types\": {\"structural\": \"query\", \"semantic\": \"attr\"}}}

  Predictions (input of eval/sweep/labels, output of synth-preds), either
    {\"q1\": \"red\", \"q2\": \"blue\"}
  or JSON-lines
    {\"questionId\": \"q1\", \"prediction\": \"red\"}
    {\"questionId\": \"q2\", \"prediction\": \"blue\"}

  Benchmark (output of build, input of eval/sweep/labels):
    {\"meta\": {\"alpha\": 1.2, \"entropy_threshold\": 0.9, \"base\": \"self_split\",
              \"rareness\": {\"low\": 0.7, \"high\": 1.2}, \"split\": \"val\", \"created\": null},
     \"groups\": {\"color-rose\": {\"counts\": {\"red\": 9, \"blue\": 1},
                                \"entropy\": 0.325, \"normalized_entropy\": 0.469}},
     \"questions\": {\"q1\": {\"group\": \"color-rose\", \"label\": \"head\", \"answer\": \"red\"}}}

  stats CSV:  group_key,total,d,entropy,normalized_entropy,selected
  sweep CSV:  alpha,n_tail,acc_tail,confusion
  labels CSV: predicted,head_correct,head_wrong,borderline_correct,borderline_wrong,tail_correct,tail_wrong

Exit status: 0 success, 1 configuration error, 2 data error.";

/// Build and score out-of-distribution benchmarks for grouped QA corpora.
#[derive(Debug, Parser)]
#[command(name = "oodbench", version, after_long_help = FORMATS)]
pub struct Cli {
    /// More diagnostics on stderr (repeat for debug output).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    /// Only report errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    /// Format of the main output. Defaults to CSV for stats, sweep, labels
    /// and table mode, JSON for eval and build summaries. Corpus, benchmark
    /// and prediction files are always JSON.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-group answer statistics and normalized entropy, as CSV.
    Stats(StatsArgs),
    /// Build the benchmark from an annotation corpus.
    Build(BuildArgs),
    /// Score prediction files against a benchmark.
    Eval(EvalArgs),
    /// Tail accuracy and head/tail confusion over a grid of alpha values.
    Sweep(SweepArgs),
    /// Reasoning labels: the predicted x gold rareness matrix and per-type breakdown.
    Labels(LabelsArgs),
    /// Generate a synthetic corpus.
    Synth(SynthArgs),
    /// Generate predictions with a registered predictor.
    SynthPreds(SynthPredsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaseKind {
    #[value(name = "self")]
    SelfSplit,
    Train,
    External,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Annotation corpus (JSON object keyed by question id).
    #[arg(long)]
    pub corpus: PathBuf,

    /// Split name recorded in artifacts; defaults to the file stem.
    #[arg(long)]
    pub split: Option<String>,
}

#[derive(Debug, Args)]
pub struct BuildOptions {
    /// Tail threshold: an answer is tail when count <= alpha * mean count.
    #[arg(long, default_value = "1.2")]
    pub alpha: Decimal,

    /// Keep groups whose normalized entropy is strictly below this value.
    #[arg(long, default_value_t = 0.9)]
    pub entropy_threshold: f64,

    /// Where group answer histograms come from.
    #[arg(long, value_enum, default_value = "self")]
    pub base: BaseKind,

    /// Corpus supplying the histograms for `--base train|external`.
    #[arg(long)]
    pub base_corpus: Option<PathBuf>,

    /// Rareness ratio below which an answer is labelled tail.
    #[arg(long, default_value = "0.7")]
    pub rareness_low: Decimal,

    /// Rareness ratio above which an answer is labelled head.
    #[arg(long, default_value = "1.2")]
    pub rareness_high: Decimal,
}

impl BuildOptions {
    pub fn config(&self) -> Result<BuildConfig, Error> {
        let base = match (self.base, &self.base_corpus) {
            (BaseKind::SelfSplit, _) => BaseDistribution::SelfSplit,
            (BaseKind::Train, Some(_)) => BaseDistribution::TrainSplit,
            (BaseKind::External, Some(path)) => BaseDistribution::External(path.clone()),
            (_, None) => {
                return Err(Error::Config(
                    "--base train|external requires --base-corpus".into(),
                ))
            }
        };
        let config = BuildConfig {
            alpha: self.alpha,
            entropy_threshold: self.entropy_threshold,
            base,
            rareness: RarenessThresholds {
                low: self.rareness_low,
                high: self.rareness_high,
            },
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,

    #[arg(long, default_value_t = 0.9)]
    pub entropy_threshold: f64,

    /// CSV destination (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Also write structural/semantic type histograms (all questions vs.
    /// selected groups) as JSON.
    #[arg(long)]
    pub types_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,

    #[command(flatten)]
    pub options: BuildOptions,

    /// Benchmark destination.
    #[arg(long)]
    pub out: PathBuf,

    /// Reference benchmark to diff against, group by group.
    #[arg(long)]
    pub reference: Option<PathBuf>,

    /// Expected `questions,groups,head,tail`; divergence is reported.
    #[arg(long, value_delimiter = ',')]
    pub expect_counts: Option<Vec<usize>>,
}

/// Either a prebuilt benchmark or a corpus to build one from.
#[derive(Debug, Args)]
pub struct BenchSource {
    /// Benchmark file written by `build`.
    #[arg(long, conflicts_with = "corpus")]
    pub bench: Option<PathBuf>,

    /// Corpus to build the benchmark from on the fly.
    #[arg(long)]
    pub corpus: Option<PathBuf>,

    #[command(flatten)]
    pub options: BuildOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableMode {
    /// Pairs are `acc_head:acc_tail`; prints (head - tail) / tail.
    Delta,
    /// Pairs are `reference:value`; prints (value - reference) / reference.
    Relative,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Benchmark file written by `build`.
    #[arg(long, required_unless_present = "table_mode")]
    pub bench: Option<PathBuf>,

    /// Prediction file(s); several files are also summarized as mean and
    /// population standard deviation.
    #[arg(long, num_args = 1.., required_unless_present = "table_mode")]
    pub preds: Vec<PathBuf>,

    /// Recompute gaps from published accuracy pairs instead of scoring files.
    #[arg(long, value_enum, requires = "pairs")]
    pub table_mode: Option<TableMode>,

    /// Comma-separated `a:b` accuracy pairs for `--table-mode`.
    #[arg(long, value_delimiter = ',')]
    pub pairs: Vec<String>,

    /// JSON report destination (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: BenchSource,

    #[arg(long)]
    pub preds: PathBuf,

    /// Comma-separated alpha grid, ascending. Defaults to 20 log-spaced
    /// points over [0.2, 5].
    #[arg(long, value_delimiter = ',')]
    pub alphas: Vec<Decimal>,

    /// CSV destination (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LabelsArgs {
    #[command(flatten)]
    pub source: BenchSource,

    #[arg(long)]
    pub preds: PathBuf,

    /// Corpus providing structural types when `--bench` is used.
    #[arg(long)]
    pub types_corpus: Option<PathBuf>,

    /// Matrix CSV destination (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Per-type JSON destination.
    #[arg(long)]
    pub types_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 100)]
    pub groups: u32,

    /// Answers per group, `min-max` or a single number.
    #[arg(long, default_value = "2-8")]
    pub answers: String,

    /// Geometric decay between answer classes, in (0, 1]; 1 is uniform.
    #[arg(long, default_value_t = 0.4)]
    pub skew: f64,

    /// Questions per group, `min-max` or a single number.
    #[arg(long, default_value = "20-200")]
    pub questions: String,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorArg {
    Local,
    Global,
}

#[derive(Debug, Args)]
pub struct SynthPredsArgs {
    /// Corpus to predict.
    #[arg(long)]
    pub corpus: PathBuf,

    /// Registered predictor name (gold, prior, knob).
    #[arg(long, default_value = "knob")]
    pub strategy: String,

    /// Probability of answering the group prior (knob only).
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Group key the prior is estimated over.
    #[arg(long, value_enum, default_value = "local")]
    pub prior: PriorArg,

    /// Corpus to estimate the prior from (defaults to `--corpus`).
    #[arg(long)]
    pub base: Option<PathBuf>,

    #[arg(long)]
    pub out: PathBuf,
}
