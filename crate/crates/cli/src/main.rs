//! `qbsh`: build a feature store, query it, and evaluate retrieval.

mod commands;
mod failure;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use qbsh_core::eval::ExcerptMode;
use qbsh_core::{FeatureConfig, FeatureKind, MeasureKind};

use failure::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "qbsh",
    version,
    about = "Query-by-singing/humming retrieval engine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Add WAV songs to a feature store (created if missing).
    Ingest(IngestArgs),
    /// Rank the stored songs against one query recording.
    Query(QueryArgs),
    /// Run the evaluation grid and write a CSV report.
    Evaluate(EvaluateArgs),
    /// Print store metadata and per-song frame counts.
    Inspect(InspectArgs),
    /// Write a seeded synthetic corpus of songs and hummed queries.
    #[command(hide = true)]
    SynthCorpus(SynthArgs),
}

#[derive(Debug, Args)]
struct StoreArg {
    /// Feature store directory.
    #[arg(long, env = "QBSH_STORE")]
    store: PathBuf,
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[command(flatten)]
    store: StoreArg,
    /// CSV with columns path,song_id,title[,group]; relative paths are
    /// resolved against the manifest's directory.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// WAV files; the file stem becomes the song id and title.
    files: Vec<PathBuf>,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

/// Extraction settings for a new store.
#[derive(Debug, Args, Default)]
struct ConfigOverrides {
    /// Frame length in samples.
    #[arg(long)]
    frame_len: Option<usize>,
    /// Hop between frames in samples.
    #[arg(long)]
    hop: Option<usize>,
    /// Pre-emphasis coefficient.
    #[arg(long)]
    pre_emphasis: Option<f64>,
    /// Number of mel filters.
    #[arg(long)]
    filters: Option<usize>,
    /// LPC order.
    #[arg(long)]
    lpc_order: Option<usize>,
    /// Number of cepstra from the LPC recursion.
    #[arg(long)]
    lpcc_count: Option<usize>,
    /// Store 39-dimensional MFCC vectors (energy, deltas, double deltas).
    #[arg(long)]
    extended_mfcc: bool,
}

impl ConfigOverrides {
    fn is_empty(&self) -> bool {
        self.frame_len.is_none()
            && self.hop.is_none()
            && self.pre_emphasis.is_none()
            && self.filters.is_none()
            && self.lpc_order.is_none()
            && self.lpcc_count.is_none()
            && !self.extended_mfcc
    }

    fn apply(&self, mut config: FeatureConfig) -> FeatureConfig {
        if let Some(v) = self.frame_len {
            config.frame.frame_len = v;
        }
        if let Some(v) = self.hop {
            config.frame.hop = v;
        }
        if let Some(v) = self.pre_emphasis {
            config.frame.pre_emphasis_alpha = v;
        }
        if let Some(v) = self.filters {
            config.num_filters = v;
        }
        if let Some(v) = self.lpc_order {
            config.lpc_order = v;
        }
        if let Some(v) = self.lpcc_count {
            config.lpcc_count = v;
        }
        config.mfcc_extended |= self.extended_mfcc;
        config
    }
}

#[derive(Debug, Args)]
struct MeasureArgs {
    /// Neighbours that vote in kNN ranking.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Frames both sequences are resampled to for ED and kNN.
    #[arg(long, default_value_t = 100)]
    t_norm: usize,
    /// Sakoe-Chiba band half-width for DTW.
    #[arg(long)]
    band: Option<usize>,
    /// Divide DTW distances by the summed sequence lengths.
    #[arg(long)]
    dtw_normalize: bool,
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[command(flatten)]
    store: StoreArg,
    /// Query recording (WAV).
    query: PathBuf,
    #[arg(long, value_parser = parse_kind, default_value = "MFCC")]
    feature: FeatureKind,
    #[arg(long, value_parser = parse_measure, default_value = "DTW")]
    measure: MeasureKind,
    /// Rows to print.
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[command(flatten)]
    params: MeasureArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Prefix,
    Random,
}

impl From<ModeArg> for ExcerptMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Prefix => ExcerptMode::Prefix,
            ModeArg::Random => ExcerptMode::RandomSegment,
        }
    }
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    store: StoreArg,
    /// CSV with columns path,target_id[,query_id].
    #[arg(
        long,
        required_unless_present = "self_queries",
        conflicts_with = "self_queries"
    )]
    queries: Option<PathBuf>,
    /// Query every stored song with its own features.
    #[arg(long)]
    self_queries: bool,
    #[arg(long, value_parser = parse_kind, value_delimiter = ',', default_value = "MFCC,LPC,LPCC")]
    features: Vec<FeatureKind>,
    #[arg(long, value_parser = parse_measure, value_delimiter = ',', default_value = "ED,KNN,DTW")]
    measures: Vec<MeasureKind>,
    /// Query proportions in percent.
    #[arg(long, value_delimiter = ',', default_value = "60,70,80,90,100")]
    excerpts: Vec<u32>,
    /// Database sizes; defaults to the whole store.
    #[arg(long, value_delimiter = ',')]
    db_sizes: Vec<usize>,
    #[arg(long, value_enum, default_value = "prefix")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path; without it the CSV goes to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    params: MeasureArgs,
}

#[derive(Debug, Args)]
struct InspectArgs {
    #[command(flatten)]
    store: StoreArg,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 20)]
    songs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Song length in seconds.
    #[arg(long, default_value_t = 3.0)]
    duration: f64,
    /// Sample rate of the written files.
    #[arg(long, default_value_t = 8000)]
    rate: u32,
    /// Write songs as stereo mixes with side-panned accompaniment.
    #[arg(long)]
    stereo: bool,
    /// Signal-to-noise ratio of the hummed queries in dB.
    #[arg(long, default_value_t = 20.0)]
    snr: f64,
    /// Maximum relative tempo deviation of the hummed queries.
    #[arg(long, default_value_t = 0.1)]
    tempo: f64,
}

fn parse_kind(s: &str) -> Result<FeatureKind, String> {
    s.parse().map_err(|e: qbsh_core::Error| e.to_string())
}

fn parse_measure(s: &str) -> Result<MeasureKind, String> {
    s.parse().map_err(|e: qbsh_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(Failure::USAGE),
            };
        }
    };
    let outcome = std::panic::catch_unwind(|| match cli.command {
        Command::Ingest(args) => commands::ingest(args),
        Command::Query(args) => commands::query(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Inspect(args) => commands::inspect(args),
        Command::SynthCorpus(args) => commands::synth_corpus(args),
    });
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(failure)) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
        Err(_) => ExitCode::from(Failure::INTERNAL),
    }
}
