// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod manifest;

use commands::Failure;

#[derive(Parser, Debug)]
#[command(name = "lexicorp", version, about = "Build and analyse document-frequency dictionaries from abstract corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ConfigArg {
    /// Directory with prefixes.txt, substitutions.tsv, stopwords.txt, headings.txt.
    /// Falls back to $LEXICORP_CONFIG_DIR, then to the built-in tables.
    #[arg(long, value_name = "DIR")]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct LengthArgs {
    /// Minimum abstract length in words (inclusive).
    #[arg(long, default_value_t = lexicorp::ingest::DEFAULT_MIN_LEN)]
    pub min_len: usize,
    /// Maximum abstract length in words (inclusive).
    #[arg(long, default_value_t = lexicorp::ingest::DEFAULT_MAX_LEN)]
    pub max_len: usize,
}

#[derive(Args, Debug, Clone)]
pub struct FitArgs {
    /// Restrict the power-law fit to document counts in `a:b`.
    #[arg(long, value_name = "A:B", value_parser = commands::parse_range)]
    pub range: Option<(f64, f64)>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse, clean and length-filter a tab-delimited export into a corpus file.
    Ingest {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        lengths: LengthArgs,
    },
    /// Run the text pipeline over a corpus and write the document-frequency dictionary.
    Build {
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Drop words found in at most `threshold` documents.
    Prune {
        dict: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = lexicorp::dictionary::DEFAULT_PRUNE_THRESHOLD)]
        threshold: u64,
    },
    /// Histogram, cumulative and tail curves plus a power-law fit.
    Stats {
        dict: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Compare a dictionary with a `headword,sfi[,u,d]` word list.
    Compare {
        dict: PathBuf,
        wordlist: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Interval widths, comma separated (default 5, 10, ... and the number of common words).
        #[arg(long, value_delimiter = ',')]
        widths: Option<Vec<usize>>,
        /// Sizes for the top-n and bottom-n overlaps.
        #[arg(long, value_delimiter = ',', default_values_t = [10usize, 20, 50, 100, 200])]
        tops: Vec<usize>,
        /// Dictionary fragment sizes for coverage (default 1000, 5000, ..., 80000 and the dictionary size).
        #[arg(long, value_delimiter = ',')]
        fragments: Option<Vec<usize>>,
        /// Word-list prefix sizes for last positions (default 100, ..., 800 and the number of common words).
        #[arg(long, value_delimiter = ',')]
        last: Option<Vec<usize>>,
    },
    /// Generate a synthetic corpus with Zipf-distributed pseudo-words.
    Gen {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        docs: u64,
        #[arg(long, default_value_t = 20_000, value_parser = clap::value_parser!(u64).range(1..))]
        vocab: u64,
        #[arg(long, default_value_t = 1.0)]
        exponent: f64,
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        doc_len: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Write the built-in (or configured) tables as editable files.
    DumpConfig {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// ingest -> build -> prune -> stats in one run.
    Pipeline {
        input: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        lengths: LengthArgs,
        #[arg(long, default_value_t = lexicorp::dictionary::DEFAULT_PRUNE_THRESHOLD)]
        threshold: u64,
        #[command(flatten)]
        fit: FitArgs,
        /// Report documents with fewer distinct core-dictionary words than this.
        #[arg(long, default_value_t = 3)]
        min_unique: usize,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Ingest { input, out, config, lengths } => commands::ingest(&input, &out, &config, &lengths),
        Command::Build { corpus, out, config } => commands::build(&corpus, &out, &config),
        Command::Prune { dict, out, threshold } => commands::prune(&dict, &out, threshold),
        Command::Stats { dict, out, fit } => commands::stats(&dict, &out, &fit),
        Command::Compare { dict, wordlist, out, widths, tops, fragments, last } => {
            if widths.as_ref().is_some_and(|w| w.contains(&0)) {
                return Err(Failure::Usage("--widths values must be at least 1".into()));
            }
            let opts = lexicorp::compare::CompareOptions {
                widths,
                tops,
                fragments,
                last_positions: last,
            };
            commands::compare(&dict, &wordlist, &out, opts)
        }
        Command::Gen { out, docs, vocab, exponent, doc_len, seed } => {
            if !(exponent > 0.0) {
                return Err(Failure::Usage(format!("--exponent must be positive, got {exponent}")));
            }
            let spec = lexicorp::stats::SyntheticSpec {
                vocab_size: vocab as usize,
                n_docs: docs as usize,
                exponent,
                seed,
                doc_len: doc_len as usize,
            };
            commands::gen(&out, &spec)
        }
        Command::DumpConfig { out, config } => commands::dump_config(&out, &config),
        Command::Pipeline { input, out, config, lengths, threshold, fit, min_unique } => {
            commands::pipeline(&input, &out, &config, &lengths, threshold, &fit, min_unique)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
