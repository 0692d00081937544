//! Command-line front end for the news graph pipeline.
//!
//! Exit status: 0 on success, 2 for unreadable or invalid input (including
//! bad flags and config values), 3 when training or evaluation produces a
//! non-finite value.

mod commands;
mod config;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use newsgraph::GcnError;

use config::Layer;

#[derive(Parser, Debug)]
#[command(
    name = "newsgraph",
    version,
    about = "Clause extraction, knowledge-base graphs and GCN document classification"
)]
pub struct Cli {
    /// TOML file supplying defaults for any flag (flags still win).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads for per-document work.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Extract clause frames from a CoNLL-U file.
    Extract {
        input: PathBuf,
        /// Emit one JSON frame record per line (the default).
        #[arg(long, conflicts_with = "tuples")]
        frames: bool,
        /// Emit tab-separated `doc, Arg1, Pred, Arg2` rows read off each document's graph.
        #[arg(long)]
        tuples: bool,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[command(flatten)]
        extract: ExtractFlags,
    },
    /// Build one knowledge-base graph file per document.
    Graph {
        input: PathBuf,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        #[command(flatten)]
        extract: ExtractFlags,
    },
    /// Pool token embeddings onto the nodes of one graph.
    Pool {
        #[arg(long, value_name = "FILE")]
        kb: PathBuf,
        #[arg(long, value_name = "FILE")]
        emb: PathBuf,
        #[arg(long, value_name = "FILE")]
        offsets: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Feature policy for DUMMY nodes: zero or learned-constant.
        #[arg(long, value_name = "POLICY")]
        dummy: Option<String>,
    },
    /// Train a classifier on labelled graphs and their pooled features.
    Train {
        #[arg(long, value_name = "DIR")]
        graphs: PathBuf,
        /// Directory holding `<stem>.emb` for every `<stem>.json` graph.
        #[arg(long, value_name = "DIR")]
        features: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Per-epoch loss and accuracy as CSV.
        #[arg(long, value_name = "FILE")]
        log: Option<PathBuf>,
        #[command(flatten)]
        model: ModelFlags,
    },
    /// Score a checkpoint on labelled graphs.
    Eval {
        #[arg(long, value_name = "DIR")]
        graphs: PathBuf,
        #[arg(long, value_name = "DIR")]
        features: PathBuf,
        #[arg(long, value_name = "FILE")]
        checkpoint: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "N")]
        batch_size: Option<usize>,
    },
    /// Summarise a directory of graph files.
    Stats { dir: PathBuf },
}

#[derive(Args, Debug, Default)]
pub struct ExtractFlags {
    /// Tag scheme: spacy, ud, or a JSON mapping file.
    #[arg(long, value_name = "NAME|FILE")]
    scheme: Option<String>,
    /// Map unknown labels to OTHER instead of failing.
    #[arg(long)]
    lenient: bool,
    /// Newline-separated lemmas treated as linking verbs.
    #[arg(long, value_name = "FILE")]
    linking_lexicon: Option<PathBuf>,
    /// Use NER= spans from the MISC column to adjust subject chunks.
    #[arg(long)]
    ner_from_misc: bool,
}

#[derive(Args, Debug, Default)]
pub struct ModelFlags {
    #[arg(long, value_name = "N")]
    hidden: Option<usize>,
    #[arg(long, value_name = "N")]
    layers: Option<usize>,
    #[arg(long, value_name = "RATE")]
    lr: Option<f64>,
    #[arg(long, value_name = "N")]
    batch_size: Option<usize>,
    #[arg(long, value_name = "N")]
    epochs: Option<usize>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

impl ExtractFlags {
    fn layer(&self) -> Layer {
        Layer {
            scheme: self.scheme.clone(),
            linking_lexicon: self.linking_lexicon.clone(),
            lenient: self.lenient.then_some(true),
            ner_from_misc: self.ner_from_misc.then_some(true),
            ..Layer::default()
        }
    }
}

impl ModelFlags {
    fn layer(&self) -> Layer {
        Layer {
            hidden: self.hidden,
            layers: self.layers,
            lr: self.lr,
            batch_size: self.batch_size,
            epochs: self.epochs,
            seed: self.seed,
            ..Layer::default()
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let non_finite = err
        .chain()
        .any(|e| matches!(e.downcast_ref::<GcnError>(), Some(GcnError::NonFinite(_))));
    if non_finite {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("newsgraph: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
