//! `gossim` command-line front-end.

mod args;
mod corpus;
mod output;
mod reproduce;
mod simulate;
mod threshold;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "gossim", version, about = "Push-gossip dissemination simulator")]
struct Cli {
    /// Directory holding named corpora.
    #[arg(long, global = true, env = "GOSSIM_CORPUS_ROOT", default_value = "corpus")]
    corpus_root: PathBuf,

    /// Worker threads for whole-run parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Mirror every CSV as JSON.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a named corpus of connected graphs.
    GenCorpus(corpus::GenCorpusArgs),
    /// Simulate one run on one graph.
    Run(simulate::RunArgs),
    /// Sweep a protocol parameter over a corpus.
    Sweep(simulate::SweepArgs),
    /// Phase-transition thresholds from degree distributions.
    Threshold(threshold::ThresholdArgs),
    /// Rebuild an overhead-for-coverage table from a named recipe.
    Reproduce(reproduce::ReproduceArgs),
    /// Recompute run metrics from a dumped trace.
    Analyze(simulate::AnalyzeArgs),
}

pub struct Context {
    pub corpus_root: PathBuf,
    pub json: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let ctx = Context {
        corpus_root: cli.corpus_root,
        json: cli.json,
    };
    let result = match cli.command {
        Command::GenCorpus(a) => corpus::gen_corpus(&ctx, a),
        Command::Run(a) => simulate::run(&ctx, a),
        Command::Sweep(a) => simulate::sweep(&ctx, a),
        Command::Threshold(a) => threshold::threshold(&ctx, a),
        Command::Reproduce(a) => reproduce::reproduce(&ctx, a),
        Command::Analyze(a) => simulate::analyze(&ctx, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
