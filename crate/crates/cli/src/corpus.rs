use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::{Args, ValueEnum};
use gossim::topology::{build_corpus, Corpus, GeneratorSpec, OverlayGraph};

use crate::Context;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphType {
    /// Erdős–Rényi G(n, M).
    Er,
    /// Barabási–Albert preferential attachment.
    Ba,
    /// Watts–Strogatz small world.
    Ws,
    /// Random k-regular.
    Kregular,
}

#[derive(Debug, Args)]
pub struct GenCorpusArgs {
    #[arg(long = "type", value_enum)]
    pub graph_type: GraphType,

    #[arg(long, default_value_t = 500)]
    pub nodes: usize,

    /// Edge count (er).
    #[arg(long)]
    pub edges: Option<usize>,

    /// Edges added per arriving node (ba).
    #[arg(long)]
    pub m: Option<usize>,

    /// Node degree (kregular).
    #[arg(long)]
    pub k: Option<usize>,

    /// Lattice neighbors on each side (ws).
    #[arg(long)]
    pub neighbors: Option<usize>,

    /// Rewiring probability (ws).
    #[arg(long, default_value_t = 0.1)]
    pub rewire: f64,

    #[arg(long, default_value_t = 10)]
    pub count: usize,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    #[arg(long)]
    pub name: String,

    /// Replace an existing corpus of the same name.
    #[arg(long)]
    pub overwrite: bool,
}

impl GenCorpusArgs {
    fn spec(&self) -> Result<GeneratorSpec> {
        let need = |v: Option<usize>, flag: &str| v.with_context(|| format!("--type {:?} needs {flag}", self.graph_type));
        Ok(match self.graph_type {
            GraphType::Er => GeneratorSpec::ErdosRenyi {
                nodes: self.nodes,
                edges: need(self.edges, "--edges")?,
            },
            GraphType::Ba => GeneratorSpec::BarabasiAlbert {
                nodes: self.nodes,
                edges_per_node: need(self.m, "--m")?,
            },
            GraphType::Ws => GeneratorSpec::WattsStrogatz {
                nodes: self.nodes,
                neighbors_each_side: need(self.neighbors, "--neighbors")?,
                rewire_prob: self.rewire,
            },
            GraphType::Kregular => GeneratorSpec::KRegular {
                nodes: self.nodes,
                k: need(self.k, "--k")?,
            },
        })
    }
}

pub fn gen_corpus(ctx: &Context, args: GenCorpusArgs) -> Result<()> {
    check_name(&args.name)?;
    let spec = args.spec()?;
    let dir = ctx.corpus_root.join(&args.name);
    if dir.exists() && !args.overwrite {
        bail!("corpus `{}` already exists at {} (use --overwrite)", args.name, dir.display());
    }
    let corpus = build_corpus(spec, args.count, args.seed)?;
    corpus.save(&dir, args.overwrite)?;
    println!(
        "corpus {}: {} graphs, max diameter {}, ttl rule {}, at {}",
        args.name,
        corpus.len(),
        corpus.max_diameter(),
        corpus.default_ttl(),
        dir.display()
    );
    Ok(())
}

pub fn corpus_dir(ctx: &Context, name: &str) -> Result<PathBuf> {
    check_name(name)?;
    Ok(ctx.corpus_root.join(name))
}

pub fn load(ctx: &Context, name: &str) -> Result<Corpus> {
    let dir = corpus_dir(ctx, name)?;
    Corpus::load(&dir).with_context(|| format!("loading corpus `{name}` from {}", dir.display()))
}

pub fn read_graph(path: &Path) -> Result<OverlayGraph> {
    let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    OverlayGraph::read_edge_list(std::io::BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
        bail!("invalid corpus name `{name}`");
    }
    Ok(())
}
