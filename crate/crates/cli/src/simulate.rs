use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::Args;
use gossim::engine::{run as run_sim, run_seed, EventTrace, SimulationConfig, TraceFile, TraceWriter};
use gossim::fmt::{sig, sig_or_na};
use gossim::metrics::{sweep as sweep_corpus, sweep_csv, CoverageBase, ReportAccumulator, RunReport};
use gossim::topology::{ttl_rule, CorpusMeta, OverlayGraph};
use serde::Serialize;

use crate::args::{parse_grid, parse_list, BaseArg, SimArgs};
use crate::output::{emit, write_sidecar};
use crate::{corpus, Context};

#[derive(Debug, Args)]
pub struct GraphSource {
    /// Corpus to take the graph from.
    #[arg(long, conflicts_with = "graph_file")]
    pub corpus: Option<String>,

    /// Index of the graph within the corpus.
    #[arg(long, default_value_t = 0)]
    pub graph: usize,

    /// Edge-list file instead of a corpus member.
    #[arg(long)]
    pub graph_file: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum GraphOrigin {
    Corpus { name: String, index: usize, meta: CorpusMeta },
    File { path: PathBuf },
}

impl GraphSource {
    /// The graph, the diameter the default TTL is derived from, and where it
    /// came from.
    fn load(&self, ctx: &Context) -> Result<(OverlayGraph, u32, GraphOrigin)> {
        match (&self.corpus, &self.graph_file) {
            (Some(name), None) => {
                let mut c = corpus::load(ctx, name)?;
                if self.graph >= c.len() {
                    bail!("corpus `{name}` has {} graphs, no index {}", c.len(), self.graph);
                }
                let diameter = c.max_diameter();
                let g = c.graphs.swap_remove(self.graph);
                let origin = GraphOrigin::Corpus {
                    name: name.clone(),
                    index: self.graph,
                    meta: c.meta,
                };
                Ok((g, diameter, origin))
            }
            (None, Some(path)) => {
                let g = corpus::read_graph(path)?;
                let diameter = g.diameter()?;
                Ok((g, diameter, GraphOrigin::File { path: path.clone() }))
            }
            _ => bail!("give either --corpus or --graph-file"),
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: GraphSource,

    #[command(flatten)]
    pub sim: SimArgs,

    /// Protocol parameter: γ, β or α.
    #[arg(long)]
    pub param: f64,

    #[arg(long, default_value_t = 0.0)]
    pub free_riders: f64,

    /// Dump the event trace here (gzip when the name ends in `.gz`).
    #[arg(long)]
    pub trace: Option<PathBuf>,

    /// Report CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct RunRecord<'a> {
    command: &'static str,
    version: &'static str,
    graph: &'a GraphOrigin,
    config: &'a SimulationConfig,
    coverage_base: CoverageBase,
    trace: Option<&'a Path>,
}

pub fn run(ctx: &Context, args: RunArgs) -> Result<()> {
    let (g, diameter, origin) = args.source.load(ctx)?;
    let ttl = args.sim.ttl.unwrap_or_else(|| ttl_rule(diameter));
    let cfg = args.sim.config(args.param, ttl, args.free_riders);
    let base: CoverageBase = args.sim.coverage_base.into();
    let mut acc = ReportAccumulator::new();
    match &args.trace {
        Some(path) => {
            let gz = path.extension().is_some_and(|e| e == "gz");
            let file = TraceFile::create(path, gz).with_context(|| format!("creating {}", path.display()))?;
            let mut sinks = (TraceWriter::new(file), &mut acc);
            run_sim(&g, &cfg, &mut sinks)?;
            sinks.0.finish()?.close()?;
        }
        None => {
            run_sim(&g, &cfg, &mut acc)?;
        }
    }
    let report = acc.finish(g.node_count(), base)?;
    emit(ctx, args.out.as_deref(), &report_csv(&report), &report)?;
    if let Some(out) = &args.out {
        write_sidecar(
            out,
            &RunRecord {
                command: "run",
                version: env!("CARGO_PKG_VERSION"),
                graph: &origin,
                config: &cfg,
                coverage_base: base,
                trace: args.trace.as_deref(),
            },
        )?;
    }
    Ok(())
}

fn report_csv(r: &RunReport) -> String {
    format!(
        "coverage,delay,overhead,messages,delivered,lower_bound\n{},{},{},{},{},{}\n",
        sig(r.coverage, 6),
        sig_or_na(r.mean_delay, 6),
        sig(r.overhead_ratio, 6),
        r.messages,
        r.delivered,
        r.lower_bound
    )
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub corpus: String,

    #[command(flatten)]
    pub sim: SimArgs,

    /// `a,b,c`, `START..STOP:STEP` or `log:START..STOP:COUNT`.
    #[arg(long)]
    pub grid: String,

    #[arg(long, default_value_t = 10)]
    pub reps: usize,

    /// Free-rider fractions; one CSV per fraction.
    #[arg(long)]
    pub free_riders: Option<String>,

    /// Sweep CSV path. With `--free-riders`, each fraction gets
    /// `<stem>-fr<fraction>.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
pub struct SweepRecord<'a> {
    pub command: &'static str,
    pub version: &'static str,
    pub corpus: &'a str,
    pub corpus_meta: &'a CorpusMeta,
    pub config: &'a SimulationConfig,
    pub coverage_base: CoverageBase,
    pub grid: &'a [f64],
    pub repetitions: usize,
    /// `run_seeds[graph][rep]`, shared by every grid value.
    pub run_seeds: Vec<Vec<u64>>,
}

impl SweepRecord<'_> {
    pub fn seeds(base: u64, graphs: usize, reps: usize) -> Vec<Vec<u64>> {
        (0..graphs)
            .map(|k| (0..reps).map(|r| run_seed(base, k, r)).collect())
            .collect()
    }
}

pub fn sweep(ctx: &Context, args: SweepArgs) -> Result<()> {
    let grid = parse_grid(&args.grid)?;
    let fractions = match &args.free_riders {
        Some(s) => parse_list(s)?,
        None => vec![0.0],
    };
    let c = corpus::load(ctx, &args.corpus)?;
    let ttl = args.sim.ttl.unwrap_or_else(|| c.default_ttl());
    let base: CoverageBase = args.sim.coverage_base.into();
    for &fraction in &fractions {
        let cfg = args.sim.config(grid[0], ttl, fraction);
        let points = sweep_corpus(c.graphs(), &cfg, &grid, args.reps, base)?;
        let out = if args.free_riders.is_some() {
            fraction_path(&args.out, fraction)
        } else {
            args.out.clone()
        };
        emit(ctx, Some(&out), &sweep_csv(&points), &points)?;
        write_sidecar(
            &out,
            &SweepRecord {
                command: "sweep",
                version: env!("CARGO_PKG_VERSION"),
                corpus: &args.corpus,
                corpus_meta: &c.meta,
                config: &cfg,
                coverage_base: base,
                grid: &grid,
                repetitions: args.reps,
                run_seeds: SweepRecord::seeds(cfg.seed, c.len(), args.reps),
            },
        )?;
        log::info!("wrote {}", out.display());
    }
    Ok(())
}

fn fraction_path(out: &Path, fraction: f64) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = out.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    out.with_file_name(format!("{stem}-fr{}.{ext}", sig(fraction, 6)))
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Trace file written by `run --trace`.
    #[arg(long)]
    pub trace: PathBuf,

    /// Node count of the simulated graph.
    #[arg(long, required_unless_present_any = ["corpus", "graph_file"])]
    pub nodes: Option<usize>,

    #[command(flatten)]
    pub source: GraphSourceOpt,

    #[arg(long, value_enum, default_value_t = BaseArg::ExcludeOrigin)]
    pub coverage_base: BaseArg,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Optional graph, only used for its node count.
#[derive(Debug, Args)]
pub struct GraphSourceOpt {
    #[arg(long, conflicts_with_all = ["graph_file", "nodes"])]
    pub corpus: Option<String>,

    #[arg(long, conflicts_with = "nodes")]
    pub graph_file: Option<PathBuf>,
}

pub fn analyze(ctx: &Context, args: AnalyzeArgs) -> Result<()> {
    let nodes = match (args.nodes, &args.source.corpus, &args.source.graph_file) {
        (Some(n), _, _) => n,
        (None, Some(name), _) => corpus::load(ctx, name)?.node_count(),
        (None, None, Some(path)) => corpus::read_graph(path)?.node_count(),
        (None, None, None) => bail!("give --nodes, --corpus or --graph-file"),
    };
    let trace = EventTrace::read_file(&args.trace).with_context(|| format!("reading {}", args.trace.display()))?;
    let report = RunReport::from_trace(&trace, nodes, args.coverage_base.into())?;
    emit(ctx, args.out.as_deref(), &report_csv(&report), &report)
}
