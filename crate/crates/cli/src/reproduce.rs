//! Named recipes that rebuild an "overhead (and delay) for a given coverage"
//! table: corpus, pinned TTL, four protocol sweeps, table extraction.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use gossim::engine::SimulationConfig;
use gossim::fmt::{sig, sig_or_na};
use gossim::metrics::{overhead_for_coverage, refine_grid, sweep, sweep_csv, CoverageBase, SweepPoint, TableRow, FULL_COVERAGE};
use gossim::protocol::ProtocolConfig;
use gossim::topology::{build_corpus, Corpus, CorpusMeta, GeneratorSpec};
use gossim::Error;
use serde::Serialize;

use crate::args::{parse_grid, parse_list, ProtocolKind};
use crate::output::{emit, write_sidecar};
use crate::simulate::SweepRecord;
use crate::{corpus, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Recipe {
    #[value(name = "random-1000")]
    Random1000,
    #[value(name = "random-1500")]
    Random1500,
    #[value(name = "random-2000")]
    Random2000,
    #[value(name = "scalefree-997")]
    Scalefree997,
    #[value(name = "scalefree-1494")]
    Scalefree1494,
    #[value(name = "scalefree-1990")]
    Scalefree1990,
    #[value(name = "smallworld-1000")]
    Smallworld1000,
    #[value(name = "smallworld-1500")]
    Smallworld1500,
    #[value(name = "smallworld-2000")]
    Smallworld2000,
    #[value(name = "kregular-1000")]
    Kregular1000,
    #[value(name = "kregular-1500")]
    Kregular1500,
    #[value(name = "kregular-2000")]
    Kregular2000,
    /// FP on random-1000 with caches 16, 64, 256 and 512.
    #[value(name = "cache-study")]
    CacheStudy,
    /// FP on random-1000 with TTL 13, 16 and 20.
    #[value(name = "ttl-study")]
    TtlStudy,
}

impl Recipe {
    fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }

    /// Corpus name, generator and TTL.
    fn setup(self) -> (&'static str, GeneratorSpec, u32) {
        use GeneratorSpec::*;
        const N: usize = 500;
        let ws = |k| WattsStrogatz {
            nodes: N,
            neighbors_each_side: k,
            rewire_prob: 0.1,
        };
        match self {
            Recipe::Random1000 | Recipe::CacheStudy | Recipe::TtlStudy => {
                ("random-1000", ErdosRenyi { nodes: N, edges: 1000 }, 16)
            }
            Recipe::Random1500 => ("random-1500", ErdosRenyi { nodes: N, edges: 1500 }, 10),
            Recipe::Random2000 => ("random-2000", ErdosRenyi { nodes: N, edges: 2000 }, 8),
            Recipe::Scalefree997 => ("scalefree-997", BarabasiAlbert { nodes: N, edges_per_node: 2 }, 10),
            Recipe::Scalefree1494 => ("scalefree-1494", BarabasiAlbert { nodes: N, edges_per_node: 3 }, 7),
            Recipe::Scalefree1990 => ("scalefree-1990", BarabasiAlbert { nodes: N, edges_per_node: 4 }, 6),
            Recipe::Smallworld1000 => ("smallworld-1000", ws(2), 17),
            Recipe::Smallworld1500 => ("smallworld-1500", ws(3), 12),
            Recipe::Smallworld2000 => ("smallworld-2000", ws(4), 10),
            Recipe::Kregular1000 => ("kregular-1000", KRegular { nodes: N, k: 4 }, 11),
            Recipe::Kregular1500 => ("kregular-1500", KRegular { nodes: N, k: 6 }, 8),
            Recipe::Kregular2000 => ("kregular-2000", KRegular { nodes: N, k: 8 }, 7),
        }
    }

    /// `(label, protocol, cache, ttl)` of every sweep.
    fn sweeps(self, protocols: &[ProtocolKind]) -> Vec<(String, ProtocolKind, usize, u32)> {
        let ttl = self.setup().2;
        match self {
            Recipe::CacheStudy => [16, 64, 256, 512]
                .into_iter()
                .map(|c| (format!("FP/cache{c}"), ProtocolKind::Fp, c, ttl))
                .collect(),
            Recipe::TtlStudy => [13, 16, 20]
                .into_iter()
                .map(|t| (format!("FP/ttl{t}"), ProtocolKind::Fp, 256, t))
                .collect(),
            _ => protocols
                .iter()
                .map(|&p| (p.variant(0.0).name().to_string(), p, 256, ttl))
                .collect(),
        }
    }
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub recipe: Recipe,

    /// Output directory for the sweep CSVs and the table.
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, default_value_t = 10)]
    pub graphs: usize,

    #[arg(long, default_value_t = 10)]
    pub reps: usize,

    /// Seed of the corpus and of every run.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    #[arg(long, value_delimiter = ',', default_value = "fp,pb,ddf1,ddf2")]
    pub protocols: Vec<ProtocolKind>,

    /// Grid of γ and β.
    #[arg(long, default_value = "0.01..1:0.01")]
    pub prob_grid: String,

    /// Coarse grid of α, refined once around the cheapest full-coverage point.
    #[arg(long, default_value = "log:0.01..10:16")]
    pub alpha_grid: String,

    /// Points added by the refinement; 0 disables it.
    #[arg(long, default_value_t = 6)]
    pub refine: usize,

    /// Comma-separated coverage targets, the first one anchoring the α
    /// refinement. Defaults to 0.9995, 0.99, 0.9 and 0.75.
    #[arg(long)]
    pub targets: Option<String>,

    /// Skip grid points whose runs pass this overhead.
    #[arg(long)]
    pub max_overhead: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Row {
    #[serde(flatten)]
    row: TableRow,
    vs_best: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    label: String,
    file: String,
    grid: Vec<f64>,
    /// Grid values dropped because a run passed the overhead cap.
    capped: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct ReproduceRecord<'a> {
    command: &'static str,
    version: &'static str,
    recipe: String,
    corpus: &'a str,
    corpus_meta: &'a CorpusMeta,
    repetitions: usize,
    targets: &'a [f64],
    refine: usize,
    sweeps: &'a [SweepSummary],
}

pub fn reproduce(ctx: &Context, args: ReproduceArgs) -> Result<()> {
    let (name, spec, _) = args.recipe.setup();
    let prob_grid = parse_grid(&args.prob_grid)?;
    let alpha_grid = parse_grid(&args.alpha_grid)?;
    let targets = match &args.targets {
        Some(s) => parse_list(s)?,
        None => vec![FULL_COVERAGE, 0.99, 0.9, 0.75],
    };
    let c = corpus_for(ctx, name, spec, args.graphs, args.seed)?;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (label, protocol, cache, ttl) in args.recipe.sweeps(&args.protocols) {
        let mut base = SimulationConfig::new(ProtocolConfig::new(protocol.variant(1.0), ttl));
        base.cache_capacity = cache;
        base.seed = args.seed;
        base.max_overhead = args.max_overhead;
        let degree_dependent = matches!(protocol, ProtocolKind::Ddf1 | ProtocolKind::Ddf2);
        let grid = if degree_dependent { &alpha_grid } else { &prob_grid };
        log::info!("{label}: {} grid points on {} graphs", grid.len(), c.len());
        let (mut points, mut capped) = capped_sweep(&c, &base, grid, args.reps)?;
        let mut full_grid = grid.clone();
        if degree_dependent && args.refine > 0 {
            if let Some(best) = overhead_for_coverage(&points, targets[0]) {
                let refined = refine_grid(grid, best.param, args.refine);
                let extra: Vec<f64> = refined.iter().copied().filter(|x| !grid.contains(x)).collect();
                if !extra.is_empty() {
                    let (more, more_capped) = capped_sweep(&c, &base, &extra, args.reps)?;
                    points.extend(more);
                    points.sort_by(|a, b| a.param.total_cmp(&b.param));
                    capped.extend(more_capped);
                }
                full_grid = refined;
            }
        }
        let file = format!("{}.csv", label.to_lowercase().replace('/', "-"));
        let out = args.out.join(&file);
        emit(ctx, Some(&out), &sweep_csv(&points), &points)?;
        write_sidecar(
            &out,
            &SweepRecord {
                command: "reproduce",
                version: env!("CARGO_PKG_VERSION"),
                corpus: name,
                corpus_meta: &c.meta,
                config: &base,
                coverage_base: CoverageBase::ExcludeOrigin,
                grid: &full_grid,
                repetitions: args.reps,
                run_seeds: SweepRecord::seeds(base.seed, c.len(), args.reps),
            },
        )?;
        for &t in &targets {
            rows.push(TableRow::from_points(&label, t, &points));
        }
        summaries.push(SweepSummary {
            label,
            file,
            grid: full_grid,
            capped,
        });
    }
    let rows = with_vs_best(rows);
    let out = args.out.join("table.csv");
    emit(ctx, Some(&out), &table_with_vs_best(&rows), &rows)?;
    write_sidecar(
        &out,
        &ReproduceRecord {
            command: "reproduce",
            version: env!("CARGO_PKG_VERSION"),
            recipe: args.recipe.name(),
            corpus: name,
            corpus_meta: &c.meta,
            repetitions: args.reps,
            targets: &targets,
            refine: args.refine,
            sweeps: &summaries,
        },
    )?;
    if !ctx.json {
        print!("{}", table_with_vs_best(&rows));
    }
    Ok(())
}

/// Load the recipe corpus, or build and store it when absent. An existing
/// corpus with another generator or seed is an error.
fn corpus_for(ctx: &Context, name: &str, spec: GeneratorSpec, graphs: usize, seed: u64) -> Result<Corpus> {
    let dir = corpus::corpus_dir(ctx, name)?;
    if dir.exists() {
        let mut c = corpus::load(ctx, name)?;
        if c.meta.spec != spec || c.meta.base_seed != seed || c.len() < graphs {
            bail!(
                "corpus `{name}` at {} was built differently ({:?}, seed {}, {} graphs); \
                 remove it or pick another --corpus-root",
                dir.display(),
                c.meta.spec,
                c.meta.base_seed,
                c.len()
            );
        }
        c.graphs.truncate(graphs);
        c.meta.members.truncate(graphs);
        c.meta.count = graphs;
        c.meta.max_diameter = c.meta.members.iter().map(|m| m.diameter).max().unwrap_or(0);
        return Ok(c);
    }
    let c = build_corpus(spec, graphs, seed)?;
    c.save(&dir, false)?;
    Ok(c)
}

/// Sweep one grid value at a time so that a point whose runs pass the
/// overhead cap is dropped instead of failing the whole sweep.
fn capped_sweep(c: &Corpus, base: &SimulationConfig, grid: &[f64], reps: usize) -> Result<(Vec<SweepPoint>, Vec<f64>)> {
    if base.max_overhead.is_none() {
        return Ok((sweep(c.graphs(), base, grid, reps, CoverageBase::ExcludeOrigin)?, Vec::new()));
    }
    let mut points = Vec::new();
    let mut capped = Vec::new();
    for &x in grid {
        match sweep(c.graphs(), base, &[x], reps, CoverageBase::ExcludeOrigin) {
            Ok(p) => points.extend(p),
            Err(Error::RunFailed { source, .. }) if matches!(*source, Error::OverheadExceeded { .. }) => {
                log::warn!("{} at {x}: {source}", base.protocol.variant.name());
                capped.push(x);
            }
            Err(e) => return Err(e.into()),
        }
    }
    points.sort_by(|a, b| a.param.total_cmp(&b.param));
    Ok((points, capped))
}

/// Relative excess over the cheapest protocol at the same target.
fn with_vs_best(rows: Vec<TableRow>) -> Vec<Row> {
    let best = |t: f64| {
        rows.iter()
            .filter(|r| r.target_coverage == t)
            .filter_map(|r| r.overhead)
            .min_by(f64::total_cmp)
    };
    rows.iter()
        .map(|r| Row {
            row: r.clone(),
            vs_best: match (r.overhead, best(r.target_coverage)) {
                (Some(o), Some(b)) if b > 0.0 => Some((o - b) / b),
                _ => None,
            },
        })
        .collect()
}

fn table_with_vs_best(rows: &[Row]) -> String {
    let mut out = String::from("protocol,target_coverage,overhead,delay,vs_best\n");
    for r in rows {
        let vs = match r.vs_best {
            Some(0.0) => "best".to_string(),
            Some(v) => format!("+{:.2}%", 100.0 * v),
            None => "NA".to_string(),
        };
        out.push_str(&format!(
            "{},{},{},{},{vs}\n",
            r.row.protocol,
            sig(r.row.target_coverage, 6),
            sig_or_na(r.row.overhead, 6),
            sig_or_na(r.row.delay, 6)
        ));
    }
    out
}
