use std::path::PathBuf;

use anyhow::{bail, Context as _, Result};
use clap::{Args, ValueEnum};
use gossim::fmt::sig;
use gossim::theory::{
    curve_csv, excess_view, expected_receivers, fp_threshold, percolation_margin, solve_alpha, threshold_curve,
    CurveFamily, DdfFamily, DistributionFamily, Receivers, Scheme,
};
use gossim::topology::DegreeDistribution;
use gossim::Error;
use serde::Serialize;

use crate::args::ProtocolKind;
use crate::output::emit;
use crate::{corpus, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveDist {
    Poisson,
    Kregular,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// `poisson:<mean>`, `kregular:<k>` or `corpus:<name>` (pooled empirical).
    #[arg(long, required_unless_present = "curve")]
    pub dist: Option<String>,

    #[arg(long, value_enum, default_value_t = ProtocolKind::Fp)]
    pub protocol: ProtocolKind,

    /// Evaluate margin and expected receivers at this γ, β or α.
    #[arg(long)]
    pub param: Option<f64>,

    /// Solve for the α at the phase transition (ddf1, ddf2).
    #[arg(long)]
    pub solve_alpha: bool,

    /// Emit the threshold over a range of mean degrees instead (fp or ddf1).
    #[arg(long, value_enum, conflicts_with = "dist")]
    pub curve: Option<CurveDist>,

    #[arg(long, default_value_t = 2.0)]
    pub from: f64,

    #[arg(long, default_value_t = 20.0)]
    pub to: f64,

    #[arg(long, default_value_t = 1.0)]
    pub step: f64,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct ThresholdRow {
    dist: String,
    protocol: &'static str,
    mean_degree: f64,
    mean_excess: f64,
    status: &'static str,
    threshold: Option<f64>,
    param: Option<f64>,
    margin: Option<f64>,
    /// `None` with a parameter set means divergent.
    receivers: Option<f64>,
}

pub fn threshold(ctx: &Context, args: ThresholdArgs) -> Result<()> {
    if let Some(family) = args.curve {
        return curve(ctx, &args, family);
    }
    let spec = args.dist.as_deref().expect("clap requires --dist without --curve");
    let d = distribution(ctx, spec)?;
    let mean_excess = excess_view(&d)?.mean_excess();
    let name = args.protocol.variant(0.0).name();

    let mut status = "percolates";
    let threshold = match args.protocol {
        ProtocolKind::Fp => none_if_subcritical(fp_threshold(&d), &mut status)?,
        ProtocolKind::Pb => {
            let full = percolation_margin(&d, &Scheme::Broadcast(1.0))?;
            if full > 1.0 {
                Some(1.0 / full)
            } else {
                status = "no percolation";
                None
            }
        }
        ProtocolKind::Ddf1 | ProtocolKind::Ddf2 if args.solve_alpha => {
            if mean_excess <= 1.0 {
                status = "no percolation";
                None
            } else {
                match solve_alpha(&d, family(args.protocol)) {
                    Ok(a) => Some(a),
                    Err(Error::NoCrossing { .. }) => {
                        status = "no crossing";
                        None
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
        _ => {
            if mean_excess <= 1.0 {
                status = "no percolation";
            }
            None
        }
    };

    let (margin, receivers) = match args.param {
        Some(x) => {
            let scheme = match args.protocol {
                ProtocolKind::Fp => Scheme::Fixed(x),
                ProtocolKind::Pb => Scheme::Broadcast(x),
                p => Scheme::DegreeDependent(family(p).function(x)),
            };
            let receivers = match expected_receivers(&d, &scheme)? {
                Receivers::Finite(r) => Some(r),
                Receivers::Divergent => None,
            };
            (Some(percolation_margin(&d, &scheme)?), receivers)
        }
        None => (None, None),
    };

    let row = ThresholdRow {
        dist: spec.to_string(),
        protocol: name,
        mean_degree: d.mean_degree(),
        mean_excess,
        status,
        threshold,
        param: args.param,
        margin,
        receivers,
    };
    let opt = |v: Option<f64>| v.map_or("NA".to_string(), |v| sig(v, 6));
    let receivers = match (row.param, row.receivers) {
        (Some(_), None) => "inf".to_string(),
        (_, r) => opt(r),
    };
    let csv = format!(
        "dist,protocol,mean_degree,mean_excess,status,threshold,param,margin,receivers\n{},{},{},{},{},{},{},{},{}\n",
        row.dist,
        row.protocol,
        sig(row.mean_degree, 6),
        sig(row.mean_excess, 6),
        row.status,
        opt(row.threshold),
        opt(row.param),
        opt(row.margin),
        receivers
    );
    emit(ctx, args.out.as_deref(), &csv, &row)
}

fn none_if_subcritical(r: gossim::Result<f64>, status: &mut &'static str) -> Result<Option<f64>> {
    match r {
        Ok(t) => Ok(Some(t)),
        Err(Error::NoPercolation { .. }) => {
            *status = "no percolation";
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn family(p: ProtocolKind) -> DdfFamily {
    match p {
        ProtocolKind::Ddf2 => DdfFamily::Ddf2,
        _ => DdfFamily::Ddf1,
    }
}

#[derive(Debug, Serialize)]
struct CurveRow {
    x: f64,
    threshold: Option<f64>,
}

fn curve(ctx: &Context, args: &ThresholdArgs, dist: CurveDist) -> Result<()> {
    let family = match args.protocol {
        ProtocolKind::Fp => CurveFamily::Fixed,
        ProtocolKind::Ddf1 => CurveFamily::Ddf1,
        p => bail!("curve mode supports fp and ddf1, not {p:?}"),
    };
    let dist = match dist {
        CurveDist::Poisson => DistributionFamily::Poisson,
        CurveDist::Kregular => DistributionFamily::KRegular,
    };
    if args.step.is_nan() || args.step <= 0.0 || args.to < args.from {
        bail!("curve needs --from <= --to and a positive --step");
    }
    let n = ((args.to - args.from) / args.step + 1e-9).floor() as usize;
    let xs: Vec<f64> = (0..=n).map(|i| args.from + args.step * i as f64).collect();
    let points = threshold_curve(family, dist, &xs);
    let rows: Vec<CurveRow> = points
        .iter()
        .map(|p| CurveRow {
            x: p.x,
            threshold: p.threshold.as_ref().ok().copied(),
        })
        .collect();
    emit(ctx, args.out.as_deref(), &curve_csv(&points), &rows)
}

fn distribution(ctx: &Context, spec: &str) -> Result<DegreeDistribution> {
    let (kind, value) = spec
        .split_once(':')
        .with_context(|| format!("distribution `{spec}` is not `kind:value`"))?;
    Ok(match kind {
        "poisson" => DegreeDistribution::poisson(value.parse().with_context(|| format!("bad mean `{value}`"))?)?,
        "kregular" => DegreeDistribution::regular(value.parse().with_context(|| format!("bad degree `{value}`"))?),
        "corpus" => pooled(&corpus::load(ctx, value)?.graphs)?,
        _ => bail!("unknown distribution `{kind}` (poisson, kregular, corpus)"),
    })
}

/// Node-weighted degree distribution over every graph of a corpus.
fn pooled(graphs: &[gossim::topology::OverlayGraph]) -> Result<DegreeDistribution> {
    let mut counts: Vec<f64> = Vec::new();
    let mut total = 0.0;
    for g in graphs {
        for k in g.degrees() {
            if k >= counts.len() {
                counts.resize(k + 1, 0.0);
            }
            counts[k] += 1.0;
            total += 1.0;
        }
    }
    Ok(DegreeDistribution::new(counts.into_iter().map(|c| c / total).collect())?)
}
