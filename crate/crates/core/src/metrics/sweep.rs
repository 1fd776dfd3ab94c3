use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CoverageBase, ReportAccumulator, RunReport};
use crate::engine::{run, run_seed, SimulationConfig};
use crate::error::{Error, Result};
use crate::fmt::{sig, sig_or_na};
use crate::topology::OverlayGraph;

/// Mean coverage that counts as complete: it displays as 100.0%.
pub const FULL_COVERAGE: f64 = 0.9995;

/// Aggregate of all runs (graphs × repetitions) at one parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param: f64,
    pub coverage: f64,
    /// Mean over the runs whose delay is defined.
    pub delay: Option<f64>,
    pub overhead: f64,
    /// Sample standard deviation across runs; 0 for a single run.
    pub stdev_coverage: f64,
    pub runs: usize,
}

impl SweepPoint {
    pub fn aggregate(param: f64, reports: &[RunReport]) -> Self {
        assert!(!reports.is_empty(), "a point needs at least one run");
        let n = reports.len() as f64;
        let coverage = reports.iter().map(|r| r.coverage).sum::<f64>() / n;
        let overhead = reports.iter().map(|r| r.overhead_ratio).sum::<f64>() / n;
        let delays: Vec<f64> = reports.iter().filter_map(|r| r.mean_delay).collect();
        let delay = (!delays.is_empty()).then(|| delays.iter().sum::<f64>() / delays.len() as f64);
        let stdev_coverage = if reports.len() > 1 {
            let ss: f64 = reports.iter().map(|r| (r.coverage - coverage).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        SweepPoint {
            param,
            coverage,
            delay,
            overhead,
            stdev_coverage,
            runs: reports.len(),
        }
    }
}

/// Run every grid value on every graph `repetitions` times and return the
/// reports grouped by grid value, in ascending parameter order. Repetition
/// `r` on graph `k` uses the seed [`run_seed`]`(base.seed, k, r)` whatever
/// the grid value.
pub fn sweep_runs(
    graphs: &[OverlayGraph],
    base: &SimulationConfig,
    grid: &[f64],
    repetitions: usize,
    coverage_base: CoverageBase,
) -> Result<Vec<(f64, Vec<RunReport>)>> {
    if grid.is_empty() {
        return Err(Error::param("empty parameter grid"));
    }
    if repetitions == 0 || graphs.is_empty() {
        return Err(Error::param("a sweep needs at least one graph and one repetition"));
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    for &x in &grid {
        base.protocol.variant.with_parameter(x).validate()?;
    }
    base.validate()?;
    let per_point = graphs.len() * repetitions;
    let tasks: Vec<(usize, usize, usize)> = (0..grid.len())
        .flat_map(|p| (0..graphs.len()).flat_map(move |k| (0..repetitions).map(move |r| (p, k, r))))
        .collect();
    let reports = tasks
        .par_iter()
        .map(|&(p, k, r)| {
            let mut cfg = *base;
            cfg.protocol.variant = base.protocol.variant.with_parameter(grid[p]);
            cfg.seed = run_seed(base.seed, k, r);
            let mut acc = ReportAccumulator::new();
            run(&graphs[k], &cfg, &mut acc)
                .and_then(|_| acc.finish(graphs[k].node_count(), coverage_base))
                .map_err(|e| Error::RunFailed {
                    graph: k,
                    seed: cfg.seed,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(grid
        .iter()
        .zip(reports.chunks(per_point))
        .map(|(&x, c)| (x, c.to_vec()))
        .collect())
}

/// [`sweep_runs`] reduced to one [`SweepPoint`] per grid value.
pub fn sweep(
    graphs: &[OverlayGraph],
    base: &SimulationConfig,
    grid: &[f64],
    repetitions: usize,
    coverage_base: CoverageBase,
) -> Result<Vec<SweepPoint>> {
    Ok(sweep_runs(graphs, base, grid, repetitions, coverage_base)?
        .iter()
        .map(|(x, reports)| SweepPoint::aggregate(*x, reports))
        .collect())
}

/// The cheapest point reaching `target` mean coverage; the lowest parameter
/// wins ties.
pub fn overhead_for_coverage(points: &[SweepPoint], target: f64) -> Option<&SweepPoint> {
    points
        .iter()
        .filter(|p| p.coverage >= target)
        .fold(None, |best: Option<&SweepPoint>, p| match best {
            Some(b) if b.overhead <= p.overhead => Some(b),
            _ => Some(p),
        })
}

/// `count` log-spaced values between the coarse neighbors of `best`, both
/// excluded, merged into `coarse`.
pub fn refine_grid(coarse: &[f64], best: f64, count: usize) -> Vec<f64> {
    let mut sorted = coarse.to_vec();
    sorted.sort_by(f64::total_cmp);
    let i = sorted.partition_point(|&x| x < best);
    let lo = sorted[..i].last().copied().unwrap_or(best);
    let hi = sorted.iter().copied().find(|&x| x > best).unwrap_or(best);
    let mut out = sorted.clone();
    if lo < hi && lo > 0.0 {
        let (a, b) = (lo.ln(), hi.ln());
        out.extend((1..=count).map(|j| (a + (b - a) * j as f64 / (count + 1) as f64).exp()));
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("param,coverage,delay,overhead,stdev_coverage,runs\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            sig(p.param, 6),
            sig(p.coverage, 6),
            sig_or_na(p.delay, 6),
            sig(p.overhead, 6),
            sig(p.stdev_coverage, 6),
            p.runs
        ));
    }
    out
}

/// One line of an "overhead (and delay) for a given coverage" table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub protocol: String,
    pub target_coverage: f64,
    /// `None` when no swept point reaches the target.
    pub overhead: Option<f64>,
    pub delay: Option<f64>,
    /// Parameter of the selected point.
    pub param: Option<f64>,
}

impl TableRow {
    pub fn from_points(protocol: &str, target: f64, points: &[SweepPoint]) -> Self {
        let best = overhead_for_coverage(points, target);
        TableRow {
            protocol: protocol.to_string(),
            target_coverage: target,
            overhead: best.map(|p| p.overhead),
            delay: best.and_then(|p| p.delay),
            param: best.map(|p| p.param),
        }
    }
}

pub fn table_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("protocol,target_coverage,overhead,delay\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.protocol,
            sig(r.target_coverage, 6),
            sig_or_na(r.overhead, 6),
            sig_or_na(r.delay, 6)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{ProtocolConfig, Variant};
    use crate::topology::generate_kregular;

    fn point(param: f64, coverage: f64, overhead: f64) -> SweepPoint {
        SweepPoint {
            param,
            coverage,
            delay: Some(2.0),
            overhead,
            stdev_coverage: 0.0,
            runs: 1,
        }
    }

    #[test]
    fn picks_cheapest_qualifying_point() {
        let pts = [point(0.2, 0.3, 0.5), point(0.6, 0.99, 2.0), point(1.0, 1.0, 3.0)];
        assert_eq!(overhead_for_coverage(&pts, 1.0).unwrap().param, 1.0);
        assert_eq!(overhead_for_coverage(&pts, 0.95).unwrap().param, 0.6);
        assert_eq!(overhead_for_coverage(&pts, 0.0).unwrap().param, 0.2);
        assert!(overhead_for_coverage(&pts[..2], 1.0).is_none());
    }

    #[test]
    fn aggregate_stats() {
        let r = |c: f64, o: f64, d: Option<f64>| RunReport {
            messages: 1,
            coverage: c,
            mean_delay: d,
            delivered: 0,
            lower_bound: 1,
            overhead_ratio: o,
        };
        let p = SweepPoint::aggregate(0.5, &[r(0.5, 1.0, Some(2.0)), r(1.0, 2.0, None)]);
        assert_eq!((p.coverage, p.overhead, p.delay, p.runs), (0.75, 1.5, Some(2.0), 2));
        assert!((p.stdev_coverage - 0.125f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn refinement_stays_between_neighbors() {
        let g = refine_grid(&[0.1, 1.0, 10.0], 1.0, 3);
        assert_eq!(g.len(), 6);
        assert!(g.iter().all(|&x| (0.1..=10.0).contains(&x)));
        let inner: Vec<_> = g.iter().filter(|&&x| x > 0.1 && x < 1.0).collect();
        assert_eq!(inner.len(), 1);
        assert_eq!(refine_grid(&[2.0], 2.0, 4), vec![2.0]);
    }

    #[test]
    fn csv_layout() {
        let mut p = point(0.25, 1.0, 3.0078125);
        let text = sweep_csv(&[p.clone()]);
        assert_eq!(text, "param,coverage,delay,overhead,stdev_coverage,runs\n0.25,1,2,3.00781,0,1\n");
        p.delay = None;
        assert!(sweep_csv(&[p]).contains(",NA,"));
        let rows = [TableRow::from_points("FP", 1.0, &[point(1.0, 0.9, 3.0)])];
        assert_eq!(table_csv(&rows), "protocol,target_coverage,overhead,delay\nFP,1,NA,NA\n");
    }

    #[test]
    fn sweep_shape_and_errors() {
        let graphs: Vec<_> = (0..2).map(|s| generate_kregular(30, 4, s).unwrap()).collect();
        let base = SimulationConfig {
            total_steps: 60,
            ..SimulationConfig::new(ProtocolConfig::new(Variant::Fp(1.0), 4))
        };
        let pts = sweep(&graphs, &base, &[1.0, 0.3], 2, CoverageBase::ExcludeOrigin).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts[0].param < pts[1].param);
        assert!(pts.iter().all(|p| p.runs == 4));
        assert!(sweep(&graphs, &base, &[], 2, CoverageBase::ExcludeOrigin).is_err());
        assert!(sweep(&graphs, &base, &[1.5], 2, CoverageBase::ExcludeOrigin).is_err());
    }
}
