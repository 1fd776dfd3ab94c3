//! Helpers for the acceptance suite: run scale, overhead-capped sweep points
//! and verdict lines.
//!
//! Gossip storms make some sweep points hundreds of times more expensive
//! than flooding. A point only has to be evaluated far enough to know it
//! cannot matter, so runs go through the engine's overhead cap with the
//! point's remaining budget. Point overhead is a mean of per-run ratios,
//! all non-negative, so once the ratios spent exceed `runs × bound` the
//! mean is known to exceed `bound`.

use std::fmt;
use std::io::Write;

use gossim::engine::{run, run_seed, SimulationConfig};
use gossim::fmt::sig;
use gossim::metrics::{CoverageBase, ReportAccumulator, RunReport, SweepPoint, FULL_COVERAGE};
use gossim::topology::OverlayGraph;
use gossim::{Error, Result};

/// Graphs per corpus and repetitions per graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scale {
    pub graphs: usize,
    pub reps: usize,
}

impl Scale {
    pub const FULL: Scale = Scale { graphs: 10, reps: 10 };

    /// `GOSSIM_ACCEPTANCE_SCALE=GxR` overrides `default`; `full` means 10x10.
    pub fn from_env(default: Scale) -> Scale {
        match std::env::var("GOSSIM_ACCEPTANCE_SCALE") {
            Ok(s) => Scale::parse(&s).unwrap_or_else(|| panic!("GOSSIM_ACCEPTANCE_SCALE `{s}` is not GxR or full")),
            Err(_) => default,
        }
    }

    pub fn parse(s: &str) -> Option<Scale> {
        if s.trim() == "full" {
            return Some(Scale::FULL);
        }
        let (g, r) = s.trim().split_once('x')?;
        let scale = Scale {
            graphs: g.parse().ok()?,
            reps: r.parse().ok()?,
        };
        (scale.graphs >= 1 && scale.reps >= 1 && scale.graphs <= 10).then_some(scale)
    }

    pub fn runs(&self) -> usize {
        self.graphs * self.reps
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} graphs x {} reps", self.graphs, self.reps)
    }
}

/// One evaluated sweep point.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Done(SweepPoint),
    /// Mean overhead is proven to exceed `bound`; the point was abandoned.
    Above { param: f64, bound: f64 },
}

impl Outcome {
    pub fn param(&self) -> f64 {
        match self {
            Outcome::Done(p) => p.param,
            Outcome::Above { param, .. } => *param,
        }
    }

    pub fn point(&self) -> Option<&SweepPoint> {
        match self {
            Outcome::Done(p) => Some(p),
            Outcome::Above { .. } => None,
        }
    }

    pub fn full_coverage(&self) -> Option<&SweepPoint> {
        self.point().filter(|p| p.coverage >= FULL_COVERAGE)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Done(p) => write!(f, "{}: cov {:.4} ovh {:.3}", sig(p.param, 4), p.coverage, p.overhead),
            Outcome::Above { param, bound } => write!(f, "{}: ovh > {bound:.3}", sig(*param, 4)),
        }
    }
}

/// Evaluate `param` on the first `scale.graphs` graphs with the same run
/// seeds as a sweep, giving up once the mean overhead provably exceeds
/// `bound`.
pub fn point(
    graphs: &[OverlayGraph],
    base: &SimulationConfig,
    param: f64,
    scale: Scale,
    bound: Option<f64>,
) -> Result<Outcome> {
    assert!(graphs.len() >= scale.graphs, "corpus smaller than the scale");
    let budget = bound.map(|b| b * scale.runs() as f64);
    let mut spent = 0.0;
    let mut reports: Vec<RunReport> = Vec::with_capacity(scale.runs());
    for (k, g) in graphs[..scale.graphs].iter().enumerate() {
        for r in 0..scale.reps {
            let mut cfg = *base;
            cfg.protocol.variant = base.protocol.variant.with_parameter(param);
            cfg.seed = run_seed(base.seed, k, r);
            cfg.max_overhead = budget.map(|b| f64::max(b - spent, f64::MIN_POSITIVE));
            let mut acc = ReportAccumulator::new();
            match run(g, &cfg, &mut acc) {
                Ok(_) => {}
                Err(Error::OverheadExceeded { .. }) => {
                    return Ok(Outcome::Above {
                        param,
                        bound: bound.expect("only capped runs stop early"),
                    })
                }
                Err(e) => {
                    return Err(Error::RunFailed {
                        graph: k,
                        seed: cfg.seed,
                        source: Box::new(e),
                    })
                }
            }
            let report = acc.finish(g.node_count(), CoverageBase::ExcludeOrigin)?;
            spent += report.overhead_ratio;
            reports.push(report);
        }
    }
    Ok(Outcome::Done(SweepPoint::aggregate(param, &reports)))
}

/// Cheapest full-coverage point over `grid`, evaluated in the order given.
/// Each point is capped at the best overhead found so far, or at `bound`
/// before any point reached full coverage (and never above `bound`).
pub fn best_full_coverage(
    graphs: &[OverlayGraph],
    base: &SimulationConfig,
    grid: &[f64],
    scale: Scale,
    bound: Option<f64>,
) -> Result<(Option<SweepPoint>, Vec<Outcome>)> {
    let mut best: Option<SweepPoint> = None;
    let mut outcomes = Vec::with_capacity(grid.len());
    for &x in grid {
        let cap = match (&best, bound) {
            (Some(b), Some(c)) => Some(b.overhead.min(c)),
            (Some(b), None) => Some(b.overhead),
            (None, c) => c,
        };
        let o = point(graphs, base, x, scale, cap)?;
        if let Some(p) = o.full_coverage() {
            if best.as_ref().is_none_or(|b| p.overhead < b.overhead) {
                best = Some(p.clone());
            }
        }
        outcomes.push(o);
    }
    Ok((best, outcomes))
}

pub fn list(outcomes: &[Outcome]) -> String {
    outcomes.iter().map(|o| o.to_string()).collect::<Vec<_>>().join("; ")
}

/// Print a verdict line. It goes straight to the process stderr so that it
/// shows up even when the test harness captures output.
pub fn verdict(id: u32, title: &str, pass: bool, detail: &str) -> bool {
    let line = format!(
        "acceptance #{id:<2} {} {title}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut err = std::io::stderr().lock();
    let _ = err.write_all(line.as_bytes());
    let _ = err.flush();
    pass
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use gossim::protocol::{ProtocolConfig, Variant};
    use gossim::topology::GeneratorSpec;

    #[test]
    fn scales() {
        assert_eq!(Scale::parse("3x2"), Some(Scale { graphs: 3, reps: 2 }));
        assert_eq!(Scale::parse("full"), Some(Scale::FULL));
        assert_eq!(Scale::parse("0x1"), None);
        assert_eq!(Scale::parse("11x1"), None);
        assert_eq!(Scale::parse("3"), None);
    }

    #[test]
    fn capped_points_agree_with_sweeps() {
        let graphs: Vec<_> = (0..2)
            .map(|s| GeneratorSpec::ErdosRenyi { nodes: 60, edges: 150 }.generate_connected(s).unwrap().0)
            .collect();
        let mut cfg = SimulationConfig::new(ProtocolConfig::new(Variant::Fp(0.7), 5));
        cfg.total_steps = 80;
        cfg.cache_capacity = 8;
        let scale = Scale { graphs: 2, reps: 2 };
        let swept = gossim::metrics::sweep(&graphs, &cfg, &[0.7], 2, CoverageBase::ExcludeOrigin).unwrap();
        let Outcome::Done(p) = point(&graphs, &cfg, 0.7, scale, None).unwrap() else {
            panic!("uncapped point abandoned")
        };
        assert_eq!(p, swept[0]);
        let loose = point(&graphs, &cfg, 0.7, scale, Some(p.overhead * 1.0001)).unwrap();
        assert_eq!(loose, Outcome::Done(p.clone()));
        let tight = point(&graphs, &cfg, 0.7, scale, Some(p.overhead * 0.9)).unwrap();
        assert!(matches!(tight, Outcome::Above { .. }));
    }
}
