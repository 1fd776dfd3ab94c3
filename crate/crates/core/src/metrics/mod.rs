//! Trace analysis: coverage, delay and overhead ratio per run, sweeps over a
//! corpus and a parameter grid, and coverage-target extraction.

mod sweep;

use serde::{Deserialize, Serialize};

pub use sweep::{
    overhead_for_coverage, refine_grid, sweep, sweep_csv, sweep_runs, table_csv, SweepPoint, TableRow,
    FULL_COVERAGE,
};

use crate::engine::{Delivery, EventTrace, Generation, TraceSink};
use crate::error::{Error, Result};

/// Denominator of per-message coverage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageBase {
    /// `receivers / (n - 1)`: the origin counts on neither side.
    #[default]
    ExcludeOrigin,
    /// `(receivers + 1) / n`.
    AllNodes,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub messages: u64,
    pub coverage: f64,
    /// `None` when no node other than an origin received anything.
    pub mean_delay: Option<f64>,
    /// Every send, duplicates included.
    pub delivered: u64,
    /// `messages · (n - 1)`.
    pub lower_bound: u64,
    pub overhead_ratio: f64,
}

/// Streaming reduction of a run into a [`RunReport`].
#[derive(Debug, Clone, Default)]
pub struct ReportAccumulator {
    receivers: Vec<u32>,
    first_deliveries: u64,
    hop_sum: u64,
    deliveries: u64,
}

impl ReportAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn finish(&self, node_count: usize, base: CoverageBase) -> Result<RunReport> {
        if self.receivers.is_empty() {
            return Err(Error::Undefined("no messages were generated"));
        }
        if node_count < 2 {
            return Err(Error::param("coverage needs at least two nodes"));
        }
        let messages = self.receivers.len() as u64;
        let lower_bound = messages * (node_count as u64 - 1);
        Ok(RunReport {
            messages,
            coverage: mean_coverage(&self.receivers, node_count, base),
            mean_delay: (self.first_deliveries > 0)
                .then(|| self.hop_sum as f64 / self.first_deliveries as f64),
            delivered: self.deliveries,
            lower_bound,
            overhead_ratio: self.deliveries as f64 / lower_bound as f64,
        })
    }
}

impl TraceSink for ReportAccumulator {
    fn generated(&mut self, g: &Generation) {
        let i = g.msg as usize;
        if self.receivers.len() <= i {
            self.receivers.resize(i + 1, 0);
        }
    }

    fn delivered(&mut self, d: &Delivery) {
        self.deliveries += 1;
        if d.first {
            self.receivers[d.msg as usize] += 1;
            self.first_deliveries += 1;
            self.hop_sum += d.hops as u64;
        }
    }
}

fn mean_coverage(receivers: &[u32], n: usize, base: CoverageBase) -> f64 {
    let sum: f64 = receivers
        .iter()
        .map(|&r| match base {
            CoverageBase::ExcludeOrigin => r as f64 / (n - 1) as f64,
            CoverageBase::AllNodes => (r + 1) as f64 / n as f64,
        })
        .sum();
    sum / receivers.len() as f64
}

impl RunReport {
    pub fn from_trace(trace: &EventTrace, node_count: usize, base: CoverageBase) -> Result<Self> {
        let mut acc = ReportAccumulator::new();
        for g in &trace.generations {
            acc.generated(g);
        }
        for d in &trace.deliveries {
            if d.msg as usize >= acc.receivers.len() {
                return Err(Error::Integrity(format!(
                    "delivery of unknown message {}",
                    d.msg
                )));
            }
            acc.delivered(d);
        }
        acc.finish(node_count, base)
    }
}

/// Mean over messages of the fraction of non-origin nodes reached.
pub fn coverage(trace: &EventTrace, node_count: usize) -> Result<f64> {
    Ok(RunReport::from_trace(trace, node_count, CoverageBase::ExcludeOrigin)?.coverage)
}

/// Mean hop count of first deliveries over all messages.
pub fn mean_delay(trace: &EventTrace) -> Result<f64> {
    let (count, sum) = trace
        .deliveries
        .iter()
        .filter(|d| d.first)
        .fold((0u64, 0u64), |(c, s), d| (c + 1, s + d.hops as u64));
    if count == 0 {
        return Err(Error::Undefined("no message reached a node other than its origin"));
    }
    Ok(sum as f64 / count as f64)
}

/// Sends over the spanning-tree lower bound `messages · (n - 1)`.
pub fn overhead_ratio(trace: &EventTrace, node_count: usize) -> Result<f64> {
    Ok(RunReport::from_trace(trace, node_count, CoverageBase::ExcludeOrigin)?.overhead_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate, SimulationConfig, Workload};
    use crate::protocol::{ProtocolConfig, Variant};
    use crate::topology::OverlayGraph;

    fn one_message(g: &OverlayGraph, v: Variant) -> EventTrace {
        let cfg = SimulationConfig {
            workload: Workload::Single { origin: Some(0) },
            total_steps: 40,
            ..SimulationConfig::new(ProtocolConfig::new(v, 8))
        };
        simulate(g, &cfg).unwrap()
    }

    #[test]
    fn cycle_delay() {
        let t = one_message(&OverlayGraph::cycle(6), Variant::Fp(1.0));
        assert_eq!(mean_delay(&t).unwrap(), 1.8);
        assert_eq!(coverage(&t, 6).unwrap(), 1.0);
    }

    #[test]
    fn single_edge() {
        let g = OverlayGraph::path(2);
        let t = one_message(&g, Variant::Fp(1.0));
        assert_eq!(mean_delay(&t).unwrap(), 1.0);
        assert_eq!(overhead_ratio(&t, 2).unwrap(), 1.0);
    }

    #[test]
    fn k4_overhead() {
        let t = one_message(&OverlayGraph::complete(4), Variant::Fp(1.0));
        assert_eq!(overhead_ratio(&t, 4).unwrap(), 3.0);
    }

    #[test]
    fn silent_protocol() {
        let g = OverlayGraph::cycle(500);
        let t = one_message(&g, Variant::Fp(0.0));
        let r = RunReport::from_trace(&t, 500, CoverageBase::ExcludeOrigin).unwrap();
        assert_eq!((r.coverage, r.overhead_ratio, r.mean_delay), (0.0, 0.0, None));
        assert!(mean_delay(&t).is_err());
        let all = RunReport::from_trace(&t, 500, CoverageBase::AllNodes).unwrap();
        assert_eq!(all.coverage, 1.0 / 500.0);
    }

    #[test]
    fn partial_reach() {
        let mut t = EventTrace::default();
        t.generated(&Generation {
            msg: 0,
            origin: 0,
            step: 0,
            ttl: 3,
        });
        for v in 1..=249 {
            t.delivered(&Delivery {
                msg: 0,
                receiver: v,
                hops: 2,
                step: 2,
                first: true,
            });
        }
        assert_eq!(coverage(&t, 500).unwrap(), 249.0 / 499.0);
    }

    #[test]
    fn no_messages_is_undefined() {
        assert!(matches!(
            coverage(&EventTrace::default(), 10),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn streaming_equals_trace() {
        let g = crate::topology::generate_kregular(40, 4, 3).unwrap();
        let cfg = SimulationConfig {
            total_steps: 120,
            seed: 5,
            ..SimulationConfig::new(ProtocolConfig::new(Variant::Fp(0.6), 5))
        };
        let mut both = (EventTrace::default(), ReportAccumulator::new());
        crate::engine::run(&g, &cfg, &mut both).unwrap();
        let base = CoverageBase::ExcludeOrigin;
        assert_eq!(
            both.1.finish(40, base).unwrap(),
            RunReport::from_trace(&both.0, 40, base).unwrap()
        );
    }
}
