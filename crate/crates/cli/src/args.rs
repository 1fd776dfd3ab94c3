use anyhow::{bail, Context as _, Result};
use clap::{Args, ValueEnum};
use gossim::engine::{DegreeKnowledge, SimulationConfig, Workload};
use gossim::metrics::CoverageBase;
use gossim::protocol::{ProtocolConfig, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolKind {
    Fp,
    Pb,
    Ddf1,
    Ddf2,
}

impl ProtocolKind {
    pub fn variant(self, param: f64) -> Variant {
        match self {
            ProtocolKind::Fp => Variant::Fp(param),
            ProtocolKind::Pb => Variant::Pb(param),
            ProtocolKind::Ddf1 => Variant::Ddf1(param),
            ProtocolKind::Ddf2 => Variant::Ddf2(param),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaseArg {
    ExcludeOrigin,
    AllNodes,
}

impl From<BaseArg> for CoverageBase {
    fn from(b: BaseArg) -> Self {
        match b {
            BaseArg::ExcludeOrigin => CoverageBase::ExcludeOrigin,
            BaseArg::AllNodes => CoverageBase::AllNodes,
        }
    }
}

/// Simulation knobs shared by `run` and `sweep`.
#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long, value_enum)]
    pub protocol: ProtocolKind,

    /// Initial TTL; defaults to 130% of the graph or corpus diameter.
    #[arg(long)]
    pub ttl: Option<u32>,

    #[arg(long, default_value_t = 256)]
    pub cache: usize,

    #[arg(long, default_value_t = 1000)]
    pub steps: u32,

    /// Mean generation interval per node, in steps.
    #[arg(long, default_value_t = 10.0)]
    pub interval: f64,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Send one message per run instead of the periodic workload.
    #[arg(long)]
    pub single: bool,

    /// Origin of the single message; seeded uniform when absent.
    #[arg(long, requires = "single")]
    pub origin: Option<u32>,

    /// Also forward back to the node a message came from.
    #[arg(long)]
    pub include_sender: bool,

    /// Ignore arrivals whose TTL is already exhausted.
    #[arg(long)]
    pub strict_reception: bool,

    /// Refresh cache entries on duplicate arrivals.
    #[arg(long)]
    pub refresh_on_hit: bool,

    /// Start with every neighbor degree known.
    #[arg(long)]
    pub preload_degrees: bool,

    #[arg(long, value_enum, default_value_t = BaseArg::ExcludeOrigin)]
    pub coverage_base: BaseArg,

    /// Abort any run whose overhead passes this value.
    #[arg(long)]
    pub max_overhead: Option<f64>,
}

impl SimArgs {
    pub fn config(&self, param: f64, ttl: u32, free_riders: f64) -> SimulationConfig {
        let mut protocol = ProtocolConfig::new(self.protocol.variant(param), ttl);
        protocol.exclude_sender = !self.include_sender;
        protocol.strict_reception = self.strict_reception;
        protocol.refresh_on_hit = self.refresh_on_hit;
        SimulationConfig {
            total_steps: self.steps,
            mean_generation_interval: self.interval,
            cache_capacity: self.cache,
            free_rider_fraction: free_riders,
            seed: self.seed,
            workload: if self.single {
                Workload::Single { origin: self.origin }
            } else {
                Workload::Exponential
            },
            degree_knowledge: if self.preload_degrees {
                DegreeKnowledge::Preloaded
            } else {
                DegreeKnowledge::Learned
            },
            max_overhead: self.max_overhead,
            ..SimulationConfig::new(protocol)
        }
    }
}

/// Parse `a,b,c`, `START..STOP:STEP` (inclusive) or
/// `log:START..STOP:COUNT` (log-spaced, inclusive).
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        bail!("empty parameter grid");
    }
    let grid = if let Some(rest) = s.strip_prefix("log:") {
        let (lo, hi, count) = range_parts(rest)?;
        let count: usize = count.parse().with_context(|| format!("bad point count `{count}`"))?;
        if count < 2 || lo <= 0.0 || hi <= lo {
            bail!("log grid needs 0 < START < STOP and COUNT >= 2");
        }
        let (a, b) = (lo.ln(), hi.ln());
        (0..count)
            .map(|i| tidy((a + (b - a) * i as f64 / (count - 1) as f64).exp()))
            .collect()
    } else if s.contains("..") {
        let (lo, hi, step) = range_parts(s)?;
        let step: f64 = step.parse().with_context(|| format!("bad step `{step}`"))?;
        if step.is_nan() || step <= 0.0 || hi < lo {
            bail!("range grid needs START <= STOP and a positive STEP");
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| tidy(lo + step * i as f64)).collect()
    } else {
        parse_list(s)?
    };
    Ok(grid)
}

fn range_parts(s: &str) -> Result<(f64, f64, &str)> {
    let (range, tail) = s.split_once(':').context("range grid needs `:STEP` or `:COUNT`")?;
    let (lo, hi) = range.split_once("..").context("range grid needs `START..STOP`")?;
    Ok((parse_f64(lo)?, parse_f64(hi)?, tail.trim()))
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_f64).collect()
}

fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().with_context(|| format!("bad number `{}`", s.trim()))?;
    if !v.is_finite() {
        bail!("non-finite number `{}`", s.trim());
    }
    Ok(v)
}

/// Drop accumulated binary noise such as `0.30000000000000004`.
fn tidy(v: f64) -> f64 {
    format!("{v:.12}").parse().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.5, 1").unwrap(), vec![0.5, 1.0]);
        let g = parse_grid("0.01..1.00:0.01").unwrap();
        assert_eq!(g.len(), 100);
        assert_eq!((g[0], g[29], g[99]), (0.01, 0.3, 1.0));
        let l = parse_grid("log:0.01..10:4").unwrap();
        assert_eq!(l, vec![0.01, 0.1, 1.0, 10.0]);
        assert!(parse_grid("").is_err());
        assert!(parse_grid("1..0:0.1").is_err());
        assert!(parse_grid("0..1:0").is_err());
        assert!(parse_grid("a,b").is_err());
    }
}
