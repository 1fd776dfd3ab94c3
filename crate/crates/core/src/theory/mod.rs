//! Branching-process model of push gossip on a configuration-model overlay.
//!
//! Everything is expressed through derivatives at `x = 1` of the generating
//! functions of the forwarding distributions: `F'(1)` (mean forwards from a
//! source) and `F⃗'(1)` (mean forwards after following an edge). The mean
//! number of receivers is
//!
//! ```text
//! <r> = 1 + F'(1) / (1 - F⃗'(1))
//! ```
//!
//! which diverges as `F⃗'(1)` reaches 1: the phase transition.

mod gossip;

use serde::{Deserialize, Serialize};

pub use gossip::GossipFunction;

use crate::error::{Error, Result};
use crate::fmt::sig;
use crate::topology::DegreeDistribution;

/// Search interval of [`solve_alpha`].
pub const ALPHA_BRACKET: (f64, f64) = (1e-3, 1e3);
/// Absolute bisection tolerance on α.
pub const ALPHA_TOLERANCE: f64 = 1e-6;

/// Excess degree distribution `q_i = (i+1) p_{i+1} / <p>` and its mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcessDegreeView {
    q: Vec<f64>,
    mean_excess: f64,
}

impl ExcessDegreeView {
    pub fn q(&self, i: usize) -> f64 {
        self.q.get(i).copied().unwrap_or(0.0)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.q
    }

    /// `(<p²> - <p>) / <p>`.
    pub fn mean_excess(&self) -> f64 {
        self.mean_excess
    }

    /// `Σ i q_i`, the second route to the same mean.
    pub fn mean_excess_by_sum(&self) -> f64 {
        self.q.iter().enumerate().map(|(i, q)| i as f64 * q).sum()
    }
}

pub fn excess_view(d: &DegreeDistribution) -> Result<ExcessDegreeView> {
    let mean = d.mean_degree();
    if mean <= 0.0 {
        return Err(Error::DegenerateDistribution);
    }
    let q = (0..d.max_degree())
        .map(|i| (i + 1) as f64 * d.p(i + 1) / mean)
        .collect();
    Ok(ExcessDegreeView {
        q,
        mean_excess: (d.second_moment() - mean) / mean,
    })
}

/// Gossip probability at the phase transition of fixed-probability gossip,
/// `1 / <q>`. Probabilistic broadcast has the same threshold for `β`.
pub fn fp_threshold(d: &DegreeDistribution) -> Result<f64> {
    let mean_excess = excess_view(d)?.mean_excess();
    if mean_excess <= 1.0 {
        return Err(Error::NoPercolation { mean_excess });
    }
    Ok(1.0 / mean_excess)
}

/// `Θ = Σ_j q_j γ(j)`: probability that a message crosses a random edge.
pub fn ddg_theta(d: &DegreeDistribution, g: &GossipFunction) -> Result<f64> {
    g.validate()?;
    let view = excess_view(d)?;
    if let GossipFunction::Fixed(c) = *g {
        return Ok(c);
    }
    let theta: f64 = view
        .probabilities()
        .iter()
        .enumerate()
        .map(|(j, q)| q * g.eval(j))
        .sum();
    Ok(theta.clamp(0.0, 1.0))
}

/// A dissemination scheme as seen by the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", content = "param", rename_all = "snake_case")]
pub enum Scheme {
    /// Fixed-probability gossip with probability `γ`.
    Fixed(f64),
    /// Probabilistic broadcast with probability `β`.
    Broadcast(f64),
    /// Degree-dependent gossip.
    DegreeDependent(GossipFunction),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchingSummary {
    pub f_prime_at_1: f64,
    pub f_arrow_prime_at_1: f64,
    /// Per-edge transmission probability, when the scheme has one.
    pub theta: Option<f64>,
}

pub fn branching(d: &DegreeDistribution, scheme: &Scheme) -> Result<BranchingSummary> {
    let view = excess_view(d)?;
    let (mean, mean_excess) = (d.mean_degree(), view.mean_excess());
    let per_edge = |t: f64| BranchingSummary {
        f_prime_at_1: t * mean,
        f_arrow_prime_at_1: t * mean_excess,
        theta: Some(t),
    };
    Ok(match *scheme {
        Scheme::Fixed(gamma) => {
            GossipFunction::Fixed(gamma).validate()?;
            per_edge(gamma)
        }
        Scheme::DegreeDependent(g) => per_edge(ddg_theta(d, &g)?),
        Scheme::Broadcast(beta) => {
            if !(0.0..=1.0).contains(&beta) {
                return Err(Error::param(format!("broadcast probability {beta} not in [0, 1]")));
            }
            // f_i = β p_{i+1}  =>  F'(1) = β Σ_i i p_{i+1} = β (<p> - 1 + p_0)
            BranchingSummary {
                f_prime_at_1: beta * (mean - 1.0 + d.p(0)),
                f_arrow_prime_at_1: beta * mean_excess,
                theta: None,
            }
        }
    })
}

/// `F⃗'(1)`; the scheme percolates when this reaches 1.
pub fn percolation_margin(d: &DegreeDistribution, scheme: &Scheme) -> Result<f64> {
    Ok(branching(d, scheme)?.f_arrow_prime_at_1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Receivers {
    Finite(f64),
    /// At or above the phase transition.
    Divergent,
}

/// Mean number of nodes holding a message, the origin included.
pub fn expected_receivers(d: &DegreeDistribution, scheme: &Scheme) -> Result<Receivers> {
    let b = branching(d, scheme)?;
    if b.f_arrow_prime_at_1 >= 1.0 {
        return Ok(Receivers::Divergent);
    }
    Ok(Receivers::Finite(
        1.0 + b.f_prime_at_1 / (1.0 - b.f_arrow_prime_at_1),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DdfFamily {
    Ddf1,
    Ddf2,
}

impl DdfFamily {
    pub fn function(self, alpha: f64) -> GossipFunction {
        match self {
            DdfFamily::Ddf1 => GossipFunction::Ddf1(alpha),
            DdfFamily::Ddf2 => GossipFunction::Ddf2(alpha),
        }
    }
}

/// The α at which degree-dependent gossip sits exactly at the phase
/// transition. `Θ(α)` is nonincreasing for both families, so the margin is
/// bisected on [`ALPHA_BRACKET`].
pub fn solve_alpha(d: &DegreeDistribution, family: DdfFamily) -> Result<f64> {
    let mean_excess = excess_view(d)?.mean_excess();
    let margin = |a: f64| -> Result<f64> { Ok(ddg_theta(d, &family.function(a))? * mean_excess) };
    let (mut lo, mut hi) = ALPHA_BRACKET;
    if !(margin(lo)? > 1.0 && margin(hi)? < 1.0) {
        return Err(Error::NoCrossing { lo, hi });
    }
    while hi - lo > ALPHA_TOLERANCE / 4.0 {
        let mid = 0.5 * (lo + hi);
        if margin(mid)? > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Degree distribution families swept by [`threshold_curve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionFamily {
    /// Poisson with the point's mean degree.
    Poisson,
    /// k-regular with `k` the point's (integer) mean degree.
    KRegular,
}

impl DistributionFamily {
    pub fn distribution(self, x: f64) -> Result<DegreeDistribution> {
        match self {
            DistributionFamily::Poisson => DegreeDistribution::poisson(x),
            DistributionFamily::KRegular => {
                if x < 0.0 || x.fract() != 0.0 {
                    return Err(Error::param(format!("k-regular degree {x} is not an integer")));
                }
                Ok(DegreeDistribution::regular(x as usize))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveFamily {
    /// Threshold `γ` (equivalently `β`).
    Fixed,
    /// Threshold `α` of DDF1.
    Ddf1,
}

#[derive(Debug)]
pub struct CurvePoint {
    pub x: f64,
    pub threshold: Result<f64>,
}

/// Threshold parameter for each mean degree. Failing points keep their error
/// and the curve carries on.
pub fn threshold_curve(
    family: CurveFamily,
    distributions: DistributionFamily,
    mean_degrees: &[f64],
) -> Vec<CurvePoint> {
    mean_degrees
        .iter()
        .map(|&x| {
            let threshold = distributions.distribution(x).and_then(|d| match family {
                CurveFamily::Fixed => fp_threshold(&d),
                CurveFamily::Ddf1 => solve_alpha(&d, DdfFamily::Ddf1),
            });
            CurvePoint { x, threshold }
        })
        .collect()
}

/// `x,threshold` with 9 significant digits; failed points print `NA`.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("x,threshold\n");
    for p in points {
        let t = p.threshold.as_ref().map_or("NA".to_string(), |t| sig(*t, 9));
        out.push_str(&format!("{},{t}\n", sig(p.x, 9)));
    }
    out
}
