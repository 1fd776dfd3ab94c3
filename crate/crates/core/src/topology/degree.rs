use std::collections::BTreeMap;

use super::graph::OverlayGraph;
use crate::error::{Error, Result};

/// Tail mass below which analytic distributions are cut off.
pub const TAIL_CUTOFF: f64 = 1e-12;

const SUM_TOLERANCE: f64 = 1e-9;

/// Degree probabilities `p_i`, indexed by degree, with their first two moments.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    probabilities: Vec<f64>,
    mean_degree: f64,
    second_moment: f64,
}

impl DegreeDistribution {
    /// `probabilities[i]` is the probability of degree `i`.
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::param("empty degree distribution"));
        }
        if let Some(p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::param(format!("probability {p} outside [0, 1]")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::param(format!("probabilities sum to {total}, not 1")));
        }
        let mut probabilities = probabilities;
        while probabilities.len() > 1 && *probabilities.last().unwrap() == 0.0 {
            probabilities.pop();
        }
        let (mean_degree, second_moment) = moments(&probabilities);
        Ok(DegreeDistribution {
            probabilities,
            mean_degree,
            second_moment,
        })
    }

    pub fn from_map(map: &BTreeMap<usize, f64>) -> Result<Self> {
        let len = map.keys().next_back().map_or(0, |&k| k + 1);
        let mut probs = vec![0.0; len];
        for (&k, &p) in map {
            probs[k] = p;
        }
        Self::new(probs)
    }

    /// Every node has degree `k`.
    pub fn regular(k: usize) -> Self {
        let mut probs = vec![0.0; k + 1];
        probs[k] = 1.0;
        Self::new(probs).expect("point mass is valid")
    }

    /// Poisson with the given mean, truncated where the remaining tail mass
    /// falls below [`TAIL_CUTOFF`], then renormalized.
    pub fn poisson(mean: f64) -> Result<Self> {
        if !(mean.is_finite() && mean > 0.0) {
            return Err(Error::param(format!("Poisson mean {mean} must be positive")));
        }
        let ln_mean = mean.ln();
        let mut ln_p = -mean;
        let mut probs = vec![ln_p.exp()];
        let mut i = 0usize;
        loop {
            i += 1;
            ln_p += ln_mean - (i as f64).ln();
            let p = ln_p.exp();
            probs.push(p);
            // For i + 1 > mean the tail after i is bounded by a geometric
            // series with ratio mean / (i + 1).
            let ratio = mean / (i + 1) as f64;
            if ratio < 1.0 && p * ratio / (1.0 - ratio) < TAIL_CUTOFF {
                break;
            }
        }
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        Self::new(probs)
    }

    /// Empirical distribution of a graph: fraction of nodes with each degree.
    pub fn empirical(g: &OverlayGraph) -> Self {
        let degrees = g.degrees();
        let max = degrees.iter().copied().max().unwrap_or(0);
        let mut counts = vec![0usize; max + 1];
        for d in degrees {
            counts[d] += 1;
        }
        let n = g.node_count() as f64;
        Self::new(counts.into_iter().map(|c| c as f64 / n).collect())
            .expect("empirical frequencies form a distribution")
    }

    /// Probability of degree `i` (zero beyond the support).
    pub fn p(&self, i: usize) -> f64 {
        self.probabilities.get(i).copied().unwrap_or(0.0)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn max_degree(&self) -> usize {
        self.probabilities.len() - 1
    }

    pub fn mean_degree(&self) -> f64 {
        self.mean_degree
    }

    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    /// Nonzero entries as a degree → probability map.
    pub fn to_map(&self) -> BTreeMap<usize, f64> {
        self.probabilities
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (i, p))
            .collect()
    }
}

fn moments(probs: &[f64]) -> (f64, f64) {
    probs
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(m1, m2), (i, &p)| {
            let i = i as f64;
            (m1 + i * p, m2 + i * i * p)
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_and_complete() {
        let d = DegreeDistribution::empirical(&OverlayGraph::complete(4));
        assert_eq!(d.to_map(), BTreeMap::from([(3, 1.0)]));
        assert_eq!(d.mean_degree(), 3.0);
        let r = DegreeDistribution::regular(4);
        assert_eq!(r.to_map(), BTreeMap::from([(4, 1.0)]));
        assert_eq!(r.mean_degree(), 4.0);
        assert_eq!(r.second_moment(), 16.0);
    }

    #[test]
    fn star_by_hand() {
        // degrees: hub 4, four leaves of degree 1
        let d = DegreeDistribution::empirical(&OverlayGraph::star(5));
        assert_eq!(d.to_map(), BTreeMap::from([(1, 0.8), (4, 0.2)]));
        assert!((d.mean_degree() - 1.6).abs() < 1e-15);
        assert!((d.second_moment() - (0.8 + 0.2 * 16.0)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(DegreeDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(DegreeDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(DegreeDistribution::new(vec![]).is_err());
        assert!(DegreeDistribution::poisson(0.0).is_err());
    }

    #[test]
    fn poisson_truncation() {
        for mean in [0.5, 2.0, 4.0, 5.0, 20.0] {
            let d = DegreeDistribution::poisson(mean).unwrap();
            assert!((d.mean_degree() - mean).abs() < 1e-9, "mean {mean}");
            let var = d.second_moment() - d.mean_degree().powi(2);
            assert!((var - mean).abs() < 1e-8, "variance for mean {mean}");
            assert!((d.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
