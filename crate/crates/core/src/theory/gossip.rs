use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-edge forwarding probability as a function of the receiving node's
/// degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "param", rename_all = "snake_case")]
pub enum GossipFunction {
    /// Constant `γ`.
    Fixed(f64),
    /// `1` for degree `i <= 2`, `i^-α` above.
    Ddf1(f64),
    /// `1 / ln(α i)` for `i > max(2, e/α)`, `1` otherwise.
    Ddf2(f64),
}

impl GossipFunction {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GossipFunction::Fixed(g) if !(0.0..=1.0).contains(&g) => {
                Err(Error::param(format!("gossip probability {g} not in [0, 1]")))
            }
            GossipFunction::Ddf1(a) | GossipFunction::Ddf2(a) if !(a.is_finite() && a > 0.0) => {
                Err(Error::param(format!("alpha {a} must be positive")))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, degree: usize) -> f64 {
        let i = degree as f64;
        match *self {
            GossipFunction::Fixed(g) => g,
            GossipFunction::Ddf1(alpha) => {
                if degree <= 2 {
                    1.0
                } else {
                    1.0 / i.powf(alpha)
                }
            }
            GossipFunction::Ddf2(alpha) => {
                // ln(α i) > 1 past the cutoff, so the value stays below 1.
                if i > f64::max(2.0, E / alpha) {
                    1.0 / (alpha * i).ln()
                } else {
                    1.0
                }
            }
        }
    }

    pub fn parameter(&self) -> f64 {
        match *self {
            GossipFunction::Fixed(v) | GossipFunction::Ddf1(v) | GossipFunction::Ddf2(v) => v,
        }
    }

    pub fn with_parameter(&self, v: f64) -> Self {
        match self {
            GossipFunction::Fixed(_) => GossipFunction::Fixed(v),
            GossipFunction::Ddf1(_) => GossipFunction::Ddf1(v),
            GossipFunction::Ddf2(_) => GossipFunction::Ddf2(v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ddf1_values() {
        let f = GossipFunction::Ddf1(1.0);
        assert_eq!(f.eval(1), 1.0);
        assert_eq!(f.eval(2), 1.0);
        assert_eq!(f.eval(3), 1.0 / 3.0);
        assert_eq!(f.eval(4), 0.25);
        assert_eq!(GossipFunction::Ddf1(0.5).eval(9), 1.0 / 3.0);
    }

    #[test]
    fn ddf2_values() {
        // α = 1: cutoff max(2, e) = e, so degrees 1..=2 flood
        let f = GossipFunction::Ddf2(1.0);
        assert_eq!(f.eval(2), 1.0);
        assert_eq!(f.eval(3), 1.0 / 3f64.ln());
        // α = 0.5: cutoff e/0.5 ≈ 5.44
        let g = GossipFunction::Ddf2(0.5);
        assert_eq!(g.eval(5), 1.0);
        assert_eq!(g.eval(6), 1.0 / 3f64.ln());
        for a in [0.05, 0.3, 1.0, 2.0, 10.0] {
            for i in 0..200 {
                let v = GossipFunction::Ddf2(a).eval(i);
                assert!((0.0..=1.0).contains(&v), "α={a} i={i} -> {v}");
            }
        }
    }

    #[test]
    fn validation() {
        assert!(GossipFunction::Fixed(1.2).validate().is_err());
        assert!(GossipFunction::Ddf1(0.0).validate().is_err());
        assert!(GossipFunction::Ddf2(-1.0).validate().is_err());
        assert!(GossipFunction::Ddf2(0.7).validate().is_ok());
    }
}
