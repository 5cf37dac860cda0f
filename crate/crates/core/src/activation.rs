//! Scalar activation functions and their right-hand subgradients.
//!
//! The central one is the elementary universal activation (EUAF)
//!
//! ```text
//! σ(x) = |x − 2⌊(x+1)/2⌋|   for x ≥ 0   (triangle wave, period 2)
//! σ(x) = x / (|x| + 1)      for x < 0   (softsign)
//! ```
//!
//! Everything else here is either a piece of σ or a function built from it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::uaf_variants;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActivationError {
    #[error("non-finite input {0}")]
    NonFinite(f64),
    #[error("invalid activation parameter: {0}")]
    Parameter(String),
    #[error("unknown activation tag `{0}`")]
    UnknownTag(String),
}

/// Per-neuron activation tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActivationKind {
    /// σ: triangle wave on [0,∞), softsign on (−∞,0).
    Euaf,
    /// σ₁ on the whole line.
    TriWave,
    /// σ₂(x) = x/(|x|+1) on the whole line.
    Softsign,
    /// ψ(x) = x − σ(x); equals 2k−2 on [2k−2, 2k−1].
    Step,
    /// φ₂(x) = x + 1/2 − σ(x + 3/2); equals 2k+1 when |x − (2k+1)| ≤ 1/2.
    Snap,
    /// (ReLU(x) − ReLU(x − η₀)) / η₀ with η₀ ∈ (0,1).
    Ramp(f64),
    Relu,
    Identity,
    /// The sigmoidal variant σ̃.
    Sigmoidal,
    /// ρ_s, the s-fold antiderivative of σ.
    Smooth(u32),
}

impl ActivationKind {
    pub fn ramp(eta0: f64) -> Result<Self, ActivationError> {
        if eta0 > 0.0 && eta0 < 1.0 {
            Ok(Self::Ramp(eta0))
        } else {
            Err(ActivationError::Parameter(format!("ramp η₀ must lie in (0,1), got {eta0}")))
        }
    }

    pub fn smooth(s: u32) -> Result<Self, ActivationError> {
        if (1..=uaf_variants::MAX_SMOOTH_ORDER).contains(&s) {
            Ok(Self::Smooth(s))
        } else {
            Err(ActivationError::Parameter(format!(
                "smooth order must lie in 1..={}, got {s}",
                uaf_variants::MAX_SMOOTH_ORDER
            )))
        }
    }

    /// Checked evaluation.
    pub fn eval(self, x: f64) -> Result<f64, ActivationError> {
        if !x.is_finite() {
            return Err(ActivationError::NonFinite(x));
        }
        Ok(self.apply(x))
    }

    /// Unchecked evaluation used on the hot path.
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Self::Euaf => euaf(x),
            Self::TriWave => triwave(x),
            Self::Softsign => softsign(x),
            Self::Step => x - euaf(x),
            Self::Snap => x + 0.5 - euaf(x + 1.5),
            Self::Ramp(eta) => (x.max(0.0) - (x - eta).max(0.0)) / eta,
            Self::Relu => x.max(0.0),
            Self::Identity => x,
            Self::Sigmoidal => uaf_variants::sigmoidal(x),
            Self::Smooth(s) => uaf_variants::smooth(s, x),
        }
    }

    /// Derivative where it exists, right-hand derivative at kinks.
    pub fn subgradient(self, x: f64) -> Result<f64, ActivationError> {
        if !x.is_finite() {
            return Err(ActivationError::NonFinite(x));
        }
        Ok(self.slope(x))
    }

    #[inline]
    pub fn slope(self, x: f64) -> f64 {
        match self {
            Self::Euaf => euaf_slope(x),
            Self::TriWave => triwave_slope(x),
            Self::Softsign => {
                let d = 1.0 + x.abs();
                1.0 / (d * d)
            }
            Self::Step => 1.0 - euaf_slope(x),
            Self::Snap => 1.0 - euaf_slope(x + 1.5),
            Self::Ramp(eta) => {
                if (0.0..eta).contains(&x) {
                    1.0 / eta
                } else {
                    0.0
                }
            }
            Self::Relu => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Identity => 1.0,
            Self::Sigmoidal => uaf_variants::sigmoidal_slope(x),
            Self::Smooth(s) => uaf_variants::smooth_slope(s, x),
        }
    }

    /// Points in `[lo, hi]` where the function fails to be smooth, sorted.
    pub fn breakpoints(self, lo: f64, hi: f64) -> Vec<f64> {
        let integers = |from: f64, to: f64, shift: f64| -> Vec<f64> {
            let (a, b) = (from - shift, to - shift);
            if a > b {
                return Vec::new();
            }
            let mut out = Vec::new();
            let mut k = a.ceil();
            while k <= b {
                out.push(k + shift);
                k += 1.0;
            }
            out
        };
        let mut pts = match self {
            Self::Euaf | Self::Step | Self::Sigmoidal | Self::Smooth(_) => integers(lo.max(0.0), hi, 0.0),
            Self::Snap => integers(lo.max(-1.5), hi, -1.5),
            Self::TriWave => integers(lo, hi, 0.0),
            Self::Softsign | Self::Relu => integers(lo.max(0.0), hi.min(0.0), 0.0),
            Self::Ramp(eta) => [0.0, eta].into_iter().filter(|p| (lo..=hi).contains(p)).collect(),
            Self::Identity => Vec::new(),
        };
        pts.dedup();
        pts
    }

    pub fn tag(self) -> String {
        self.to_string()
    }
}

/// σ₁(x) = |x − 2⌊(x+1)/2⌋|.
#[inline]
pub fn triwave(x: f64) -> f64 {
    (x - 2.0 * ((x + 1.0) * 0.5).floor()).abs()
}

#[inline]
fn triwave_slope(x: f64) -> f64 {
    if x - 2.0 * ((x + 1.0) * 0.5).floor() >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
pub fn softsign(x: f64) -> f64 {
    x / (x.abs() + 1.0)
}

#[inline]
pub fn euaf(x: f64) -> f64 {
    if x >= 0.0 {
        triwave(x)
    } else {
        x / (1.0 - x)
    }
}

#[inline]
fn euaf_slope(x: f64) -> f64 {
    if x >= 0.0 {
        triwave_slope(x)
    } else {
        let d = 1.0 - x;
        1.0 / (d * d)
    }
}

/// ψ(x) = x − σ(x).
#[inline]
pub fn step(x: f64) -> f64 {
    x - euaf(x)
}

/// The bump σ(x + 1 − σ(x + 1)): a unit-height triangle on each [2k, 2k+1]
/// and zero on each [2k+1, 2k+2]. Four half-shifted copies sum to one on [0,∞).
#[inline]
pub fn bump(x: f64) -> f64 {
    euaf(x + 1.0 - euaf(x + 1.0))
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Euaf => f.write_str("euaf"),
            Self::TriWave => f.write_str("triwave"),
            Self::Softsign => f.write_str("softsign"),
            Self::Step => f.write_str("step"),
            Self::Snap => f.write_str("snap"),
            Self::Ramp(eta) => write!(f, "ramp:{eta}"),
            Self::Relu => f.write_str("relu"),
            Self::Identity => f.write_str("identity"),
            Self::Sigmoidal => f.write_str("sigmoidal"),
            Self::Smooth(s) => write!(f, "smooth:{s}"),
        }
    }
}

impl FromStr for ActivationKind {
    type Err = ActivationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || ActivationError::UnknownTag(s.to_string());
        Ok(match s {
            "euaf" => Self::Euaf,
            "triwave" => Self::TriWave,
            "softsign" => Self::Softsign,
            "step" => Self::Step,
            "snap" => Self::Snap,
            "relu" => Self::Relu,
            "identity" => Self::Identity,
            "sigmoidal" => Self::Sigmoidal,
            _ => {
                if let Some(eta) = s.strip_prefix("ramp:") {
                    Self::ramp(eta.parse().map_err(|_| unknown())?)?
                } else if let Some(order) = s.strip_prefix("smooth:") {
                    Self::smooth(order.parse().map_err(|_| unknown())?)?
                } else {
                    return Err(unknown());
                }
            }
        })
    }
}

impl Serialize for ActivationKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ActivationKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euaf_examples() {
        let e = ActivationKind::Euaf;
        assert_eq!(e.eval(1.0).unwrap(), 1.0);
        assert_eq!(e.eval(0.0).unwrap(), 0.0);
        assert_eq!(e.eval(-1.0).unwrap(), -0.5);
        assert!((e.eval(4.8).unwrap() - 0.8).abs() < 1e-15);
        assert!(e.eval(f64::NAN).is_err());
        assert!(e.eval(f64::INFINITY).is_err());
    }

    #[test]
    fn step_and_snap_examples() {
        assert_eq!(ActivationKind::Step.eval(2.5).unwrap(), 2.0);
        assert!((ActivationKind::Snap.eval(3.3).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn subgradient_examples() {
        let e = ActivationKind::Euaf;
        assert_eq!(e.subgradient(0.5).unwrap(), 1.0);
        assert_eq!(e.subgradient(1.5).unwrap(), -1.0);
        assert_eq!(e.subgradient(-1.0).unwrap(), 0.25);
        // right-hand convention at kinks
        assert_eq!(e.subgradient(1.0).unwrap(), -1.0);
        assert_eq!(e.subgradient(2.0).unwrap(), 1.0);
        assert_eq!(ActivationKind::Relu.subgradient(0.0).unwrap(), 1.0);
    }

    #[test]
    fn breakpoint_examples() {
        assert_eq!(ActivationKind::Euaf.breakpoints(0.0, 4.0), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert!(ActivationKind::Euaf.breakpoints(-3.0, -1.0).is_empty());
        assert_eq!(ActivationKind::Ramp(0.1).breakpoints(-1.0, 1.0), vec![0.0, 0.1]);
        assert_eq!(ActivationKind::Snap.breakpoints(0.0, 1.0), vec![0.5]);
    }

    #[test]
    fn tags_round_trip() {
        for k in [
            ActivationKind::Euaf,
            ActivationKind::TriWave,
            ActivationKind::Softsign,
            ActivationKind::Step,
            ActivationKind::Snap,
            ActivationKind::Ramp(0.125),
            ActivationKind::Relu,
            ActivationKind::Identity,
            ActivationKind::Sigmoidal,
            ActivationKind::Smooth(3),
        ] {
            assert_eq!(k.tag().parse::<ActivationKind>().unwrap(), k);
        }
        assert!("ramp:1.5".parse::<ActivationKind>().is_err());
        assert!("smooth:0".parse::<ActivationKind>().is_err());
        assert!("tanh".parse::<ActivationKind>().is_err());
    }

    #[test]
    fn bump_is_a_half_period_triangle() {
        assert_eq!(bump(0.5), 1.0);
        assert_eq!(bump(0.25), 0.5);
        assert_eq!(bump(1.5), 0.0);
        assert_eq!(bump(2.5), 1.0);
    }
}
