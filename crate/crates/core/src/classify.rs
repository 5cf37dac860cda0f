//! Exact classifiers: a network equal to `r_j` on every point of region `E_j`.
//!
//! The labels are lifted to odd integers `2(n₁r_j + n₂) + 1`, a continuous
//! extension is approximated to within 1/2, and the snap gadget rounds the
//! result onto its plateau before the final affine map undoes the lift.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::activation::euaf;
use crate::approxnd::{assemble, ApproxNdError, EvalN, KstDecomposition, NdOptions};
use crate::gadgets::{snap_net, GadgetError};
use crate::network::{Network, NetworkError, ParamCount};
use crate::sampling::linspace;

pub const SAMPLES_PER_REGION: usize = 1000;
pub const EXACT_TOL: f64 = 1e-9;
const MIN_SEPARATION: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("invalid regions: {0}")]
    Validation(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("approximation stage failed: {0}")]
    Approximation(#[from] ApproxNdError),
    #[error("labels not reproduced: max deviation {0:e}")]
    NotExact(f64),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        Self { num, den }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// Closed intervals on the line.
    Intervals(Vec<[f64; 2]>),
    /// A finite point cloud in ℝ^d.
    Points(Vec<Vec<f64>>),
}

impl Region {
    fn dim(&self) -> usize {
        match self {
            Region::Intervals(_) => 1,
            Region::Points(p) => p.first().map_or(0, Vec::len),
        }
    }

    pub fn dist(&self, x: &[f64]) -> f64 {
        match self {
            Region::Intervals(ivs) => ivs.iter().map(|iv| (iv[0] - x[0]).max(x[0] - iv[1]).max(0.0)).fold(f64::INFINITY, f64::min),
            Region::Points(ps) => ps
                .iter()
                .map(|p| p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Up to `n` members, evenly spread.
    pub fn samples(&self, n: usize) -> Vec<Vec<f64>> {
        match self {
            Region::Points(ps) => ps.clone(),
            Region::Intervals(ivs) => {
                let total: f64 = ivs.iter().map(|iv| iv[1] - iv[0]).sum();
                ivs.iter()
                    .flat_map(|iv| {
                        let share = if total > 0.0 { (iv[1] - iv[0]) / total } else { 1.0 / ivs.len() as f64 };
                        let m = ((n as f64 * share).round() as usize).max(if iv[1] > iv[0] { 2 } else { 1 });
                        linspace(iv[0], iv[1], m)
                    })
                    .map(|x| vec![x])
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRegions {
    pub regions: Vec<Region>,
    pub labels: Vec<Rational>,
    #[serde(default)]
    pub bounding_box: Option<[f64; 2]>,
}

fn separation(a: &Region, b: &Region) -> f64 {
    match (a, b) {
        (Region::Intervals(x), Region::Intervals(y)) => x
            .iter()
            .flat_map(|p| y.iter().map(move |q| (q[0] - p[1]).max(p[0] - q[1])))
            .fold(f64::INFINITY, f64::min),
        (Region::Points(ps), other) | (other, Region::Points(ps)) => ps.iter().map(|p| other.dist(p)).fold(f64::INFINITY, f64::min),
    }
}

impl LabeledRegions {
    pub fn validate(&self) -> Result<usize, ClassifyError> {
        if self.regions.is_empty() {
            return Err(ClassifyError::Validation("no regions".into()));
        }
        if self.regions.len() != self.labels.len() {
            return Err(ClassifyError::Validation(format!("{} regions but {} labels", self.regions.len(), self.labels.len())));
        }
        if let Some(j) = self.labels.iter().position(|l| l.den == 0) {
            return Err(ClassifyError::Validation(format!("label {j} has a zero denominator")));
        }
        let d = self.regions[0].dim();
        for (j, r) in self.regions.iter().enumerate() {
            let ok = match r {
                Region::Intervals(ivs) => !ivs.is_empty() && ivs.iter().all(|iv| iv[0].is_finite() && iv[1].is_finite() && iv[0] <= iv[1]),
                Region::Points(ps) => !ps.is_empty() && ps.iter().all(|p| p.len() == d && p.iter().all(|v| v.is_finite())),
            };
            if !ok || r.dim() != d || d == 0 {
                return Err(ClassifyError::Validation(format!("region {j} is empty, malformed, or of another dimension")));
            }
        }
        for i in 0..self.regions.len() {
            for j in i + 1..self.regions.len() {
                let s = separation(&self.regions[i], &self.regions[j]);
                if !(s > MIN_SEPARATION) {
                    return Err(ClassifyError::Validation(format!("regions {i} and {j} overlap or touch (separation {s:e})")));
                }
            }
        }
        Ok(d)
    }
}

/// `g = Σ r_j g_j` with `g_j = dist(x, Ẽ_j)/(dist(x, E_j) + dist(x, Ẽ_j))`,
/// `Ẽ_j` the union of the other regions. Equal to `r_j` on `E_j`.
pub fn continuous_extension(regions: &LabeledRegions) -> Result<EvalN, ClassifyError> {
    regions.validate()?;
    let regs = regions.regions.clone();
    let labels: Vec<f64> = regions.labels.iter().map(|l| l.value()).collect();
    Ok(Arc::new(move |x: &[f64]| {
        if regs.len() == 1 {
            return labels[0];
        }
        let dists: Vec<f64> = regs.iter().map(|r| r.dist(x)).collect();
        let mut g = 0.0;
        for (j, r) in labels.iter().enumerate() {
            let own = dists[j];
            let other = dists.iter().enumerate().filter(|(l, _)| *l != j).map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
            g += r * (other / (own + other));
        }
        g
    }))
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// `n₁ = lcm(denominators)`, `n₂ = max(1, ⌈−n₁·lo⌉ + 1, 1 − min_j n₁r_j)`, so
/// that every `n₁r_j + n₂ ≥ 1` and `n₁g + n₂ > 0` on `g ∈ [lo, hi]`.
pub fn choose_integers(labels: &[Rational], g_range: [f64; 2]) -> Result<(i64, i64), ClassifyError> {
    if labels.iter().any(|l| l.den == 0) {
        return Err(ClassifyError::Validation("zero denominator".into()));
    }
    let mut n1: i128 = 1;
    for l in labels {
        let den = (l.den as i128).abs();
        n1 = n1 / gcd(n1, den) * den;
    }
    // n₁·r_j is an integer by construction
    let scaled: Vec<i128> = labels.iter().map(|l| l.num as i128 * (n1 / l.den as i128)).collect();
    let min_scaled = scaled.iter().copied().min().unwrap_or(0);
    let from_lo = (-(n1 as f64) * g_range[0] - 1e-9).ceil() as i128 + 1;
    let n2 = 1i128.max(from_lo).max(1 - min_scaled);
    debug_assert!(scaled.iter().all(|s| s + n2 >= 1));
    debug_assert!(n1 as f64 * g_range[0] + n2 as f64 >= 0.0);
    let n1 = i64::try_from(n1).map_err(|_| ClassifyError::Validation("denominators overflow".into()))?;
    let n2 = i64::try_from(n2).map_err(|_| ClassifyError::Validation("labels overflow".into()))?;
    Ok((n1, n2))
}

/// `(Mσ(y/M) − σ(y + 3/2) − 2n₂ − 1/2)/(2n₁)`, the snap followed by the label map.
pub fn snap_label(y: f64, m: f64, n1: i64, n2: i64) -> f64 {
    (m * euaf(y / m) - euaf(y + 1.5) - 2.0 * n2 as f64 - 0.5) / (2.0 * n1 as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub network: Network,
    pub n1: i64,
    pub n2: i64,
    /// Snap range `2‖n₁g + n₂‖ + 3/2`.
    pub snap_m: f64,
    pub verified_points: usize,
    pub max_deviation_on_samples: f64,
    /// Largest `|φ₁ − (2(n₁g+n₂)+1)|` over the samples, below 1/2.
    pub stage_one_error: f64,
    pub width: usize,
    pub depth: usize,
    pub params: ParamCount,
    /// `5509(d+1)(2d+1)`.
    pub nonzero_bound: usize,
    #[serde(skip)]
    pub stage_one: Network,
}

/// Exact classifier for interval regions on the line.
pub fn build_classifier(regions: &LabeledRegions, budget: u64) -> Result<ClassifyReport, ClassifyError> {
    let d = regions.validate()?;
    if d != 1 || regions.regions.iter().any(|r| !matches!(r, Region::Intervals(_))) {
        return Err(ClassifyError::Unsupported("exact classifiers are built for interval regions (d = 1)".into()));
    }
    let labels: Vec<f64> = regions.labels.iter().map(|l| l.value()).collect();
    let lo = labels.iter().map(|r| r.min(0.0)).sum::<f64>();
    let hi = labels.iter().map(|r| r.max(0.0)).sum::<f64>();
    let (n1, n2) = choose_integers(&regions.labels, [lo, hi])?;
    let g = continuous_extension(regions)?;

    let care: Vec<[f64; 2]> = regions
        .regions
        .iter()
        .flat_map(|r| match r {
            Region::Intervals(ivs) => ivs.clone(),
            Region::Points(_) => unreachable!("checked above"),
        })
        .collect();
    let (mut a, mut b) = care.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), iv| (l.min(iv[0]), h.max(iv[1])));
    if let Some(bb) = regions.bounding_box {
        if bb[0] > a || bb[1] < b {
            return Err(ClassifyError::Validation("bounding box does not contain every region".into()));
        }
        (a, b) = (bb[0], bb[1]);
    }
    if a == b {
        a -= 0.5;
        b += 0.5;
    }

    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let lifted: EvalN = {
        let g = g.clone();
        Arc::new(move |x: &[f64]| 2.0 * (n1f * g(x) + n2f) + 1.0)
    };
    let outer = {
        let lifted = lifted.clone();
        Arc::new(move |t: f64| lifted(&[a + (b - a) * t]))
    };
    let kst = KstDecomposition::trivial(outer);
    let opts = NdOptions { budget, care: Some(care), ..NdOptions::default() };
    let (stage_one, _) = assemble(&lifted, a, b, &kst, 0.5, &opts)?;

    let snap_m = 2.0 * (n1f * lo + n2f).abs().max((n1f * hi + n2f).abs()) + 1.5;
    let head = snap_net(snap_m)?.scale_output(1.0 / (2.0 * n1f), -(2.0 * n2f + 1.0) / (2.0 * n1f));
    let network = Network::compose(&head, &stage_one)?;

    let mut verified = 0;
    let mut max_dev = 0.0f64;
    let mut stage_err = 0.0f64;
    for (region, r) in regions.regions.iter().zip(&labels) {
        let pts = region.samples(SAMPLES_PER_REGION);
        let outs = network.eval_points(&pts);
        let firsts = stage_one.eval_points(&pts);
        for ((x, v), y) in pts.iter().zip(outs).zip(firsts) {
            max_dev = max_dev.max((v - r).abs());
            stage_err = stage_err.max((y - lifted(x)).abs());
        }
        verified += pts.len();
    }
    if !(max_dev <= EXACT_TOL) {
        return Err(ClassifyError::NotExact(max_dev));
    }
    Ok(ClassifyReport {
        width: network.width(),
        depth: network.depth(),
        params: network.count_params(),
        nonzero_bound: 5509 * (d + 1) * (2 * d + 1),
        network,
        n1,
        n2,
        snap_m,
        verified_points: verified,
        max_deviation_on_samples: max_dev,
        stage_one_error: stage_err,
        stage_one,
    })
}
