//! Point fitting on the winding curve `w ↦ (σ₁(w/(α+r₁)), …, σ₁(w/(α+r_K)))`.
//!
//! For rationally independent `1/(α+r_k)` the curve is dense in [0,1]^K, so a
//! single scalar `w` can match K prescribed values to any accuracy. The solver
//! enumerates, in increasing `w`, the windows where the fastest coordinate is
//! within tolerance, and intersects each window exactly with the windows of the
//! remaining coordinates. The first non-empty intersection wins.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::activation::{euaf, triwave};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PointFitError {
    #[error("invalid fit targets: {0}")]
    Targets(String),
    #[error("invalid search parameter: {0}")]
    Parameter(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitTargets {
    pub values: Vec<f64>,
    pub alpha: f64,
    pub offsets: Vec<f64>,
}

impl FitTargets {
    /// Targets ξ₁..ξ_K with α = π and offsets 1..K.
    pub fn new(values: Vec<f64>) -> Result<Self, PointFitError> {
        let offsets = (1..=values.len()).map(|k| k as f64).collect();
        Self::with_params(values, PI, offsets)
    }

    /// α is accepted as given; its transcendence cannot be checked.
    pub fn with_params(values: Vec<f64>, alpha: f64, offsets: Vec<f64>) -> Result<Self, PointFitError> {
        let t = Self { values, alpha, offsets };
        t.validate()?;
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn validate(&self) -> Result<(), PointFitError> {
        if self.values.is_empty() {
            return Err(PointFitError::Targets("no target values".into()));
        }
        if self.offsets.len() != self.values.len() {
            return Err(PointFitError::Targets(format!(
                "{} values but {} offsets",
                self.values.len(),
                self.offsets.len()
            )));
        }
        if let Some(v) = self.values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(PointFitError::Targets(format!("value {v} outside [0,1]")));
        }
        if !self.alpha.is_finite() {
            return Err(PointFitError::Targets("α must be finite".into()));
        }
        for (i, r) in self.offsets.iter().enumerate() {
            if !r.is_finite() || self.alpha + r == 0.0 {
                return Err(PointFitError::Targets(format!("α + r_{} must be finite and non-zero", i + 1)));
            }
            if self.offsets[..i].contains(r) {
                return Err(PointFitError::Targets(format!("offset {r} repeated")));
            }
        }
        Ok(())
    }

    /// `1/(α + r_k)`.
    pub fn frequencies(&self) -> Vec<f64> {
        self.offsets.iter().map(|r| 1.0 / (self.alpha + r)).collect()
    }

    /// `|σ₁(w/(α+r_k)) − ξ_k|` for every k.
    pub fn errors_at(&self, w: f64) -> Vec<f64> {
        self.offsets
            .iter()
            .zip(&self.values)
            .map(|(r, xi)| (triwave(w / (self.alpha + r)) - xi).abs())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub w: f64,
    pub per_index_error: Vec<f64>,
    pub max_error: f64,
    /// Candidate windows examined.
    pub evaluations: u64,
    /// Largest w the search reached.
    pub search_bound_reached: f64,
    pub satisfied: bool,
}

/// Find w with every `|σ₁(w/(α+r_k)) − ξ_k| < epsilon`, examining at most
/// `budget` candidate windows. On exhaustion the best candidate seen is
/// returned with `satisfied = false`.
pub fn fit(targets: &FitTargets, epsilon: f64, budget: u64) -> Result<FitResult, PointFitError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(PointFitError::Parameter(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    fit_with_tolerances(targets, &vec![epsilon; targets.len()], budget)
}

/// Like [`fit`] with a separate strict tolerance per index. A tolerance that
/// makes an index unconstrained simply drops it from the search.
pub fn fit_with_tolerances(targets: &FitTargets, tolerances: &[f64], budget: u64) -> Result<FitResult, PointFitError> {
    targets.validate()?;
    if tolerances.len() != targets.len() {
        return Err(PointFitError::Parameter("one tolerance per target is required".into()));
    }
    if tolerances.iter().any(|t| !(*t > 0.0)) {
        return Err(PointFitError::Parameter("tolerances must be positive".into()));
    }
    if budget == 0 {
        return Err(PointFitError::Parameter("budget must be at least 1".into()));
    }
    let freqs = targets.frequencies();
    let mut coords: Vec<Coord> = freqs
        .iter()
        .zip(&targets.values)
        .zip(tolerances)
        .map(|((a, xi), t)| Coord { a: a.abs(), lo: xi - t, hi: xi + t, tol: *t })
        .filter(|c| !(c.lo < 0.0 && c.hi > 1.0))
        .collect();
    let finish = |w: f64, evaluations: u64, bound: f64| {
        let per_index_error = targets.errors_at(w);
        let max_error = per_index_error.iter().fold(0.0f64, |m, e| m.max(*e));
        let satisfied = per_index_error.iter().zip(tolerances).all(|(e, t)| e < t);
        FitResult { w, per_index_error, max_error, evaluations, search_bound_reached: bound, satisfied }
    };
    if coords.is_empty() {
        return Ok(finish(0.0, 1, 0.0));
    }
    let lead = (0..coords.len())
        .max_by(|&i, &j| coords[i].a.total_cmp(&coords[j].a).then(j.cmp(&i)))
        .expect("non-empty");
    let leader = coords.remove(lead);
    coords.sort_by(|x, y| x.tol.total_cmp(&y.tol));
    let search = Search { leader, others: coords, targets, tolerances };

    let mut start = 0u64;
    let mut block = 1u64 << 12;
    let mut best: Option<(f64, u64, f64)> = None;
    while start < budget {
        let end = budget.min(start + block);
        let outcome = search.scan(start, end);
        if let Some((idx, w)) = outcome.found {
            let bound = search.window(idx).map_or(w, |(_, hi)| hi);
            return Ok(finish(w, idx + 1, bound));
        }
        best = match (best, outcome.best) {
            (Some(b), Some(o)) => Some(if (o.0, o.1) < (b.0, b.1) { o } else { b }),
            (b, o) => b.or(o),
        };
        start = end;
        block = (block * 4).min(1 << 22);
    }
    let bound = search.window(budget - 1).map_or(0.0, |(_, hi)| hi);
    let w = best.map_or(0.0, |b| b.2);
    Ok(finish(w, budget, bound))
}

#[derive(Debug, Clone, Copy)]
struct Coord {
    a: f64,
    lo: f64,
    hi: f64,
    tol: f64,
}

impl Coord {
    /// Windows of u where σ₁(u) ∈ (lo, hi), for period p: A_p then B_p.
    #[inline]
    fn windows(&self, p: f64) -> [(f64, f64); 2] {
        [(2.0 * p + self.lo, 2.0 * p + self.hi), (2.0 * p + 2.0 - self.hi, 2.0 * p + 2.0 - self.lo)]
    }
}

struct Search<'a> {
    leader: Coord,
    others: Vec<Coord>,
    targets: &'a FitTargets,
    tolerances: &'a [f64],
}

struct ScanOutcome {
    found: Option<(u64, f64)>,
    best: Option<(f64, u64, f64)>,
}

impl Search<'_> {
    /// Leading window `j` in w: j = 0 is B₋₁, then A₀, B₀, A₁, …
    fn window(&self, j: u64) -> Option<(f64, f64)> {
        let (p, which) = if j.is_multiple_of(2) { (j as f64 / 2.0 - 1.0, 1) } else { ((j - 1) as f64 / 2.0, 0) };
        let (u0, u1) = self.leader.windows(p)[which];
        let a = self.leader.a;
        let (w0, w1) = ((u0 / a).max(0.0), u1 / a);
        (w1 > w0).then_some((w0, w1))
    }

    fn refine(&self, w0: f64, w1: f64, idx: usize) -> Option<(f64, f64)> {
        let Some(c) = self.others.get(idx) else {
            return Some((w0, w1));
        };
        let (u0, u1) = (w0 * c.a, w1 * c.a);
        let mut p = ((u0 - 2.0) / 2.0).floor();
        let p_end = (u1 / 2.0).ceil();
        while p <= p_end {
            for (a, b) in c.windows(p) {
                let (lo, hi) = (a.max(u0), b.min(u1));
                if lo < hi {
                    let (v0, v1) = ((lo / c.a).max(w0), (hi / c.a).min(w1));
                    if v0 < v1 {
                        if let Some(found) = self.refine(v0, v1, idx + 1) {
                            return Some(found);
                        }
                    }
                }
            }
            p += 1.0;
        }
        None
    }

    fn max_ratio(&self, w: f64) -> f64 {
        self.targets
            .errors_at(w)
            .iter()
            .zip(self.tolerances)
            .map(|(e, t)| e / t)
            .fold(0.0, f64::max)
    }

    /// Pick the point of a feasible interval with the smallest worst-case
    /// tolerance ratio; ties go to the smaller w.
    fn choose(&self, w0: f64, w1: f64) -> Option<f64> {
        const SAMPLES: usize = 64;
        let mut cands: Vec<f64> = (1..SAMPLES).map(|i| w0 + (w1 - w0) * i as f64 / SAMPLES as f64).collect();
        if w0 == 0.0 {
            cands.insert(0, 0.0);
        }
        let mut best = (f64::INFINITY, f64::INFINITY);
        for &w in &cands {
            let r = self.max_ratio(w);
            if r < best.0 {
                best = (r, w);
            }
        }
        // golden-section polish between the neighbouring samples
        let h = (w1 - w0) / SAMPLES as f64;
        let (mut a, mut b) = ((best.1 - h).max(w0), (best.1 + h).min(w1));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let (c, d) = (b - g * (b - a), a + g * (b - a));
            if self.max_ratio(c) <= self.max_ratio(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let mid = 0.5 * (a + b);
        let r = self.max_ratio(mid);
        if r < best.0 {
            best = (r, mid);
        }
        (best.0 < 1.0).then_some(best.1)
    }

    fn scan(&self, start: u64, end: u64) -> ScanOutcome {
        const TASK: u64 = 1 << 12;
        let tasks: Vec<(u64, u64)> = (start..end).step_by(TASK as usize).map(|s| (s, (s + TASK).min(end))).collect();
        let results: Vec<ScanOutcome> = tasks
            .par_iter()
            .map(|&(s, e)| {
                let mut best: Option<(f64, u64, f64)> = None;
                for j in s..e {
                    let Some((w0, w1)) = self.window(j) else { continue };
                    if let Some((v0, v1)) = self.refine(w0, w1, 0) {
                        if let Some(w) = self.choose(v0, v1) {
                            return ScanOutcome { found: Some((j, w)), best };
                        }
                    }
                    let centre = 0.5 * (w0 + w1);
                    let r = self.max_ratio(centre);
                    if best.is_none_or(|b| r < b.0) {
                        best = Some((r, j, centre));
                    }
                }
                ScanOutcome { found: None, best }
            })
            .collect();
        let found = results.iter().filter_map(|r| r.found).min_by_key(|f| f.0);
        let best = results
            .iter()
            .filter_map(|r| r.best)
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        ScanOutcome { found, best }
    }
}

/// `(w, m₀)` with `m₀ = ⌊|w|⌋ + 1`, raised if needed so that every
/// `w/(α+r_k) + 2m₀ ≥ 0`; then `σ(w/(α+r_k) + 2m₀) = σ₁(w/(α+r_k))`.
pub fn shift_nonneg(result: &FitResult, targets: &FitTargets) -> (f64, i64) {
    let w = result.w;
    let mut m0 = w.abs().floor() as i64 + 1;
    for a in targets.frequencies() {
        let need = (-(w * a) / 2.0).ceil() as i64;
        m0 = m0.max(need);
    }
    (w, m0)
}

/// `σ(w/(α+r) + 2m₀)`, the shifted evaluation used inside networks.
pub fn shifted_value(w: f64, m0: i64, alpha: f64, r: f64) -> f64 {
    euaf(w / (alpha + r) + 2.0 * m0 as f64)
}

/// Fraction of the 32^K cells of [0,1]^K visited by
/// `(τ(w/(α+r₁)), …, τ(w/(α+r_K)))`, τ the fractional part, for `samples`
/// equally spaced w in [0, range].
pub fn winding_coverage(
    k: usize,
    samples: u64,
    range: f64,
    alpha: f64,
    offsets: &[f64],
) -> Result<f64, PointFitError> {
    const BITS: u32 = 5;
    if !(1..=4).contains(&k) {
        return Err(PointFitError::Parameter(format!("coverage supports 1 ≤ K ≤ 4, got {k}")));
    }
    if offsets.len() != k {
        return Err(PointFitError::Parameter("one offset per coordinate is required".into()));
    }
    if samples < 2 || !(range > 0.0) {
        return Err(PointFitError::Parameter("need at least two samples and a positive range".into()));
    }
    let freqs: Vec<f64> = offsets.iter().map(|r| 1.0 / (alpha + r)).collect();
    let cells = 1usize << (BITS as usize * k);
    let words = cells.div_ceil(64);
    let pitch = range / (samples - 1) as f64;
    let side = (1u32 << BITS) as f64;
    let chunk = 1u64 << 16;
    let bitset = (0..samples.div_ceil(chunk))
        .into_par_iter()
        .fold(
            || vec![0u64; words],
            |mut bits, c| {
                for i in c * chunk..((c + 1) * chunk).min(samples) {
                    let w = i as f64 * pitch;
                    let mut cell = 0usize;
                    for a in &freqs {
                        let t = w * a;
                        let frac = t - t.floor();
                        let idx = ((frac * side) as usize).min(side as usize - 1);
                        cell = (cell << BITS) | idx;
                    }
                    bits[cell / 64] |= 1 << (cell % 64);
                }
                bits
            },
        )
        .reduce(
            || vec![0u64; words],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x |= y;
                }
                a
            },
        );
    let visited: u64 = bitset.iter().map(|w| w.count_ones() as u64).sum();
    Ok(visited as f64 / cells as f64)
}
