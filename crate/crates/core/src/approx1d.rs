//! Fixed-size approximators of continuous functions of one variable.
//!
//! * [`build_half_approx`]: width 2, depth 3, accurate on the left halves
//!   `𝓘_k = [(k−1)/K, (2k−1)/2K]` of the K cells of [0,1].
//! * [`build_region_approx`]: width 36, depth 5 on [0, 9/10]. Four half
//!   approximators at shifts `i/4K` are blended by the bump partition of unity
//!   through product gadgets.
//! * [`build_interval_approx`]: the same network on any [a,b], with the
//!   rescaling fused into the first layer.
//!
//! Two error splits are offered. [`ErrorSplit::Fixed`] uses the uniform textbook
//! constants (every point-fit target at `ε/(4M)`), which makes the point-fit
//! search exponentially expensive in K. [`ErrorSplit::Tight`] observes that the
//! blended network is the piecewise-linear interpolant of its node values on
//! the grid `n/4K`. Each node therefore only needs the accuracy left over after
//! interpolation, relative to the range of its own component. Nodes whose hats
//! miss the region of interest are left free. Both splits finish with a 10⁴-point
//! grid check of the assembled network.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::activation::ActivationKind::Euaf;
use crate::gadgets::{partition_component_net, product_net, GadgetError};
use crate::network::{AffineLayer, Branch, Domain, Network, NetworkError};
use crate::pointfit::{fit_with_tolerances, shift_nonneg, FitTargets, PointFitError};
use crate::sampling::linspace;

pub type Eval1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub const MODULUS_GRID: usize = 100_000;
pub const VERIFY_POINTS: usize = 10_000;
pub const MIN_REGION_K: usize = 10;
/// Portion of ε handed to the construction; the remainder absorbs grid under-sampling.
pub const TIGHT_MARGIN: f64 = 0.9;
const CELL_SAMPLES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Approx1DError {
    #[error("target is not finite at x = {0}")]
    Domain(f64),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("point fit for component {component} exhausted {evaluations} windows; best max error ratio {best_ratio:.4}")]
    PointFit { component: usize, best_ratio: f64, evaluations: u64 },
    #[error("no K in {k_min}..={k_max} leaves room for the point fit at ε = {epsilon}")]
    NoFeasibleK { k_min: usize, k_max: usize, epsilon: f64 },
    #[error("grid verification failed: sup error {sup:.6e} is not below {epsilon}")]
    Verification { sup: f64, epsilon: f64 },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error(transparent)]
    Fit(#[from] PointFitError),
}

/// A continuous target on [a,b], optionally with a caller-chosen K.
#[derive(Clone)]
pub struct Target1D {
    pub f: Eval1,
    pub a: f64,
    pub b: f64,
    pub k: Option<usize>,
}

impl std::fmt::Debug for Target1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Target1D").field("a", &self.a).field("b", &self.b).field("k", &self.k).finish()
    }
}

impl Target1D {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, a: f64, b: f64) -> Result<Self, Approx1DError> {
        Self::from_arc(Arc::new(f), a, b)
    }

    pub fn from_arc(f: Eval1, a: f64, b: f64) -> Result<Self, Approx1DError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Approx1DError::Parameter(format!("need finite a < b, got [{a}, {b}]")));
        }
        Ok(Self { f, a, b, k: None })
    }

    /// Target on [0,1].
    pub fn unit(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), a: 0.0, b: 1.0, k: None }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn eval(&self, x: f64) -> Result<f64, Approx1DError> {
        let y = (self.f)(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Approx1DError::Domain(x))
        }
    }

    /// Samples on the normalised grid `a + (b−a)·i/N`, checked finite.
    fn grid(&self, n: usize) -> Result<Vec<f64>, Approx1DError> {
        (0..=n)
            .into_par_iter()
            .map(|i| self.eval(self.a + (self.b - self.a) * i as f64 / n as f64))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ErrorSplit {
    #[default]
    Tight,
    Fixed,
}

#[derive(Debug, Clone)]
pub struct Approx1DOptions {
    pub split: ErrorSplit,
    /// Overrides the automatic choice of K (and `Target1D::k`).
    pub k: Option<usize>,
    /// Point-fit windows allowed per component.
    pub budget: u64,
    /// Closed sub-intervals of the target interval where accuracy is required.
    pub care: Option<Vec<[f64; 2]>>,
    pub k_max: usize,
}

impl Default for Approx1DOptions {
    fn default() -> Self {
        Self { split: ErrorSplit::Tight, k: None, budget: 1_000_000_000, care: None, k_max: 200 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentFit {
    pub index: usize,
    pub lo: f64,
    pub range: f64,
    pub constrained: usize,
    pub w: f64,
    pub m0: i64,
    pub expected_cost_bits: f64,
    pub evaluations: u64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Approx1DReport {
    pub network: Network,
    pub k: usize,
    /// `‖f‖_∞ + 1` on the target interval.
    pub m: f64,
    pub w0: Vec<f64>,
    pub m0: Vec<i64>,
    pub grid_sup_error: f64,
    pub guarantee_region: String,
    pub split: ErrorSplit,
    pub components: Vec<ComponentFit>,
    pub pointfit_evaluations: u64,
    pub width: usize,
    pub depth: usize,
}

/// max − min over every run of `window` consecutive samples.
fn sliding_oscillation(values: &[f64], window: usize) -> f64 {
    let window = window.clamp(1, values.len());
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut best = 0.0f64;
    for (i, &v) in values.iter().enumerate() {
        while maxq.back().is_some_and(|&j| values[j] <= v) {
            maxq.pop_back();
        }
        maxq.push_back(i);
        while minq.back().is_some_and(|&j| values[j] >= v) {
            minq.pop_back();
        }
        minq.push_back(i);
        if maxq[0] + window <= i {
            maxq.pop_front();
        }
        if minq[0] + window <= i {
            minq.pop_front();
        }
        if i + 1 >= window {
            best = best.max(values[maxq[0]] - values[minq[0]]);
        }
    }
    best
}

/// Empirical modulus of continuity for displacement `1/k` of the normalised variable.
pub fn empirical_modulus(samples: &[f64], k: usize) -> f64 {
    let n = samples.len() - 1;
    sliding_oscillation(samples, n / k + 1)
}

/// Smallest K ≥ 10 with `2·ω(1/K) < ε/2` on a 10⁵-interval grid of [a,b].
pub fn choose_k(target: &Target1D, epsilon: f64) -> Result<usize, Approx1DError> {
    if !(epsilon > 0.0) {
        return Err(Approx1DError::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let samples = target.grid(MODULUS_GRID)?;
    let ok = |k: usize| 2.0 * empirical_modulus(&samples, k) < epsilon / 2.0;
    if ok(MIN_REGION_K) {
        return Ok(MIN_REGION_K);
    }
    let mut lo = MIN_REGION_K;
    let mut hi = 2 * MIN_REGION_K;
    while !ok(hi) {
        if hi > MODULUS_GRID {
            return Err(Approx1DError::Parameter(format!("target varies by ε/4 below grid resolution (ε = {epsilon})")));
        }
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The width-2 depth-3 network `lo + R·σ(w·σ(−α − Kx + σ(2Kx)/2) + w + 2m₀)`.
pub fn half_approx_net(k: usize, w: f64, m0: i64, lo: f64, range: f64) -> Network {
    let kf = k as f64;
    Network::new(
        1,
        vec![
            AffineLayer::new(1, vec![2.0 * kf, 1.0], vec![0.0, 0.0]).expect("shape"),
            AffineLayer::new(2, vec![0.5, -kf], vec![-PI]).expect("shape"),
            AffineLayer::new(1, vec![w], vec![w + 2.0 * m0 as f64]).expect("shape"),
            AffineLayer::new(1, vec![range], vec![lo]).expect("shape"),
        ],
        vec![vec![Euaf; 2], vec![Euaf], vec![Euaf]],
        Some(Domain::interval(0.0, 1.0)),
    )
    .expect("well formed")
}

/// `p + q·x` on [lo, hi] laid out as a width-36 depth-5 network of the region shape.
pub fn exact_affine_net(p: f64, q: f64, lo: f64, hi: f64) -> Network {
    let span = if hi > lo { hi - lo } else { 1.0 };
    let widths = [16usize, 8, 8, 36, 24];
    let mut layers = Vec::with_capacity(6);
    let mut cols = 1;
    for (l, &n) in widths.iter().enumerate() {
        let mut w = vec![0.0; n * cols];
        let mut b = vec![0.0; n];
        if l == 0 {
            w[0] = 1.0 / span;
            b[0] = -lo / span;
        } else {
            w[0] = 1.0;
        }
        layers.push(AffineLayer::new(cols, w, b).expect("shape"));
        cols = n;
    }
    let mut w = vec![0.0; cols];
    w[0] = q * span;
    layers.push(AffineLayer::new(cols, w, vec![p + q * lo]).expect("shape"));
    let acts = widths.iter().map(|&n| vec![Euaf; n]).collect();
    Network::new(1, layers, acts, Some(Domain::interval(lo, hi))).expect("well formed")
}

/// `(p, q)` when f is affine on [lo, hi] to within 1e-12 relative on 1001 points.
pub fn affine_fit(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let (fa, fb) = (f(lo), f(hi));
    if !(fa.is_finite() && fb.is_finite()) {
        return None;
    }
    let q = if hi > lo { (fb - fa) / (hi - lo) } else { 0.0 };
    let p = fa - q * lo;
    let scale = 1.0 + fa.abs().max(fb.abs());
    linspace(lo, hi, 1001)
        .into_iter()
        .all(|x| (f(x) - (p + q * x)).abs() <= 1e-12 * scale)
        .then_some((p, q))
}

fn half_intervals(k: usize) -> Vec<[f64; 2]> {
    let kf = k as f64;
    (1..=k).map(|j| [(j as f64 - 1.0) / kf, (2.0 * j as f64 - 1.0) / (2.0 * kf)]).collect()
}

/// Up to `total` points spread over the intervals in proportion to length.
fn points_on(intervals: &[[f64; 2]], total: usize) -> Vec<f64> {
    let length: f64 = intervals.iter().map(|iv| iv[1] - iv[0]).sum();
    let mut out = Vec::with_capacity(total + 2 * intervals.len());
    for iv in intervals {
        let share = if length > 0.0 { (iv[1] - iv[0]) / length } else { 1.0 / intervals.len() as f64 };
        let n = ((total as f64 * share).round() as usize).max(if iv[1] > iv[0] { 2 } else { 1 });
        out.extend(linspace(iv[0], iv[1], n));
    }
    out
}

fn sup_error(net: &Network, target: &Target1D, xs: &[f64]) -> Result<f64, Approx1DError> {
    let vals = net.eval_grid(xs);
    let mut sup = 0.0f64;
    for (x, v) in xs.iter().zip(vals) {
        let e = (v - target.eval(*x)?).abs();
        if !e.is_finite() {
            return Ok(f64::INFINITY);
        }
        sup = sup.max(e);
    }
    Ok(sup)
}

fn max_abs(target: &Target1D) -> Result<f64, Approx1DError> {
    Ok(target.grid(MODULUS_GRID)?.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// One point fit: value/tolerance pairs indexed by k = 1..K, `None` for free cells.
struct ComponentPlan {
    index: usize,
    nodes: Vec<Option<(f64, f64)>>,
}

impl ComponentPlan {
    fn constrained(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().flatten().copied()
    }

    /// `(lo, range)` of the constrained values; a constant within tolerance has range 0.
    fn scale(&self) -> (f64, f64) {
        let (lo, hi, tmin) = self
            .constrained()
            .fold((f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY), |(l, h, t), (v, tol)| (l.min(v), h.max(v), t.min(tol)));
        if !lo.is_finite() {
            return (0.0, 0.0);
        }
        if (hi - lo) / 2.0 < tmin {
            ((hi + lo) / 2.0, 0.0)
        } else {
            (lo, hi - lo)
        }
    }

    fn cost_bits(&self) -> f64 {
        let (_, range) = self.scale();
        if range == 0.0 {
            return 0.0;
        }
        self.constrained().map(|(_, t)| (1.0 / (2.0 * t / range).min(1.0)).log2()).sum()
    }

    fn fit(&self, k: usize, budget: u64) -> Result<(ComponentFit, Network), Approx1DError> {
        let (lo, range) = self.scale();
        let constrained = self.constrained().count();
        if range == 0.0 {
            let fit = ComponentFit {
                index: self.index,
                lo,
                range,
                constrained,
                w: 0.0,
                m0: 0,
                expected_cost_bits: 0.0,
                evaluations: 0,
                max_ratio: 0.0,
            };
            return Ok((fit, half_approx_net(k, 0.0, 0, lo, 0.0)));
        }
        let mut values = Vec::with_capacity(k);
        let mut tols = Vec::with_capacity(k);
        for node in &self.nodes {
            match node {
                Some((v, t)) => {
                    values.push(((v - lo) / range).clamp(0.0, 1.0));
                    tols.push(t / range);
                }
                None => {
                    values.push(0.5);
                    tols.push(1.0);
                }
            }
        }
        let targets = FitTargets::new(values)?;
        let result = fit_with_tolerances(&targets, &tols, budget)?;
        let max_ratio = result.per_index_error.iter().zip(&tols).map(|(e, t)| e / t).fold(0.0, f64::max);
        if !result.satisfied {
            return Err(Approx1DError::PointFit { component: self.index, best_ratio: max_ratio, evaluations: result.evaluations });
        }
        let (w, m0) = shift_nonneg(&result, &targets);
        let fit = ComponentFit {
            index: self.index,
            lo,
            range,
            constrained,
            w,
            m0,
            expected_cost_bits: self.cost_bits(),
            evaluations: result.evaluations,
            max_ratio,
        };
        Ok((fit, half_approx_net(k, w, m0, lo, range)))
    }
}

fn check_budget_eps(epsilon: f64, budget: u64) -> Result<(), Approx1DError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Approx1DError::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if budget == 0 {
        return Err(Approx1DError::Parameter("budget must be positive".into()));
    }
    Ok(())
}

fn verify(
    network: &Network,
    target: &Target1D,
    region: &[[f64; 2]],
    epsilon: f64,
) -> Result<f64, Approx1DError> {
    let xs = points_on(region, VERIFY_POINTS);
    let sup = sup_error(network, target, &xs)?;
    if sup < epsilon {
        Ok(sup)
    } else {
        Err(Approx1DError::Verification { sup, epsilon })
    }
}

fn describe(region: &[[f64; 2]]) -> String {
    let parts: Vec<String> = region.iter().map(|iv| format!("[{}, {}]", iv[0], iv[1])).collect();
    if parts.len() > 6 {
        format!("union of {} intervals from {} to {}", parts.len(), region[0][0], region[region.len() - 1][1])
    } else {
        parts.join(" ∪ ")
    }
}

/// Width-2 depth-3 approximator of a target on [0,1], accurate on the half cells `𝓘_k`.
pub fn build_half_approx(
    target: &Target1D,
    k: usize,
    epsilon: f64,
    opts: &Approx1DOptions,
) -> Result<Approx1DReport, Approx1DError> {
    check_budget_eps(epsilon, opts.budget)?;
    if target.a != 0.0 || target.b != 1.0 {
        return Err(Approx1DError::Parameter("half approximators are defined on [0,1]".into()));
    }
    if k == 0 {
        return Err(Approx1DError::Parameter("K must be at least 1".into()));
    }
    let m = max_abs(target)? + 1.0;
    let cells = half_intervals(k);
    let plan = match opts.split {
        ErrorSplit::Fixed => {
            let tol = epsilon / (4.0 * m) * 2.0 * m;
            let nodes = cells.iter().map(|iv| Ok(Some((target.eval(iv[1])?, tol)))).collect::<Result<_, Approx1DError>>()?;
            ComponentPlan { index: 1, nodes }
        }
        ErrorSplit::Tight => {
            let eff = TIGHT_MARGIN * epsilon;
            let nodes = cells
                .iter()
                .map(|iv| {
                    let (lo, hi) = linspace(iv[0], iv[1], CELL_SAMPLES)
                        .into_iter()
                        .try_fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| {
                            let v = target.eval(x)?;
                            Ok::<_, Approx1DError>((l.min(v), h.max(v)))
                        })?;
                    let t = eff - (hi - lo) / 2.0;
                    if t <= 0.0 {
                        return Err(Approx1DError::NoFeasibleK { k_min: k, k_max: k, epsilon });
                    }
                    Ok(Some(((hi + lo) / 2.0, t)))
                })
                .collect::<Result<_, _>>()?;
            ComponentPlan { index: 1, nodes }
        }
    };
    let (fit, network) = match opts.split {
        ErrorSplit::Tight => plan.fit(k, opts.budget)?,
        ErrorSplit::Fixed => fixed_fit(&plan, k, m, opts.budget)?,
    };
    let sup = verify(&network, target, &cells, epsilon)?;
    Ok(Approx1DReport {
        width: network.width(),
        depth: network.depth(),
        network,
        k,
        m,
        w0: vec![fit.w],
        m0: vec![fit.m0],
        grid_sup_error: sup,
        guarantee_region: format!("union of [(k−1)/{k}, (2k−1)/{}] for k = 1..{k}", 2 * k),
        split: opts.split,
        pointfit_evaluations: fit.evaluations,
        components: vec![fit],
    })
}

/// Point fit with the fixed scale `lo = −M`, `R = 2M`.
fn fixed_fit(plan: &ComponentPlan, k: usize, m: f64, budget: u64) -> Result<(ComponentFit, Network), Approx1DError> {
    let (lo, range) = (-m, 2.0 * m);
    let mut values = Vec::with_capacity(k);
    let mut tols = Vec::with_capacity(k);
    for node in &plan.nodes {
        let (v, t) = node.expect("fixed-split plans constrain every cell");
        values.push(((v - lo) / range).clamp(0.0, 1.0));
        tols.push(t / range);
    }
    let targets = FitTargets::new(values)?;
    let result = fit_with_tolerances(&targets, &tols, budget)?;
    let max_ratio = result.per_index_error.iter().zip(&tols).map(|(e, t)| e / t).fold(0.0, f64::max);
    if !result.satisfied {
        return Err(Approx1DError::PointFit { component: plan.index, best_ratio: max_ratio, evaluations: result.evaluations });
    }
    let (w, m0) = shift_nonneg(&result, &targets);
    let cost = tols.iter().map(|t| (1.0 / (2.0 * t).min(1.0)).log2()).sum();
    let fit = ComponentFit {
        index: plan.index,
        lo,
        range,
        constrained: k,
        w,
        m0,
        expected_cost_bits: cost,
        evaluations: result.evaluations,
        max_ratio,
    };
    Ok((fit, half_approx_net(k, w, m0, lo, range)))
}

/// Intersect the care set (or [0, 0.9]) with [0, 0.9], merged and sorted.
fn region_of_interest(care: Option<&[[f64; 2]]>) -> Result<Vec<[f64; 2]>, Approx1DError> {
    let mut out: Vec<[f64; 2]> = match care {
        None => vec![[0.0, 0.9]],
        Some(c) => {
            if c.is_empty() {
                return Err(Approx1DError::Parameter("care region is empty".into()));
            }
            c.iter()
                .map(|iv| {
                    if !(iv[0] <= iv[1]) {
                        return Err(Approx1DError::Parameter(format!("care interval [{}, {}] is reversed", iv[0], iv[1])));
                    }
                    Ok([iv[0].max(0.0), iv[1].min(0.9)])
                })
                .filter(|r| r.as_ref().map_or(true, |iv| iv[0] <= iv[1]))
                .collect::<Result<_, _>>()?
        }
    };
    if out.is_empty() {
        return Err(Approx1DError::Parameter("care region misses the approximation interval".into()));
    }
    out.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut merged: Vec<[f64; 2]> = Vec::with_capacity(out.len());
    for iv in out.drain(..) {
        match merged.last_mut() {
            Some(last) if iv[0] <= last[1] => last[1] = last[1].max(iv[1]),
            _ => merged.push(iv),
        }
    }
    Ok(merged)
}

/// Node n of the `1/4K` grid belongs to component i ≡ 1 − n (mod 4) and cell k.
fn node_owner(n: usize) -> (usize, usize) {
    let i = match (1 - n as i64).rem_euclid(4) {
        0 => 4,
        r => r as usize,
    };
    let cell = (n + i - 1) / 4 + 1;
    (i, cell)
}

struct TightPlan {
    k: usize,
    components: Vec<ComponentPlan>,
    cost: f64,
}

fn plan_tight(g: &(dyn Fn(f64) -> f64 + Sync), region: &[[f64; 2]], k: usize, eps_eff: f64) -> Option<TightPlan> {
    let h = 1.0 / (4.0 * k as f64);
    let n_cells = (0.9 / h).ceil() as usize + 1;
    let node_value = |n: usize| g(n as f64 * h);
    // worst interpolation error on the cell, or None if the cell misses the region
    let cell_error: Vec<Option<f64>> = (0..n_cells)
        .into_par_iter()
        .map(|c| {
            let (c0, c1) = (c as f64 * h, (c + 1) as f64 * h);
            let (g0, g1) = (node_value(c), node_value(c + 1));
            let mut worst: Option<f64> = None;
            for iv in region {
                let (lo, hi) = (iv[0].max(c0), iv[1].min(c1));
                if lo > hi || (lo == hi && (lo == c0 || lo == c1) && iv[0] < iv[1]) {
                    continue;
                }
                let n = if hi > lo { CELL_SAMPLES } else { 1 };
                for x in linspace(lo, hi, n) {
                    let s = (x - c0) / h;
                    let e = (g(x) - ((1.0 - s) * g0 + s * g1)).abs();
                    worst = Some(worst.map_or(e, |w: f64| w.max(e)));
                }
            }
            worst
        })
        .collect();
    let mut components: Vec<ComponentPlan> =
        (1..=4).map(|i| ComponentPlan { index: i, nodes: vec![None; k] }).collect();
    for n in 0..=n_cells {
        let left = if n > 0 { cell_error[n - 1] } else { None };
        let right = cell_error.get(n).copied().flatten();
        let worst = match (left, right) {
            (None, None) => continue,
            (a, b) => a.unwrap_or(0.0).max(b.unwrap_or(0.0)),
        };
        let t = eps_eff - worst;
        if !(t > 0.0) {
            return None;
        }
        let (i, cell) = node_owner(n);
        if cell > k {
            return None;
        }
        components[i - 1].nodes[cell - 1] = Some((node_value(n), t));
    }
    let cost = components.iter().map(|c| c.cost_bits().exp2()).sum();
    Some(TightPlan { k, components, cost })
}

fn fixed_components(g: &Target1D, k: usize, epsilon: f64) -> Result<Vec<ComponentPlan>, Approx1DError> {
    let m = max_abs(g)? + 1.0;
    let tol = epsilon / 4.0 / (4.0 * m) * 2.0 * m;
    let kf = k as f64;
    let f0 = g.eval(0.0)?;
    (1..=4)
        .map(|i| {
            let nodes = (1..=k)
                .map(|j| {
                    let x = (2.0 * j as f64 - 1.0) / (2.0 * kf) - i as f64 / (4.0 * kf);
                    let v = if x < 0.0 { f0 } else { g.eval(x)? };
                    Ok(Some((v, tol)))
                })
                .collect::<Result<_, Approx1DError>>()?;
            Ok(ComponentPlan { index: i, nodes })
        })
        .collect()
}

/// Width-36 depth-5 approximator of a target given on [0,1], accurate on [0, 9/10]
/// (intersected with the care set, if any).
pub fn build_region_approx(target: &Target1D, epsilon: f64, opts: &Approx1DOptions) -> Result<Approx1DReport, Approx1DError> {
    check_budget_eps(epsilon, opts.budget)?;
    if target.a != 0.0 || target.b != 1.0 {
        return Err(Approx1DError::Parameter("region approximators take targets on [0,1]".into()));
    }
    let region = region_of_interest(opts.care.as_deref())?;
    let requested_k = opts.k.or(target.k);
    if let Some(k) = requested_k {
        if k < MIN_REGION_K {
            return Err(Approx1DError::Parameter(format!("region approximators need K ≥ {MIN_REGION_K}, got {k}")));
        }
    }
    let m = max_abs(target)? + 1.0;
    let (k, plans) = match opts.split {
        ErrorSplit::Fixed => {
            let k = match requested_k {
                Some(k) => k,
                None => choose_k(target, epsilon / 4.0)?,
            };
            (k, fixed_components(target, k, epsilon)?)
        }
        ErrorSplit::Tight => {
            // reject non-finite values up front so planning can use the raw evaluator
            target.grid(MODULUS_GRID)?;
            let f = target.f.clone();
            let g = move |x: f64| f(x);
            let eff = TIGHT_MARGIN * epsilon;
            let plan = match requested_k {
                Some(k) => plan_tight(&g, &region, k, eff)
                    .ok_or(Approx1DError::NoFeasibleK { k_min: k, k_max: k, epsilon })?,
                None => (MIN_REGION_K..=opts.k_max.max(MIN_REGION_K))
                    .filter_map(|k| plan_tight(&g, &region, k, eff))
                    .min_by(|a, b| a.cost.total_cmp(&b.cost).then(a.k.cmp(&b.k)))
                    .ok_or(Approx1DError::NoFeasibleK { k_min: MIN_REGION_K, k_max: opts.k_max, epsilon })?,
            };
            (plan.k, plan.components)
        }
    };
    let fits: Vec<(ComponentFit, Network)> = plans
        .par_iter()
        .map(|p| match opts.split {
            ErrorSplit::Tight => p.fit(k, opts.budget),
            ErrorSplit::Fixed => fixed_fit(p, k, m, opts.budget),
        })
        .collect::<Result<_, _>>()?;
    let network = assemble_region(k, &fits)?;
    let sup = verify(&network, target, &region, epsilon)?;
    Ok(Approx1DReport {
        width: network.width(),
        depth: network.depth(),
        network,
        k,
        m,
        w0: fits.iter().map(|(f, _)| f.w).collect(),
        m0: fits.iter().map(|(f, _)| f.m0).collect(),
        grid_sup_error: sup,
        guarantee_region: describe(&region),
        split: opts.split,
        pointfit_evaluations: fits.iter().map(|(f, _)| f.evaluations).sum(),
        components: fits.into_iter().map(|(f, _)| f).collect(),
    })
}

/// `Σ_i Γ(φ_i(x + i/4K), ψ(2Kx + i/2))`.
fn assemble_region(k: usize, fits: &[(ComponentFit, Network)]) -> Result<Network, Approx1DError> {
    let kf = k as f64;
    let mut terms = Vec::with_capacity(4);
    for (fit, half) in fits {
        let i = fit.index;
        let shifted = half.precompose(&AffineLayer::new(1, vec![1.0], vec![i as f64 / (4.0 * kf)])?)?;
        let bump = partition_component_net(k, i)?.pad_widen(1, 1.0);
        let pair = Network::parallel(&[Branch::new(&shifted), Branch::new(&bump)], false)?;
        let bound = 1f64.max(fit.lo.abs()).max((fit.lo + fit.range).abs());
        terms.push(Network::compose(&product_net(bound)?, &pair)?);
    }
    let branches: Vec<Branch> = terms.iter().map(Branch::new).collect();
    Ok(Network::sum(&branches, &[1.0; 4])?.with_domain(Some(Domain::interval(0.0, 0.9))))
}

/// Width-36 depth-5 approximator on [a,b] (intersected with the care set).
pub fn build_interval_approx(target: &Target1D, epsilon: f64, opts: &Approx1DOptions) -> Result<Approx1DReport, Approx1DError> {
    let (a, b) = (target.a, target.b);
    let stretch = 10.0 * (b - a) / 9.0;
    let f = target.f.clone();
    let unit = Target1D {
        f: Arc::new(move |y: f64| f(a + stretch * y.min(0.9))),
        a: 0.0,
        b: 1.0,
        k: target.k,
    };
    let mut inner = opts.clone();
    inner.care = opts.care.as_ref().map(|c| c.iter().map(|iv| [(iv[0] - a) / stretch, (iv[1] - a) / stretch]).collect());
    let mut report = build_region_approx(&unit, epsilon, &inner)?;
    let to_unit = AffineLayer::new(1, vec![1.0 / stretch], vec![-a / stretch])?;
    report.network = report.network.precompose(&to_unit)?.with_domain(Some(Domain::interval(a, b)));
    let region: Vec<[f64; 2]> = match &opts.care {
        None => vec![[a, b]],
        Some(_) => region_of_interest(inner.care.as_deref())?
            .into_iter()
            .map(|iv| [a + stretch * iv[0], a + stretch * iv[1]])
            .collect(),
    };
    report.grid_sup_error = verify(&report.network, target, &region, epsilon)?;
    report.guarantee_region = describe(&region);
    report.m = max_abs(target)? + 1.0;
    Ok(report)
}

/// An affine target realised exactly in the region layout.
pub fn build_exact_affine(target: &Target1D) -> Result<Approx1DReport, Approx1DError> {
    let f = target.f.clone();
    let (p, q) = affine_fit(&move |x| f(x), target.a, target.b)
        .ok_or_else(|| Approx1DError::Parameter("target is not affine on its interval".into()))?;
    let network = exact_affine_net(p, q, target.a, target.b);
    let region = [[target.a, target.b]];
    let xs = points_on(&region, VERIFY_POINTS);
    let sup = sup_error(&network, target, &xs)?;
    Ok(Approx1DReport {
        width: network.width(),
        depth: network.depth(),
        network,
        k: 0,
        m: target.eval(target.a)?.abs().max(target.eval(target.b)?.abs()) + 1.0,
        w0: Vec::new(),
        m0: Vec::new(),
        grid_sup_error: sup,
        guarantee_region: describe(&region),
        split: ErrorSplit::Tight,
        components: Vec::new(),
        pointfit_evaluations: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn choose_k_examples() {
        assert_eq!(choose_k(&Target1D::unit(|_| 0.4), 0.1).unwrap(), 10);
        assert_eq!(choose_k(&Target1D::unit(|x| x), 0.2).unwrap(), 21);
        assert!(matches!(choose_k(&Target1D::unit(|x| 1.0 / (x - 0.5)), 0.2), Err(Approx1DError::Domain(_))));
    }

    #[test]
    fn node_ownership() {
        // node 0 peaks where component 1 sits at the middle of its first cell
        assert_eq!(node_owner(0), (1, 1));
        assert_eq!(node_owner(1), (4, 2));
        assert_eq!(node_owner(4), (1, 2));
        assert_eq!(node_owner(36), (1, 10));
    }

    #[test]
    fn exact_affine_layout() {
        let n = exact_affine_net(0.5, -2.0, -1.0, 3.0);
        assert_eq!((n.width(), n.depth()), (36, 5));
        for x in linspace(-1.0, 3.0, 17) {
            assert!((n.eval1(x) - (0.5 - 2.0 * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn half_approx_of_identity() {
        let r = build_half_approx(&Target1D::unit(|x| x), 10, 0.3, &Approx1DOptions::default()).unwrap();
        assert_eq!((r.width, r.depth), (2, 3));
        assert!(r.grid_sup_error < 0.3);
    }
}
