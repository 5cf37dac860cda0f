//! Multivariate approximation from a superposition decomposition
//! `f(x) = Σ_{i=0}^{2d} g̃_i(Σ_j h̃_{ij}(t_j))`, `t = (x − a)/(b − a) ∈ [0,1]^d`.
//!
//! Inner functions are rescaled to `h_ij = h̃_ij/(4M) + 1/(2d)` so every inner
//! sum lands in [1/4, 3/4] ⊂ [0,1], where a σ junction is the identity. Outer
//! functions become `g_i(z) = g̃_i(4Mz − 2M)`. Each of the (d+1)(2d+1) pieces is
//! a width-36 depth-5 approximator. The assembly has width 36d(2d+1) and depth 11.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::activation::ActivationKind;
use crate::approx1d::{
    affine_fit, build_exact_affine, build_interval_approx, empirical_modulus, Approx1DError, Approx1DOptions,
    Approx1DReport, ErrorSplit, Eval1, Target1D,
};
use crate::network::{AffineLayer, Branch, Domain, Network, NetworkError, ParamCount};
use crate::sampling::{domain_points, linspace};

pub type EvalN = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

pub const VERIFY_POINTS: usize = 10_000;
const NORM_GRID: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApproxNdError {
    #[error("malformed decomposition: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("inner function ({i},{j}): {source}")]
    Inner { i: usize, j: usize, source: Approx1DError },
    #[error("outer function {i}: {source}")]
    Outer { i: usize, source: Approx1DError },
    #[error("inner sum {i} left [0,1]: observed [{lo}, {hi}]")]
    Junction { i: usize, lo: f64, hi: f64 },
    #[error("grid verification failed: sup error {sup:.6e} is not below {epsilon}")]
    Verification { sup: f64, epsilon: f64 },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Inner functions `h̃_ij` on [0,1] ((2d+1)×d of them) and outer functions `g̃_i` on ℝ.
#[derive(Clone)]
pub struct KstDecomposition {
    d: usize,
    inner: Vec<Vec<Eval1>>,
    outer: Vec<Eval1>,
}

impl std::fmt::Debug for KstDecomposition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KstDecomposition").field("d", &self.d).finish_non_exhaustive()
    }
}

fn zero() -> Eval1 {
    Arc::new(|_| 0.0)
}

/// `t ↦ a + (b−a)t`, the coordinate of [a,b] at unit position t.
fn lift(a: f64, b: f64) -> Eval1 {
    Arc::new(move |t| a + (b - a) * t)
}

impl KstDecomposition {
    pub fn new(d: usize, inner: Vec<Vec<Eval1>>, outer: Vec<Eval1>) -> Result<Self, ApproxNdError> {
        if d == 0 {
            return Err(ApproxNdError::Shape("dimension must be at least 1".into()));
        }
        if inner.len() != 2 * d + 1 || outer.len() != 2 * d + 1 {
            return Err(ApproxNdError::Shape(format!(
                "need {} inner rows and outer functions, got {} and {}",
                2 * d + 1,
                inner.len(),
                outer.len()
            )));
        }
        if let Some(i) = inner.iter().position(|row| row.len() != d) {
            return Err(ApproxNdError::Shape(format!("inner row {i} has {} entries, expected {d}", inner[i].len())));
        }
        Ok(Self { d, inner, outer })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> usize {
        2 * self.d + 1
    }

    /// `Σ_i g̃_i(Σ_j h̃_ij(t_j))` at a point of [0,1]^d.
    pub fn eval(&self, t: &[f64]) -> f64 {
        self.inner
            .iter()
            .zip(&self.outer)
            .map(|(row, g)| g(row.iter().zip(t).map(|(h, x)| h(*x)).sum()))
            .sum()
    }

    /// `x₁ + … + x_d` on [a,b]^d: one identity outer function.
    pub fn sum(d: usize, a: f64, b: f64) -> Self {
        let mut inner = vec![vec![zero(); d]; 2 * d + 1];
        inner[0] = (0..d).map(|_| lift(a, b)).collect();
        let mut outer = vec![zero(); 2 * d + 1];
        outer[0] = Arc::new(|t| t);
        Self { d, inner, outer }
    }

    /// `x₁x₂ = ((x₁+x₂)² − x₁² − x₂²)/2` on [a,b]².
    pub fn product(a: f64, b: f64) -> Self {
        let id = || lift(a, b);
        let mut inner = vec![vec![zero(); 2]; 5];
        inner[0] = vec![id(), id()];
        inner[1][0] = id();
        inner[2][1] = id();
        let mut outer = vec![zero(); 5];
        outer[0] = Arc::new(|t| t * t / 2.0);
        outer[1] = Arc::new(|t| -t * t / 2.0);
        outer[2] = Arc::new(|t| -t * t / 2.0);
        Self { d: 2, inner, outer }
    }

    /// d = 1 with `h̃ = t` and a single outer function.
    pub fn trivial(g: Eval1) -> Self {
        let mut inner = vec![vec![zero()]; 3];
        inner[0][0] = Arc::new(|x| x);
        let mut outer = vec![zero(); 3];
        outer[0] = g;
        Self { d: 1, inner, outer }
    }
}

/// Largest `|f − Σ g̃_i(Σ h̃_ij)|` over `samples` quasi-random points of [a,b]^d.
pub fn kst_sanity(kst: &KstDecomposition, f: &EvalN, a: f64, b: f64, samples: usize) -> f64 {
    let pts = domain_points(&Domain::cube(0.0, 1.0, kst.d), samples);
    pts.par_iter()
        .map(|t| {
            let x: Vec<f64> = t.iter().map(|v| a + (b - a) * v).collect();
            (f(&x) - kst.eval(t)).abs()
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct NdOptions {
    pub split: ErrorSplit,
    pub budget: u64,
    /// d = 1 only: closed intervals of [a,b] where accuracy is required.
    pub care: Option<Vec<[f64; 2]>>,
}

impl Default for NdOptions {
    fn default() -> Self {
        Self { split: ErrorSplit::Tight, budget: 1_000_000_000, care: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PieceReport {
    pub exact_affine: bool,
    pub k: usize,
    pub epsilon: f64,
    pub grid_sup_error: f64,
    pub pointfit_evaluations: u64,
}

impl PieceReport {
    fn from(r: &Approx1DReport, epsilon: f64) -> Self {
        Self {
            exact_affine: r.components.is_empty() && r.k == 0,
            k: r.k,
            epsilon,
            grid_sup_error: r.grid_sup_error,
            pointfit_evaluations: r.pointfit_evaluations,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NdReport {
    pub d: usize,
    pub width: usize,
    pub depth: usize,
    pub params: ParamCount,
    /// `5437(d+1)(2d+1)`.
    pub nonzero_bound: usize,
    pub m: f64,
    pub grid_sup_error: f64,
    pub verified_points: usize,
    pub junction_ranges: Vec<[f64; 2]>,
    pub inner: Vec<Vec<PieceReport>>,
    pub outer: Vec<PieceReport>,
}

fn sup_norm(f: &Eval1) -> f64 {
    linspace(0.0, 1.0, NORM_GRID + 1).into_iter().fold(0.0f64, |m, x| m.max(f(x).abs()))
}

/// Largest δ = 2^{-n}·(1/4) with `ω_g(δ) < tol` on [0,1].
fn continuity_radius(g: &Eval1, tol: f64) -> f64 {
    let samples: Vec<f64> = linspace(0.0, 1.0, 100_001).into_iter().map(|z| g(z)).collect();
    let mut delta: f64 = 0.25;
    while delta > 1e-9 {
        if empirical_modulus(&samples, (1.0 / delta).ceil() as usize) < tol {
            return delta;
        }
        delta /= 2.0;
    }
    delta
}

/// Selector `x ↦ x_j` from ℝ^d.
fn selector(d: usize, j: usize) -> AffineLayer {
    let mut w = vec![0.0; d];
    w[j] = 1.0;
    AffineLayer::new(d, w, vec![0.0]).expect("shape")
}

fn build_piece(target: &Target1D, epsilon: f64, split: ErrorSplit, budget: u64, care: Option<Vec<[f64; 2]>>) -> Result<Approx1DReport, Approx1DError> {
    let f = target.f.clone();
    if split == ErrorSplit::Tight && affine_fit(&move |x| f(x), target.a, target.b).is_some() {
        return build_exact_affine(target);
    }
    let opts = Approx1DOptions { split, budget, care, ..Approx1DOptions::default() };
    build_interval_approx(target, epsilon, &opts)
}

/// Assemble the width-36d(2d+1), depth-11 network approximating f on [a,b]^d.
pub fn assemble(
    f: &EvalN,
    a: f64,
    b: f64,
    kst: &KstDecomposition,
    epsilon: f64,
    opts: &NdOptions,
) -> Result<(Network, NdReport), ApproxNdError> {
    let d = kst.d;
    let terms = kst.terms();
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(ApproxNdError::Parameter(format!("need finite a < b, got [{a}, {b}]")));
    }
    if !(epsilon > 0.0) {
        return Err(ApproxNdError::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if opts.care.is_some() && d != 1 {
        return Err(ApproxNdError::Parameter("care regions are supported for d = 1 only".into()));
    }
    let m = kst.inner.iter().map(|row| row.iter().map(sup_norm).sum::<f64>()).fold(0.0, f64::max) + 1.0;
    let span = b - a;

    let inner_targets: Vec<Vec<Target1D>> = kst
        .inner
        .iter()
        .map(|row| {
            row.iter()
                .map(|h| {
                    let h = h.clone();
                    let shift = 1.0 / (2.0 * d as f64);
                    Target1D::new(move |x| h((x - a) / span) / (4.0 * m) + shift, a, b).expect("a < b")
                })
                .collect()
        })
        .collect();
    let outer_fns: Vec<Eval1> = kst
        .outer
        .iter()
        .map(|g| {
            let g = g.clone();
            Arc::new(move |z: f64| g(4.0 * m * z - 2.0 * m)) as Eval1
        })
        .collect();

    let inner_affine: Vec<Vec<bool>> = inner_targets
        .iter()
        .map(|row| {
            row.iter()
                .map(|t| {
                    let f = t.f.clone();
                    opts.split == ErrorSplit::Tight && affine_fit(&move |x| f(x), a, b).is_some()
                })
                .collect()
        })
        .collect();
    let outer_affine: Vec<bool> = outer_fns
        .iter()
        .map(|g| {
            let g = g.clone();
            opts.split == ErrorSplit::Tight && affine_fit(&move |z| g(z), 0.0, 1.0).is_some()
        })
        .collect();

    // tolerances
    let (outer_eps, inner_eps): (Vec<f64>, Vec<f64>) = match opts.split {
        ErrorSplit::Fixed => {
            let e = epsilon / (4.0 * d as f64 + 2.0);
            let delta = outer_fns.iter().map(|g| continuity_radius(g, e)).fold(0.25, f64::min);
            (vec![e; terms], vec![delta / d as f64; terms])
        }
        ErrorSplit::Tight => {
            let active = outer_affine.iter().filter(|x| !**x).count().max(1) as f64;
            (0..terms)
                .map(|i| {
                    if inner_affine[i].iter().all(|x| *x) {
                        (0.95 * epsilon / active, 1.0)
                    } else {
                        let e = 0.95 * epsilon / (2.0 * terms as f64);
                        let delta = continuity_radius(&outer_fns[i], e);
                        (e, delta / d as f64)
                    }
                })
                .unzip()
        }
    };

    let inner_reports: Vec<Vec<Approx1DReport>> = inner_targets
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            row.par_iter()
                .enumerate()
                .map(|(j, t)| {
                    build_piece(t, inner_eps[i], opts.split, opts.budget, None)
                        .map_err(|source| ApproxNdError::Inner { i, j, source })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;

    // ψ_i = Σ_j ψ_ij(x_j)
    let psi: Vec<Network> = inner_reports
        .iter()
        .map(|row| {
            let lifted: Vec<Network> = row
                .iter()
                .enumerate()
                .map(|(j, r)| r.network.precompose(&selector(d, j)))
                .collect::<Result<_, _>>()?;
            let branches: Vec<Branch> = lifted.iter().map(Branch::new).collect();
            Ok(Network::sum(&branches, &vec![1.0; d])?.with_domain(Some(Domain::cube(a, b, d))))
        })
        .collect::<Result<_, NetworkError>>()?;

    let points: Vec<Vec<f64>> = match &opts.care {
        Some(care) => {
            let lens: f64 = care.iter().map(|iv| (iv[1] - iv[0]).max(0.0)).sum();
            care.iter()
                .flat_map(|iv| {
                    let share = if lens > 0.0 { (iv[1] - iv[0]) / lens } else { 1.0 / care.len() as f64 };
                    linspace(iv[0], iv[1], ((VERIFY_POINTS as f64 * share) as usize).max(2))
                })
                .map(|x| vec![x])
                .collect()
        }
        None => domain_points(&Domain::cube(a, b, d), VERIFY_POINTS),
    };

    // observed ranges of the inner sums, which must sit inside [0,1]
    let mut junction_ranges = Vec::with_capacity(terms);
    for (i, net) in psi.iter().enumerate() {
        let vals = net.eval_points(&points);
        let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
        if !(lo >= 0.0 && hi <= 1.0) {
            return Err(ApproxNdError::Junction { i, lo, hi });
        }
        junction_ranges.push([lo, hi]);
    }

    let outer_reports: Vec<Approx1DReport> = outer_fns
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let target = Target1D::from_arc(g.clone(), 0.0, 1.0).expect("unit interval");
            let care = match opts.split {
                ErrorSplit::Fixed => None,
                ErrorSplit::Tight => {
                    let margin = if inner_affine[i].iter().all(|x| *x) { 1e-9 } else { inner_eps[i] * d as f64 };
                    let sub: Vec<[f64; 2]> = match &opts.care {
                        // per care interval, so gaps between regions stay free
                        Some(care) => care
                            .iter()
                            .map(|iv| {
                                let vals = psi[i].eval_points(&linspace(iv[0], iv[1], 257).into_iter().map(|x| vec![x]).collect::<Vec<_>>());
                                let (l, h) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
                                [(l - margin).max(0.0), (h + margin).min(1.0)]
                            })
                            .collect(),
                        None => vec![[(junction_ranges[i][0] - margin).max(0.0), (junction_ranges[i][1] + margin).min(1.0)]],
                    };
                    Some(sub)
                }
            };
            build_piece(&target, outer_eps[i], opts.split, opts.budget, care).map_err(|source| ApproxNdError::Outer { i, source })
        })
        .collect::<Result<_, _>>()?;

    let term_nets: Vec<Network> = outer_reports
        .iter()
        .zip(&psi)
        .map(|(outer, inner)| Network::compose_with_junction(&outer.network, inner, ActivationKind::Euaf))
        .collect::<Result<_, _>>()?;
    let branches: Vec<Branch> = term_nets.iter().map(Branch::new).collect();
    let network = Network::sum(&branches, &vec![1.0; terms])?.with_domain(Some(Domain::cube(a, b, d)));

    let vals = network.eval_points(&points);
    let sup = points
        .iter()
        .zip(vals)
        .map(|(x, v)| (v - f(x)).abs())
        .fold(0.0, |m: f64, e| if e.is_nan() { f64::INFINITY } else { m.max(e) });
    if !(sup < epsilon) {
        return Err(ApproxNdError::Verification { sup, epsilon });
    }
    let report = NdReport {
        d,
        width: network.width(),
        depth: network.depth(),
        params: network.count_params(),
        nonzero_bound: 5437 * (d + 1) * (2 * d + 1),
        m,
        grid_sup_error: sup,
        verified_points: points.len(),
        junction_ranges,
        inner: inner_reports
            .iter()
            .zip(&inner_eps)
            .map(|(row, e)| row.iter().map(|r| PieceReport::from(r, *e)).collect())
            .collect(),
        outer: outer_reports.iter().zip(&outer_eps).map(|(r, e)| PieceReport::from(r, *e)).collect(),
    };
    Ok((network, report))
}

/// Built-in targets with decompositions matching them on [a,b]^d: `sum` (any d) and `product` (d = 2).
pub fn builtin(name: &str, d: usize, a: f64, b: f64) -> Result<(EvalN, KstDecomposition), ApproxNdError> {
    match (name, d) {
        ("sum", d) if d >= 1 => Ok((Arc::new(|x: &[f64]| x.iter().sum()), KstDecomposition::sum(d, a, b))),
        ("product", 2) => Ok((Arc::new(|x: &[f64]| x[0] * x[1]), KstDecomposition::product(a, b))),
        ("product", d) => Err(ApproxNdError::Parameter(format!("the product target is two-dimensional, got d = {d}"))),
        (other, _) => Err(ApproxNdError::Parameter(format!("unknown target `{other}` (expected sum or product)"))),
    }
}
