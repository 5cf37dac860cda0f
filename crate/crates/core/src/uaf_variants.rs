//! Smooth and sigmoidal relatives of σ, and substituting them into EUAF networks.
//!
//! * ρ_s is the s-fold antiderivative of σ from 0. On x ≥ 0 it is a polynomial
//!   plus a period-2 piecewise polynomial; on x < 0 it is `A(u) + B(u)·ln u`
//!   with `u = 1 − x` and polynomials A, B. Both are built by exact recursion.
//! * σ̃(x) = x/(1−x) on x ≤ 0 and `∫₀ˣ (cσ(t)+1)/(2t+1)² dt` on x > 0, with c
//!   chosen so that σ̃(∞) = 1. Each unit interval has a closed-form integral.

use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::activation::{euaf, ActivationKind};
use crate::network::{AffineLayer, Branch, Domain, Network, NetworkError};
use crate::sampling::domain_points;

pub const MAX_SMOOTH_ORDER: u32 = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UafError {
    #[error("smooth order {0} outside 1..={MAX_SMOOTH_ORDER}")]
    Order(u32),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("δ fell below {min:e} with best sup difference {best_sup:e}")]
    DeltaUnderflow { min: f64, best_sup: f64 },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Antiderivative vanishing at 0.
fn integrate(coeffs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0];
    out.extend(coeffs.iter().enumerate().map(|(n, c)| c / (n + 1) as f64));
    out
}

fn add_const(mut p: Vec<f64>, c: f64) -> Vec<f64> {
    if p.is_empty() {
        p.push(0.0);
    }
    p[0] += c;
    p
}

/// ρ_s as polynomial tables.
#[derive(Debug, Clone)]
pub struct SmoothTable {
    pub s: u32,
    /// Aperiodic part on x ≥ 0, ascending powers of x.
    pub poly: Vec<f64>,
    /// Zero-mean periodic part on [0,1] and [1,2], ascending powers of the local offset.
    pub periodic: [Vec<f64>; 2],
    /// `A` and `B` on x < 0, ascending powers of u = 1 − x.
    pub neg_a: Vec<f64>,
    pub neg_b: Vec<f64>,
}

impl SmoothTable {
    pub fn eval(&self, x: f64) -> f64 {
        if x >= 0.0 {
            let y = x - 2.0 * (x * 0.5).floor();
            let (piece, t) = if y < 1.0 { (0, y) } else { (1, y - 1.0) };
            horner(&self.poly, x) + horner(&self.periodic[piece], t)
        } else {
            let u = 1.0 - x;
            horner(&self.neg_a, u) + horner(&self.neg_b, u) * u.ln()
        }
    }

    fn next(&self) -> SmoothTable {
        let q0 = integrate(&self.periodic[0]);
        let q0_end = horner(&q0, 1.0);
        let q1 = add_const(integrate(&self.periodic[1]), q0_end);
        let mean = 0.5 * (horner(&integrate(&q0), 1.0) + horner(&integrate(&q1), 1.0));
        let poly = add_const(integrate(&self.poly), mean);
        let periodic = [add_const(q0, -mean), add_const(q1, -mean)];

        // ∫ vⁿ ln v dv = vⁿ⁺¹ ln v/(n+1) − vⁿ⁺¹/(n+1)², and dx = −du.
        let a_bar = integrate(&self.neg_a);
        let b_bar = integrate(&self.neg_b);
        let mut c = vec![0.0];
        c.extend(self.neg_b.iter().enumerate().map(|(n, b)| b / ((n + 1) * (n + 1)) as f64));
        let len = a_bar.len().max(c.len());
        let mut neg_a: Vec<f64> = (0..len)
            .map(|i| -a_bar.get(i).copied().unwrap_or(0.0) + c.get(i).copied().unwrap_or(0.0))
            .collect();
        let at_one = horner(&neg_a, 1.0);
        neg_a[0] -= at_one;
        let neg_b = b_bar.iter().map(|b| -b).collect();
        SmoothTable { s: self.s + 1, poly, periodic, neg_a, neg_b }
    }
}

fn smooth_tables() -> &'static [SmoothTable] {
    static TABLES: OnceLock<Vec<SmoothTable>> = OnceLock::new();
    TABLES.get_or_init(|| {
        // σ on x ≥ 0 is 1/2 plus a zero-mean triangle wave.
        let sigma = SmoothTable {
            s: 0,
            poly: vec![0.5],
            periodic: [vec![-0.5, 1.0], vec![0.5, -1.0]],
            neg_a: Vec::new(),
            neg_b: Vec::new(),
        };
        // ρ₁ = (u − 1) − ln u on x < 0
        let mut first = sigma.next();
        first.neg_a = vec![-1.0, 1.0];
        first.neg_b = vec![-1.0];
        let mut out = vec![first];
        while out.len() < MAX_SMOOTH_ORDER as usize {
            let n = out.last().expect("non-empty").next();
            out.push(n);
        }
        out
    })
}

pub fn smooth_table(s: u32) -> Result<&'static SmoothTable, UafError> {
    if (1..=MAX_SMOOTH_ORDER).contains(&s) {
        Ok(&smooth_tables()[s as usize - 1])
    } else {
        Err(UafError::Order(s))
    }
}

/// ρ_s(x); `s = 0` is σ itself.
pub fn eval_smooth(s: u32, x: f64) -> Result<f64, UafError> {
    if s == 0 {
        return Ok(euaf(x));
    }
    Ok(smooth_table(s)?.eval(x))
}

pub(crate) fn smooth(s: u32, x: f64) -> f64 {
    if s == 0 {
        euaf(x)
    } else {
        smooth_tables()[s as usize - 1].eval(x)
    }
}

pub(crate) fn smooth_slope(s: u32, x: f64) -> f64 {
    smooth(s - 1, x)
}

// ---------------------------------------------------------------------------
// sigmoidal σ̃

/// Exact ∫_{lo}^{hi} σ(t)/(2t+1)² dt for lo, hi in one unit interval [n, n+1].
fn unit_integral(n: u64, lo: f64, hi: f64) -> f64 {
    // σ(t) = αt + β there; with u = 2t+1 the antiderivative is
    // (α/4)·ln u − (β − α/2)/(2u).
    let (alpha, beta) = if n.is_multiple_of(2) { (1.0, -(n as f64)) } else { (-1.0, n as f64 + 1.0) };
    let (u0, u1) = (2.0 * lo + 1.0, 2.0 * hi + 1.0);
    let log_part = (2.0 * (hi - lo) / u0).ln_1p();
    let inv_diff = -2.0 * (hi - lo) / (u0 * u1);
    alpha / 4.0 * log_part - (beta - alpha / 2.0) / 2.0 * inv_diff
}

/// ∫_N^∞ σ/(2t+1)² for even N, to O(N⁻⁵).
fn tail(n_even: u64) -> f64 {
    let u = 2.0 * n_even as f64 + 1.0;
    1.0 / (4.0 * u) - 1.0 / (6.0 * u * u * u)
}

/// c from the first `cutoff` unit intervals (rounded up to even) plus the tail.
pub fn compute_c_with_cutoff(cutoff: u64) -> f64 {
    let n = cutoff + cutoff % 2;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for k in 0..n {
        let y = unit_integral(k, k as f64, k as f64 + 1.0) - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    1.0 / (2.0 * (sum + tail(n)))
}

/// `c = 1 / (2∫₀^∞ σ(t)/(2t+1)² dt)`.
pub fn compute_c() -> f64 {
    sigmoidal_cache().c
}

const PREFIX_LEN: u64 = 1 << 16;

#[derive(Debug)]
pub struct SigmoidalCache {
    pub c: f64,
    /// ∫₀^∞ σ/(2t+1)².
    pub integral: f64,
    prefix: Vec<f64>,
}

impl SigmoidalCache {
    fn build() -> Self {
        let mut prefix = Vec::with_capacity(PREFIX_LEN as usize + 1);
        prefix.push(0.0);
        let (mut sum, mut comp) = (0.0, 0.0);
        for k in 0..PREFIX_LEN {
            let y = unit_integral(k, k as f64, k as f64 + 1.0) - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            prefix.push(sum);
        }
        let integral = sum + tail(PREFIX_LEN);
        Self { c: 1.0 / (2.0 * integral), integral, prefix }
    }

    /// ∫₀ˣ σ/(2t+1)² for x ≥ 0.
    fn partial(&self, x: f64) -> f64 {
        let n = x.floor();
        if n < PREFIX_LEN as f64 {
            let k = n as u64;
            self.prefix[k as usize] + unit_integral(k, n, x)
        } else {
            let k = n as u64;
            let even = k + k % 2 + 2;
            let mut rest = unit_integral(k, x, n + 1.0);
            for j in k + 1..even {
                rest += unit_integral(j, j as f64, j as f64 + 1.0);
            }
            self.integral - rest - tail(even)
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            x / (1.0 - x)
        } else {
            self.c * self.partial(x) + x / (2.0 * x + 1.0)
        }
    }

    pub fn slope(&self, x: f64) -> f64 {
        if x <= 0.0 {
            let d = 1.0 - x;
            1.0 / (d * d)
        } else {
            let u = 2.0 * x + 1.0;
            (self.c * euaf(x) + 1.0) / (u * u)
        }
    }
}

pub fn sigmoidal_cache() -> &'static SigmoidalCache {
    static CACHE: OnceLock<SigmoidalCache> = OnceLock::new();
    CACHE.get_or_init(SigmoidalCache::build)
}

/// σ̃(x).
pub fn eval_sigmoidal(x: f64) -> f64 {
    sigmoidal_cache().eval(x)
}

pub(crate) fn sigmoidal(x: f64) -> f64 {
    sigmoidal_cache().eval(x)
}

pub(crate) fn sigmoidal_slope(x: f64) -> f64 {
    sigmoidal_cache().slope(x)
}

// ---------------------------------------------------------------------------
// substitution

type Approximant = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// An EUAF network evaluated with every EUAF neuron replaced by `ρ_δ`.
pub struct SubstitutedNet {
    pub net: Network,
    pub delta: f64,
    pub sup_diff: f64,
    approximant: Approximant,
}

impl SubstitutedNet {
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        eval_replaced(&self.net, x, &|z| (self.approximant)(self.delta, z))
    }
}

fn eval_replaced(net: &Network, x: &[f64], rho: &dyn Fn(f64) -> f64) -> Vec<f64> {
    let mut a = x.to_vec();
    let mut b = Vec::new();
    for (i, layer) in net.layers().iter().enumerate() {
        layer.apply_into(&a, &mut b);
        if let Some(acts) = net.activations().get(i) {
            for (v, act) in b.iter_mut().zip(acts) {
                *v = if *act == ActivationKind::Euaf { rho(*v) } else { act.apply(*v) };
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a
}

const MIN_DELTA: f64 = 1e-12;
const CHECK_POINTS: usize = 10_000;

fn sup_diff(net: &Network, points: &[Vec<f64>], exact: &[f64], rho: &(dyn Fn(f64) -> f64 + Sync)) -> f64 {
    use rayon::prelude::*;
    points
        .par_iter()
        .zip(exact)
        .map(|(p, e)| (eval_replaced(net, p, rho)[0] - e).abs())
        .reduce(|| 0.0, f64::max)
}

/// Halve δ from 1 until the substituted network is within ε/2 of the
/// original on 10⁴ points of its domain.
pub fn substitute_activation(
    net: &Network,
    approximant: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    epsilon: f64,
) -> Result<SubstitutedNet, UafError> {
    let domain = net
        .domain()
        .cloned()
        .ok_or_else(|| UafError::Parameter("substitution needs a declared domain".into()))?;
    let points = domain_points(&domain, CHECK_POINTS);
    let exact = net.eval_points(&points);
    let mut delta = 1.0;
    let mut best = f64::INFINITY;
    while delta >= MIN_DELTA {
        let d = delta;
        let diff = sup_diff(net, &points, &exact, &|z| approximant(d, z));
        best = best.min(diff);
        if diff < epsilon / 2.0 {
            return Ok(SubstitutedNet { net: net.clone(), delta, sup_diff: diff, approximant: Box::new(approximant) });
        }
        delta /= 2.0;
    }
    Err(UafError::DeltaUnderflow { min: MIN_DELTA, best_sup: best })
}

/// `(1/δ^s) Σ_j (−1)^{s−j} C(s,j) ρ_s(z + jδ)`, which tends to σ(z) as δ → 0.
pub fn smooth_difference(s: u32, delta: f64, z: f64) -> f64 {
    let mut acc = 0.0;
    let mut binom = 1.0;
    for j in 0..=s {
        let sign = if (s - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        acc += sign * binom * smooth(s, z + j as f64 * delta);
        binom = binom * (s - j) as f64 / (j + 1) as f64;
    }
    acc / delta.powi(s as i32)
}

/// The ρ_s-activated network obtained by expanding every EUAF neuron into 2s
/// slots (s+1 used) carrying `ρ_s(z + jδ)`, combined by the next layer.
pub fn smooth_network(net: &Network, s: u32, delta: f64) -> Result<Network, UafError> {
    if !(1..=MAX_SMOOTH_ORDER).contains(&s) {
        return Err(UafError::Order(s));
    }
    let slots = 2 * s as usize;
    let kind = ActivationKind::Smooth(s);
    let mut binoms = vec![1.0; s as usize + 1];
    for j in 1..=s as usize {
        binoms[j] = binoms[j - 1] * (s as usize + 1 - j) as f64 / j as f64;
    }
    let coeff: Vec<f64> = (0..slots)
        .map(|j| {
            if j > s as usize {
                0.0
            } else {
                let sign = if (s as usize - j).is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * binoms[j] / delta.powi(s as i32)
            }
        })
        .collect();

    // For each neuron of the previous hidden layer, the expanded slots feeding
    // the next layer with their combination coefficients.
    let mut layers = Vec::with_capacity(net.layers().len());
    let mut acts = Vec::with_capacity(net.depth());
    let mut prev: Option<(usize, Vec<Vec<(usize, f64)>>)> = None;
    for (li, layer) in net.layers().iter().enumerate() {
        let (cols, col_map) = match prev.take() {
            None => (layer.in_dim(), (0..layer.in_dim()).map(|c| vec![(c, 1.0)]).collect::<Vec<_>>()),
            Some(p) => p,
        };
        let hidden = li < net.depth();
        let mut rows_w: Vec<Vec<f64>> = Vec::new();
        let mut bias = Vec::new();
        let mut tags = Vec::new();
        let mut this_map = Vec::with_capacity(layer.out_dim());
        for r in 0..layer.out_dim() {
            let mut base = vec![0.0; cols];
            for (c, targets) in col_map.iter().enumerate() {
                let w = layer.weight(r, c);
                if w != 0.0 {
                    for &(slot, k) in targets {
                        base[slot] += w * k;
                    }
                }
            }
            let b = layer.bias()[r];
            match hidden.then(|| net.activations()[li][r]) {
                Some(ActivationKind::Euaf) => {
                    let start = rows_w.len();
                    let mut slots_used = Vec::with_capacity(s as usize + 1);
                    for (j, k) in coeff.iter().enumerate() {
                        if *k != 0.0 {
                            rows_w.push(base.clone());
                            bias.push(b + j as f64 * delta);
                            slots_used.push((start + j, *k));
                        } else {
                            rows_w.push(vec![0.0; cols]);
                            bias.push(0.0);
                        }
                        tags.push(kind);
                    }
                    this_map.push(slots_used);
                }
                Some(other) => {
                    this_map.push(vec![(rows_w.len(), 1.0)]);
                    rows_w.push(base);
                    bias.push(b);
                    tags.push(other);
                }
                None => {
                    rows_w.push(base);
                    bias.push(b);
                }
            }
        }
        let width = rows_w.len();
        layers.push(AffineLayer::from_rows(&rows_w, bias)?);
        if hidden {
            acts.push(tags);
            prev = Some((width, this_map));
        }
    }
    Ok(Network::new(net.input_dim(), layers, acts, net.domain().cloned())?)
}

#[derive(Debug, Serialize)]
pub struct SmoothReport {
    pub network: Network,
    pub delta: f64,
    pub sup_diff: f64,
}

/// Halve δ from 1 until the explicit ρ_s network is within ε/2 of `net` on
/// 10⁴ points of its domain.
pub fn smooth_substitute(net: &Network, s: u32, epsilon: f64) -> Result<SmoothReport, UafError> {
    let domain = net
        .domain()
        .cloned()
        .ok_or_else(|| UafError::Parameter("substitution needs a declared domain".into()))?;
    let points = domain_points(&domain, CHECK_POINTS);
    let exact = net.eval_points(&points);
    let mut delta = 1.0;
    let mut best = f64::INFINITY;
    while delta >= MIN_DELTA {
        let candidate = smooth_network(net, s, delta)?;
        let vals = candidate.eval_points(&points);
        let diff = vals.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        best = best.min(diff);
        if diff < epsilon / 2.0 {
            return Ok(SmoothReport { network: candidate, delta, sup_diff: diff });
        }
        delta /= 2.0;
    }
    Err(UafError::DeltaUnderflow { min: MIN_DELTA, best_sup: best })
}

// ---------------------------------------------------------------------------
// σ approximated by a σ̃ network

use ActivationKind::{Identity as Id, Sigmoidal as Sig};

fn rows(r: &[&[f64]]) -> Vec<Vec<f64>> {
    r.iter().map(|v| v.to_vec()).collect()
}

/// x² on [−4, 4]: `90σ̃(1 − 90σ̃(−x−4) + 90σ̃(−x−5)) − 11x + 60`. Width 3, depth 2.
pub fn sigmoidal_square_net() -> Network {
    Network::new(
        1,
        vec![
            AffineLayer::from_rows(&rows(&[&[-1.0], &[-1.0], &[1.0]]), vec![-4.0, -5.0, 0.0]).expect("shape"),
            AffineLayer::from_rows(&rows(&[&[-90.0, 90.0, 0.0], &[0.0, 0.0, 1.0]]), vec![1.0, 0.0]).expect("shape"),
            AffineLayer::from_rows(&rows(&[&[90.0, -11.0]]), vec![60.0]).expect("shape"),
        ],
        vec![vec![Sig, Sig, Id], vec![Sig, Id]],
        Some(Domain::interval(-4.0, 4.0)),
    )
    .expect("well formed")
}

/// xy for |x|, |y| ≤ 4B by polarisation over three sigmoidal squares. Width 9, depth 2.
pub fn sigmoidal_product_net(b: f64) -> Network {
    let sq = sigmoidal_square_net();
    let k = 1.0 / (2.0 * b);
    let forms = [[k, k], [k, 0.0], [0.0, k]];
    let scale = 2.0 * b * b;
    let branches: Vec<Network> = forms
        .iter()
        .map(|f| sq.precompose(&AffineLayer::new(2, f.to_vec(), vec![0.0]).expect("shape")).expect("dims"))
        .collect();
    let refs: Vec<Branch> = branches.iter().map(Branch::new).collect();
    Network::sum(&refs, &[scale, -scale, -scale]).expect("equal depths")
}

#[derive(Debug, Serialize)]
pub struct SigmoidalApprox {
    pub network: Network,
    pub delta: f64,
    pub eta0: f64,
    pub sup_error: f64,
}

/// A σ̃-activated network of width 50 and depth 6 within ε of σ on [−M, M], M ≥ 2.
///
/// With ψ_δ = ((2x+1)²/c)·(σ̃(x+δ) − σ̃(x))/δ − 1/c ≈ σ on [0, M],
/// g̃ = x/2 + (M+1)/2·(1 − ψ_δ(x/(M+1) + 1)) ≈ ReLU and g = (g̃(x) − g̃(x−η₀))/η₀
/// a ramp, the output is `Γ(ψ_δ, g) + Γ(σ̃, 1 − g)`.
pub fn approximate_sigma_by_sigmoidal(m: f64, epsilon: f64) -> Result<SigmoidalApprox, UafError> {
    if !(m >= 2.0 && m.is_finite()) {
        return Err(UafError::Parameter(format!("M must be at least 2, got {m}")));
    }
    if !(epsilon > 0.0) {
        return Err(UafError::Parameter("epsilon must be positive".into()));
    }
    let cache = sigmoidal_cache();
    // η₀: |σ̃|, |σ| < ε/6 on [0, η₀]
    let mut eta0 = 0.5;
    loop {
        let probe = crate::sampling::linspace(0.0, eta0, 1001);
        if probe.iter().all(|&x| cache.eval(x).abs() < epsilon / 6.0 && euaf(x).abs() < epsilon / 6.0) {
            break;
        }
        eta0 /= 2.0;
    }
    let grid = crate::sampling::linspace(-m, m, CHECK_POINTS);
    let target: Vec<f64> = grid.iter().map(|&x| euaf(x)).collect();
    let mut delta = 0.5;
    let mut best = f64::INFINITY;
    while delta >= MIN_DELTA {
        let network = lemma_network(m, delta, eta0, cache.c)?;
        let vals = network.eval_grid(&grid);
        let sup = vals.iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        best = best.min(sup);
        if sup < epsilon {
            return Ok(SigmoidalApprox { network, delta, eta0, sup_error: sup });
        }
        delta /= 2.0;
    }
    Err(UafError::DeltaUnderflow { min: MIN_DELTA, best_sup: best })
}

fn lemma_network(m: f64, delta: f64, eta0: f64, c: f64) -> Result<Network, UafError> {
    let big = (m + 1.0) * (m + 1.0);
    let gamma = sigmoidal_product_net(big);
    let two_m1 = 2.0 * m + 1.0;

    // ψ_δ(x): square of t = (2x+1)/(2M+1) alongside (σ̃(x+δ) − σ̃(x))/δ.
    let square = sigmoidal_square_net().precompose(&AffineLayer::new(1, vec![2.0 / two_m1], vec![1.0 / two_m1])?)?;
    let diff = Network::new(
        1,
        vec![
            AffineLayer::new(1, vec![1.0, 1.0], vec![delta, 0.0])?,
            AffineLayer::new(2, vec![1.0 / delta, -1.0 / delta], vec![0.0])?,
        ],
        vec![vec![Sig, Sig]],
        None,
    )?
    .pad_identity(1);
    let pair = Network::parallel(&[Branch::new(&square), Branch::new(&diff)], false)?;
    let psi = Network::compose(&gamma, &pair)?.scale_output(two_m1 * two_m1 / c, -1.0 / c);

    // g̃(x) = x/2 + (M+1)/2 − (M+1)/2·ψ_δ(x/(M+1) + 1), with x carried on identity neurons.
    let inner = psi.precompose(&AffineLayer::new(1, vec![1.0 / (m + 1.0)], vec![1.0])?)?;
    let carry = Network::affine(AffineLayer::new(1, vec![1.0], vec![0.0])?).pad_identity(inner.depth());
    let g_tilde = Network::sum(&[Branch::new(&inner), Branch::new(&carry)], &[-(m + 1.0) / 2.0, 0.5])?
        .scale_output(1.0, (m + 1.0) / 2.0);
    let g_shift = g_tilde.precompose(&AffineLayer::new(1, vec![1.0], vec![-eta0])?)?;
    let ramp = Network::sum(&[Branch::new(&g_tilde), Branch::new(&g_shift)], &[1.0 / eta0, -1.0 / eta0])?;
    let one_minus_ramp = ramp.scale_output(-1.0, 1.0);

    let sig = Network::new(
        1,
        vec![AffineLayer::new(1, vec![1.0], vec![0.0])?, AffineLayer::new(1, vec![1.0], vec![0.0])?],
        vec![vec![Sig]],
        None,
    )?
    .pad_identity(psi.depth() - 1);

    let left = Network::compose(&gamma, &Network::parallel(&[Branch::new(&psi), Branch::new(&ramp)], false)?)?;
    let right = Network::compose(&gamma, &Network::parallel(&[Branch::new(&sig), Branch::new(&one_minus_ramp)], false)?)?;
    let out = Network::sum(&[Branch::new(&left), Branch::new(&right)], &[1.0, 1.0])?;
    Ok(out.with_domain(Some(Domain::interval(-m, m))))
}
