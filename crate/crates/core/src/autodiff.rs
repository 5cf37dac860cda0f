//! Reverse-mode gradients and a small SGD trainer.
//!
//! [`Tape`] is a general scalar tape. [`grad`] is the layerwise backward pass
//! used for training; the two agree to rounding. Activation derivatives use the
//! right-hand convention at kinks.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::activation::ActivationKind;
use crate::network::{AffineLayer, Network, NetworkError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutodiffError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown training target `{0}`")]
    UnknownTarget(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
struct Node {
    value: f64,
    parents: Vec<(usize, f64)>,
}

#[derive(Debug, Default, Clone)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, value: f64, parents: Vec<(usize, f64)>) -> Var {
        self.nodes.push(Node { value, parents });
        Var(self.nodes.len() - 1)
    }

    pub fn var(&mut self, value: f64) -> Var {
        self.push(value, Vec::new())
    }

    pub fn value(&self, v: Var) -> f64 {
        self.nodes[v.0].value
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) + self.value(b);
        self.push(v, vec![(a.0, 1.0), (b.0, 1.0)])
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let (x, y) = (self.value(a), self.value(b));
        self.push(x * y, vec![(a.0, y), (b.0, x)])
    }

    pub fn act(&mut self, kind: ActivationKind, a: Var) -> Var {
        let x = self.value(a);
        self.push(kind.apply(x), vec![(a.0, kind.slope(x))])
    }

    pub fn sum(&mut self, terms: &[Var]) -> Var {
        let v = terms.iter().map(|t| self.value(*t)).sum();
        self.push(v, terms.iter().map(|t| (t.0, 1.0)).collect())
    }

    /// d out / d node for every node.
    pub fn backward(&self, out: Var) -> Vec<f64> {
        let mut adj = vec![0.0; self.nodes.len()];
        adj[out.0] = 1.0;
        for i in (0..=out.0).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            for &(p, d) in &self.nodes[i].parents {
                adj[p] += a * d;
            }
        }
        adj
    }
}

/// Parameters in layer order, each layer's weights row-major then its bias.
pub fn flatten_params(net: &Network) -> Vec<f64> {
    net.layers().iter().flat_map(|l| l.weights().iter().chain(l.bias()).copied()).collect()
}

pub fn with_params(net: &Network, params: &[f64]) -> Result<Network, AutodiffError> {
    let expected: usize = net.layers().iter().map(|l| l.weights().len() + l.bias().len()).sum();
    if params.len() != expected {
        return Err(AutodiffError::Config(format!("expected {expected} parameters, got {}", params.len())));
    }
    let mut at = 0;
    let mut layers = Vec::with_capacity(net.layers().len());
    for l in net.layers() {
        let nw = l.weights().len();
        let w = params[at..at + nw].to_vec();
        let b = params[at + nw..at + nw + l.out_dim()].to_vec();
        at += nw + l.out_dim();
        layers.push(AffineLayer::new(l.in_dim(), w, b)?);
    }
    Ok(Network::new(net.input_dim(), layers, net.activations().to_vec(), net.domain().cloned())?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub output: f64,
    /// Flattened like [`flatten_params`].
    pub params: Vec<f64>,
    pub input: Vec<f64>,
}

/// Gradient of a scalar-output network through the generic tape.
pub fn tape_grad(net: &Network, x: &[f64]) -> Result<Gradient, AutodiffError> {
    if net.output_dim() != 1 || x.len() != net.input_dim() {
        return Err(AutodiffError::Config("tape_grad needs a scalar-output network and a matching input".into()));
    }
    let mut tape = Tape::new();
    let inputs: Vec<Var> = x.iter().map(|v| tape.var(*v)).collect();
    let mut param_vars = Vec::new();
    let mut cur = inputs.clone();
    for (li, layer) in net.layers().iter().enumerate() {
        let w: Vec<Var> = layer.weights().iter().map(|v| tape.var(*v)).collect();
        let b: Vec<Var> = layer.bias().iter().map(|v| tape.var(*v)).collect();
        param_vars.extend_from_slice(&w);
        param_vars.extend_from_slice(&b);
        let mut next = Vec::with_capacity(layer.out_dim());
        for r in 0..layer.out_dim() {
            let mut terms = vec![b[r]];
            for (c, xv) in cur.iter().enumerate() {
                terms.push(tape.mul(w[r * layer.in_dim() + c], *xv));
            }
            let z = tape.sum(&terms);
            next.push(match net.activations().get(li) {
                Some(acts) => tape.act(acts[r], z),
                None => z,
            });
        }
        cur = next;
    }
    let out = cur[0];
    let adj = tape.backward(out);
    Ok(Gradient {
        output: tape.value(out),
        params: param_vars.iter().map(|v| adj[v.0]).collect(),
        input: inputs.iter().map(|v| adj[v.0]).collect(),
    })
}

/// Layerwise reverse pass for a scalar-output network, scaled by `upstream`.
pub fn grad(net: &Network, x: &[f64], upstream: f64) -> Result<Gradient, AutodiffError> {
    if net.output_dim() != 1 || x.len() != net.input_dim() {
        return Err(AutodiffError::Config("grad needs a scalar-output network and a matching input".into()));
    }
    let mut g = Gradient { output: 0.0, params: vec![0.0; flatten_params(net).len()], input: vec![0.0; x.len()] };
    g.output = accumulate(net, x, upstream, &mut g.params, Some(&mut g.input));
    Ok(g)
}

/// Adds `upstream · ∂net(x)/∂θ` into `acc`; returns net(x).
fn accumulate(net: &Network, x: &[f64], upstream: f64, acc: &mut [f64], input_grad: Option<&mut Vec<f64>>) -> f64 {
    let layers = net.layers();
    let mut acts_in: Vec<Vec<f64>> = Vec::with_capacity(layers.len());
    let mut slopes: Vec<Vec<f64>> = Vec::with_capacity(layers.len());
    let mut cur = x.to_vec();
    let mut z = Vec::new();
    for (li, layer) in layers.iter().enumerate() {
        layer.apply_into(&cur, &mut z);
        acts_in.push(std::mem::take(&mut cur));
        match net.activations().get(li) {
            Some(kinds) => {
                slopes.push(z.iter().zip(kinds).map(|(v, k)| k.slope(*v)).collect());
                cur = z.iter().zip(kinds).map(|(v, k)| k.apply(*v)).collect();
            }
            None => {
                slopes.push(Vec::new());
                cur = z.clone();
            }
        }
    }
    let out = cur[0];
    let offsets: Vec<usize> = layers
        .iter()
        .scan(0, |at, l| {
            let o = *at;
            *at += l.weights().len() + l.bias().len();
            Some(o)
        })
        .collect();
    let mut delta = vec![upstream];
    for li in (0..layers.len()).rev() {
        let layer = &layers[li];
        if li < net.depth() {
            for (d, s) in delta.iter_mut().zip(&slopes[li]) {
                *d *= s;
            }
        }
        let (cols, off) = (layer.in_dim(), offsets[li]);
        let input = &acts_in[li];
        for (r, d) in delta.iter().enumerate() {
            if *d != 0.0 {
                for c in 0..cols {
                    acc[off + r * cols + c] += d * input[c];
                }
            }
            acc[off + layer.out_dim() * cols + r] += d;
        }
        let mut prev = vec![0.0; cols];
        for (r, d) in delta.iter().enumerate() {
            if *d != 0.0 {
                for (p, w) in prev.iter_mut().zip(layer.row(r)) {
                    *p += d * w;
                }
            }
        }
        delta = prev;
    }
    if let Some(ig) = input_grad {
        *ig = delta;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    #[default]
    Mse,
    Mae,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct Losses {
    pub mse: f64,
    pub mae: f64,
    pub max: f64,
}

/// MSE, MAE and MAX of predictions against targets.
pub fn losses(pred: &[f64], target: &[f64]) -> Losses {
    let n = pred.len().max(1) as f64;
    let mut l = Losses::default();
    for (p, t) in pred.iter().zip(target) {
        let e = p - t;
        l.mse += e * e / n;
        l.mae += e.abs() / n;
        l.max = l.max.max(e.abs());
    }
    l
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub decay: f64,
    pub decay_period: usize,
    pub seed: u64,
    pub loss: Loss,
    pub train_samples: usize,
    pub test_samples: usize,
    pub trace_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            steps: 2000,
            batch_size: 64,
            learning_rate: 0.1,
            decay: 0.9,
            decay_period: 200,
            seed: 7,
            loss: Loss::Mse,
            train_samples: 20_000,
            test_samples: 5_000,
            trace_every: 100,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), AutodiffError> {
        if self.steps == 0 || self.batch_size == 0 || self.decay_period == 0 || self.trace_every == 0 {
            return Err(AutodiffError::Config("steps, batch size, decay period and trace interval must be positive".into()));
        }
        if !(self.learning_rate > 0.0) || !(self.decay > 0.0) {
            return Err(AutodiffError::Config("learning rate and decay must be positive".into()));
        }
        if self.train_samples == 0 || self.test_samples == 0 {
            return Err(AutodiffError::Config("sample counts must be positive".into()));
        }
        Ok(())
    }

    /// `η₀·decay^⌊step/period⌋`.
    pub fn rate_at(&self, step: usize) -> f64 {
        self.learning_rate * self.decay.powi((step / self.decay_period) as i32)
    }
}

#[derive(Clone)]
pub struct TrainTarget {
    pub name: String,
    pub dim: usize,
    pub f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl TrainTarget {
    /// `sin8` = 0.6 sin 8x, `osc` = 0.6 sin 8x + 0.4 sin 16x, `osc2d` = 0.6 sin 8x₁ + 0.4 sin 16x₂.
    pub fn builtin(name: &str) -> Result<Self, AutodiffError> {
        let (dim, f): (usize, Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>) = match name {
            "sin8" => (1, Arc::new(|x: &[f64]| 0.6 * (8.0 * x[0]).sin())),
            "osc" => (1, Arc::new(|x: &[f64]| 0.6 * (8.0 * x[0]).sin() + 0.4 * (16.0 * x[0]).sin())),
            "osc2d" => (2, Arc::new(|x: &[f64]| 0.6 * (8.0 * x[0]).sin() + 0.4 * (16.0 * x[1]).sin())),
            other => return Err(AutodiffError::UnknownTarget(other.into())),
        };
        Ok(Self { name: name.into(), dim, f })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub train_mse: f64,
    pub test_mse: f64,
    pub test_mae: f64,
    pub test_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainReport {
    pub target: String,
    pub activation: ActivationKind,
    pub width: usize,
    pub depth: usize,
    pub trace: Vec<TraceRow>,
    pub initial_train_mse: f64,
    pub final_train_mse: f64,
    pub final_train: Losses,
    pub final_test: Losses,
    pub diverged: bool,
    pub network: Network,
}

/// Xavier-uniform weights, zero biases, `activation` on every hidden neuron.
pub fn init_network(input_dim: usize, width: usize, depth: usize, activation: ActivationKind, rng: &mut ChaCha8Rng) -> Network {
    let mut layers = Vec::with_capacity(depth + 1);
    let mut cols = input_dim;
    for l in 0..=depth {
        let rows = if l == depth { 1 } else { width };
        let bound = (6.0 / (rows + cols) as f64).sqrt();
        let w = (0..rows * cols).map(|_| rng.gen_range(-bound..bound)).collect();
        layers.push(AffineLayer::new(cols, w, vec![0.0; rows]).expect("shape"));
        cols = rows;
    }
    Network::new(input_dim, layers, vec![vec![activation; width]; depth], None).expect("well formed")
}

const DIVERGENCE: f64 = 1e6;

fn dataset(target: &TrainTarget, n: usize, rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<f64>) {
    let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..target.dim).map(|_| rng.gen::<f64>()).collect()).collect();
    let ys = xs.iter().map(|x| (target.f)(x)).collect();
    (xs, ys)
}

fn evaluate(net: &Network, xs: &[Vec<f64>], ys: &[f64]) -> Losses {
    let mut a = Vec::new();
    let mut b = Vec::new();
    let pred: Vec<f64> = xs.iter().map(|x| net.forward(x, &mut a, &mut b)[0]).collect();
    losses(&pred, ys)
}

/// Mini-batch SGD on samples drawn uniformly from [0,1]^d, single-threaded and seeded.
pub fn train_toy(
    target: &TrainTarget,
    width: usize,
    depth: usize,
    activation: ActivationKind,
    cfg: &TrainConfig,
) -> Result<TrainReport, AutodiffError> {
    cfg.validate()?;
    if width == 0 || depth == 0 || width > 80 || depth > 4 {
        return Err(AutodiffError::Config(format!("architecture must have 1 ≤ width ≤ 80 and 1 ≤ depth ≤ 4, got {width}×{depth}")));
    }
    if cfg.train_samples + cfg.test_samples > 100_000 {
        return Err(AutodiffError::Config("at most 10⁵ samples in total".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = init_network(target.dim, width, depth, activation, &mut rng);
    let (train_x, train_y) = dataset(target, cfg.train_samples, &mut rng);
    let (test_x, test_y) = dataset(target, cfg.test_samples, &mut rng);

    let mut params = flatten_params(&net);
    let mut trace = Vec::new();
    let record = |net: &Network, step: usize, trace: &mut Vec<TraceRow>| {
        let tr = evaluate(net, &train_x, &train_y);
        let te = evaluate(net, &test_x, &test_y);
        trace.push(TraceRow { step, train_mse: tr.mse, test_mse: te.mse, test_mae: te.mae, test_max: te.max });
        tr.mse
    };
    let initial = record(&net, 0, &mut trace);
    let mut diverged = false;
    let batch = cfg.batch_size.min(cfg.train_samples);
    let mut grads = vec![0.0; params.len()];
    for step in 1..=cfg.steps {
        let idx: Vec<usize> = (0..batch).map(|_| rng.gen_range(0..cfg.train_samples)).collect();
        let mut a = Vec::new();
        let mut b = Vec::new();
        let preds: Vec<f64> = idx.iter().map(|&i| net.forward(&train_x[i], &mut a, &mut b)[0]).collect();
        let errs: Vec<f64> = preds.iter().zip(&idx).map(|(p, &i)| p - train_y[i]).collect();
        let upstream: Vec<f64> = match cfg.loss {
            Loss::Mse => errs.iter().map(|e| 2.0 * e / batch as f64).collect(),
            Loss::Mae => errs.iter().map(|e| e.signum() / batch as f64).collect(),
            Loss::Max => {
                let worst = (0..batch).max_by(|&p, &q| errs[p].abs().total_cmp(&errs[q].abs())).unwrap_or(0);
                (0..batch).map(|j| if j == worst { errs[j].signum() } else { 0.0 }).collect()
            }
        };
        grads.iter_mut().for_each(|g| *g = 0.0);
        for (&i, u) in idx.iter().zip(&upstream) {
            if *u != 0.0 {
                accumulate(&net, &train_x[i], *u, &mut grads, None);
            }
        }
        let rate = cfg.rate_at(step - 1);
        for (p, g) in params.iter_mut().zip(&grads) {
            *p -= rate * g;
        }
        net = with_params(&net, &params)?;
        if step % cfg.trace_every == 0 || step == cfg.steps {
            let mse = record(&net, step, &mut trace);
            if !(mse <= DIVERGENCE) {
                diverged = true;
                break;
            }
        }
    }
    let final_train = evaluate(&net, &train_x, &train_y);
    let final_test = evaluate(&net, &test_x, &test_y);
    Ok(TrainReport {
        target: target.name.clone(),
        activation,
        width,
        depth,
        trace,
        initial_train_mse: initial,
        final_train_mse: final_train.mse,
        final_train,
        final_test,
        diverged,
        network: net,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_weight_gradient_is_input() {
        let net = Network::affine(AffineLayer::new(1, vec![2.0], vec![0.5]).unwrap());
        let g = grad(&net, &[3.0], 1.0).unwrap();
        assert_eq!(g.params, vec![3.0, 1.0]);
        assert_eq!(g.input, vec![2.0]);
    }

    #[test]
    fn square_gadget_slope() {
        let g = grad(&crate::gadgets::square_net(), &[0.5], 1.0).unwrap();
        assert!((g.input[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn three_sample_losses() {
        let l = losses(&[1.0, 2.0, 4.0], &[1.5, 2.0, 1.0]);
        assert!((l.mse - (0.25 + 0.0 + 9.0) / 3.0).abs() < 1e-15);
        assert!((l.mae - 3.5 / 3.0).abs() < 1e-15);
        assert_eq!(l.max, 3.0);
    }
}
