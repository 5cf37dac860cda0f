//! Layered networks `L_L ∘ act ∘ L_{L−1} ∘ … ∘ act ∘ L_0` with per-neuron activation tags.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::activation::ActivationKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("layer {layer}: {detail}")]
    Layer { layer: usize, detail: String },
    #[error("input has length {got}, network expects {expected}")]
    Input { expected: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    Mismatch(String),
    #[error("branch {branch} needs depth padding but declares no range bound")]
    MissingBound { branch: usize },
    #[error("malformed network document: {0}")]
    Parse(String),
}

/// `x ↦ W x + b`, dense row-major weights with a cached sparse view for evaluation.
#[derive(Debug, Clone)]
pub struct AffineLayer {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
}

impl PartialEq for AffineLayer {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.weights == other.weights && self.bias == other.bias
    }
}

impl AffineLayer {
    /// `weights` is row-major with `bias.len()` rows and `cols` columns.
    pub fn new(cols: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self, NetworkError> {
        let rows = bias.len();
        if weights.len() != rows * cols {
            return Err(NetworkError::Mismatch(format!(
                "{} weights for a {rows}×{cols} layer",
                weights.len()
            )));
        }
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in 0..rows {
            for c in 0..cols {
                if weights[r * cols + c] != 0.0 {
                    col_idx.push(c as u32);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self { rows, cols, weights, bias, row_ptr, col_idx })
    }

    pub fn from_rows(rows: &[Vec<f64>], bias: Vec<f64>) -> Result<Self, NetworkError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.len() != bias.len() {
            return Err(NetworkError::Mismatch(format!("{} weight rows but {} biases", rows.len(), bias.len())));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != cols) {
            return Err(NetworkError::Mismatch(format!("weight row {r} has the wrong length")));
        }
        Self::new(cols, rows.concat(), bias)
    }

    pub fn identity(n: usize) -> Self {
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            w[i * n + i] = 1.0;
        }
        Self::new(n, w, vec![0.0; n]).expect("square identity")
    }

    pub fn out_dim(&self) -> usize {
        self.rows
    }

    pub fn in_dim(&self) -> usize {
        self.cols
    }

    pub fn weight(&self, r: usize, c: usize) -> f64 {
        self.weights[r * self.cols + c]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.weights[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn apply_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for r in 0..self.rows {
            let mut acc = self.bias[r];
            let base = r * self.cols;
            for &c in &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]] {
                acc += self.weights[base + c as usize] * x[c as usize];
            }
            out.push(acc);
        }
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &AffineLayer) -> Result<AffineLayer, NetworkError> {
        if self.cols != inner.rows {
            return Err(NetworkError::Mismatch(format!(
                "cannot fuse a layer taking {} inputs after one producing {}",
                self.cols, inner.rows
            )));
        }
        let mut w = vec![0.0; self.rows * inner.cols];
        let mut b = self.bias.clone();
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.weights[r * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                b[r] += a * inner.bias[k];
                for c in 0..inner.cols {
                    w[r * inner.cols + c] += a * inner.weights[k * inner.cols + c];
                }
            }
        }
        AffineLayer::new(inner.cols, w, b)
    }

    /// Scale every output row by `a` and add `c`.
    pub fn scaled(&self, a: f64, c: f64) -> AffineLayer {
        let w = self.weights.iter().map(|v| a * v).collect();
        let b = self.bias.iter().map(|v| a * v + c).collect();
        AffineLayer::new(self.cols, w, b).expect("same shape")
    }

    fn map_rows(&self, coeffs: &[f64], shift: f64) -> AffineLayer {
        let mut w = vec![0.0; self.cols];
        let mut b = shift;
        for (r, &k) in coeffs.iter().enumerate() {
            b += k * self.bias[r];
            let row = &self.weights[r * self.cols..(r + 1) * self.cols];
            for (wc, &v) in w.iter_mut().zip(row) {
                *wc += k * v;
            }
        }
        AffineLayer::new(self.cols, w, vec![b]).expect("single row")
    }
}

/// Axis-aligned box on which a network's guarantees hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Self {
        Self { lo: vec![a], hi: vec![b] }
    }

    pub fn cube(a: f64, b: f64, d: usize) -> Self {
        Self { lo: vec![a; d], hi: vec![b; d] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ParamCount {
    pub total: usize,
    pub nonzero: usize,
}

/// Feed-forward network. The last layer is affine only; every earlier layer is
/// followed by its per-neuron activations.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input_dim: usize,
    layers: Vec<AffineLayer>,
    activations: Vec<Vec<ActivationKind>>,
    domain: Option<Domain>,
}

/// A branch for [`Network::parallel`]. `range_bound` bounds |output| on the
/// domain and is required when the branch must be deepened.
#[derive(Debug, Clone, Copy)]
pub struct Branch<'a> {
    pub net: &'a Network,
    pub range_bound: Option<f64>,
}

impl<'a> Branch<'a> {
    pub fn new(net: &'a Network) -> Self {
        Self { net, range_bound: None }
    }

    pub fn bounded(net: &'a Network, bound: f64) -> Self {
        Self { net, range_bound: Some(bound) }
    }
}

impl Network {
    pub fn new(
        input_dim: usize,
        layers: Vec<AffineLayer>,
        activations: Vec<Vec<ActivationKind>>,
        domain: Option<Domain>,
    ) -> Result<Self, NetworkError> {
        if input_dim == 0 {
            return Err(NetworkError::Mismatch("input dimension must be positive".into()));
        }
        if layers.is_empty() {
            return Err(NetworkError::Mismatch("a network needs at least one layer".into()));
        }
        if activations.len() + 1 != layers.len() {
            return Err(NetworkError::Mismatch(format!(
                "{} layers need {} activation lists, got {}",
                layers.len(),
                layers.len() - 1,
                activations.len()
            )));
        }
        let mut width_in = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            if layer.in_dim() != width_in {
                return Err(NetworkError::Layer {
                    layer: i,
                    detail: format!("takes {} inputs but receives {width_in}", layer.in_dim()),
                });
            }
            if let Some(acts) = activations.get(i) {
                if acts.len() != layer.out_dim() {
                    return Err(NetworkError::Layer {
                        layer: i,
                        detail: format!("{} activation tags for {} neurons", acts.len(), layer.out_dim()),
                    });
                }
            }
            width_in = layer.out_dim();
        }
        if let Some(d) = &domain {
            if d.lo.len() != input_dim || d.hi.len() != input_dim {
                return Err(NetworkError::Mismatch("domain dimension differs from input dimension".into()));
            }
        }
        Ok(Self { input_dim, layers, activations, domain })
    }

    /// A depth-0 network computing a single affine map.
    pub fn affine(layer: AffineLayer) -> Self {
        let d = layer.in_dim();
        Self::new(d, vec![layer], Vec::new(), None).expect("single affine layer is valid")
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, AffineLayer::out_dim)
    }

    pub fn layers(&self) -> &[AffineLayer] {
        &self.layers
    }

    pub fn activations(&self) -> &[Vec<ActivationKind>] {
        &self.activations
    }

    pub fn domain(&self) -> Option<&Domain> {
        self.domain.as_ref()
    }

    pub fn with_domain(mut self, domain: Option<Domain>) -> Self {
        self.domain = domain;
        self
    }

    /// Number of hidden layers.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    /// Largest hidden layer.
    pub fn width(&self) -> usize {
        self.layers[..self.depth()].iter().map(AffineLayer::out_dim).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, NetworkError> {
        if x.len() != self.input_dim {
            return Err(NetworkError::Input { expected: self.input_dim, got: x.len() });
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        Ok(self.forward(x, &mut a, &mut b).to_vec())
    }

    /// Forward pass into caller-provided buffers; returns a view of the output.
    pub fn forward<'b>(&self, x: &[f64], buf_a: &'b mut Vec<f64>, buf_b: &'b mut Vec<f64>) -> &'b [f64] {
        buf_a.clear();
        buf_a.extend_from_slice(x);
        for (i, layer) in self.layers.iter().enumerate() {
            layer.apply_into(buf_a, buf_b);
            if let Some(acts) = self.activations.get(i) {
                for (v, act) in buf_b.iter_mut().zip(acts) {
                    *v = act.apply(*v);
                }
            }
            std::mem::swap(buf_a, buf_b);
        }
        buf_a
    }

    /// Scalar-in, first-output-out evaluation.
    pub fn eval1(&self, x: f64) -> f64 {
        let mut a = Vec::with_capacity(self.width().max(1));
        let mut b = Vec::with_capacity(self.width().max(1));
        self.forward(&[x], &mut a, &mut b)[0]
    }

    /// First output at each point, evaluated in parallel.
    pub fn eval_points(&self, points: &[Vec<f64>]) -> Vec<f64> {
        points
            .par_iter()
            .map_init(
                || (Vec::new(), Vec::new()),
                |(a, b), p| self.forward(p, a, b)[0],
            )
            .collect()
    }

    /// First output at each scalar point, evaluated in parallel.
    pub fn eval_grid(&self, xs: &[f64]) -> Vec<f64> {
        xs.par_iter()
            .map_init(
                || (Vec::new(), Vec::new()),
                |(a, b), &x| self.forward(&[x], a, b)[0],
            )
            .collect()
    }

    pub fn count_params(&self) -> ParamCount {
        let mut total = 0;
        let mut nonzero = 0;
        for l in &self.layers {
            total += l.weights.len() + l.bias.len();
            nonzero += l.weights.iter().chain(&l.bias).filter(|v| **v != 0.0).count();
        }
        ParamCount { total, nonzero }
    }

    /// `outer ∘ inner`, fusing the junction affine maps so depths add.
    pub fn compose(outer: &Network, inner: &Network) -> Result<Network, NetworkError> {
        if outer.input_dim != inner.output_dim() {
            return Err(NetworkError::Mismatch(format!(
                "outer takes {} inputs, inner produces {}",
                outer.input_dim,
                inner.output_dim()
            )));
        }
        let (inner_last, inner_rest) = inner.layers.split_last().expect("non-empty");
        let mut layers: Vec<AffineLayer> = inner_rest.to_vec();
        layers.push(outer.layers[0].after(inner_last)?);
        layers.extend_from_slice(&outer.layers[1..]);
        let mut acts = inner.activations.clone();
        acts.extend(outer.activations.iter().cloned());
        Network::new(inner.input_dim, layers, acts, inner.domain.clone())
    }

    /// `outer ∘ act ∘ inner` with an explicit junction layer; depths add plus one.
    pub fn compose_with_junction(
        outer: &Network,
        inner: &Network,
        junction: ActivationKind,
    ) -> Result<Network, NetworkError> {
        if outer.input_dim != inner.output_dim() {
            return Err(NetworkError::Mismatch(format!(
                "outer takes {} inputs, inner produces {}",
                outer.input_dim,
                inner.output_dim()
            )));
        }
        let mut layers = inner.layers.clone();
        layers.extend_from_slice(&outer.layers);
        let mut acts = inner.activations.clone();
        acts.push(vec![junction; inner.output_dim()]);
        acts.extend(outer.activations.iter().cloned());
        Network::new(inner.input_dim, layers, acts, inner.domain.clone())
    }

    /// Precompose with an affine map of the input.
    pub fn precompose(&self, map: &AffineLayer) -> Result<Network, NetworkError> {
        Network::compose(self, &Network::affine(map.clone()))
    }

    /// `a·net(x) + c` applied to every output.
    pub fn scale_output(&self, a: f64, c: f64) -> Network {
        let mut out = self.clone();
        let last = out.layers.last_mut().expect("non-empty");
        *last = last.scaled(a, c);
        out
    }

    /// Deepen by `extra` layers using `2Mσ((y+M)/2M) − M` with `M = bound + 1`,
    /// exact whenever every output satisfies |y| ≤ M.
    pub fn pad_widen(&self, extra: usize, bound: f64) -> Network {
        if extra == 0 {
            return self.clone();
        }
        let m = bound + 1.0;
        let n = self.output_dim();
        let mut layers = self.layers.clone();
        let last = layers.pop().expect("non-empty");
        layers.push(last.scaled(1.0 / (2.0 * m), 0.5));
        let mut acts = self.activations.clone();
        acts.push(vec![ActivationKind::Euaf; n]);
        for _ in 1..extra {
            layers.push(AffineLayer::identity(n));
            acts.push(vec![ActivationKind::Euaf; n]);
        }
        layers.push(AffineLayer::identity(n).scaled(2.0 * m, -m));
        Network::new(self.input_dim, layers, acts, self.domain.clone()).expect("padding keeps shapes")
    }

    /// Deepen by `extra` layers of identity-tagged neurons.
    pub fn pad_identity(&self, extra: usize) -> Network {
        let n = self.output_dim();
        let mut layers = self.layers.clone();
        let mut acts = self.activations.clone();
        for _ in 0..extra {
            acts.push(vec![ActivationKind::Identity; n]);
            layers.push(AffineLayer::identity(n));
        }
        Network::new(self.input_dim, layers, acts, self.domain.clone()).expect("padding keeps shapes")
    }

    /// Stack branches side by side on a shared input. Outputs are concatenated.
    pub fn parallel(branches: &[Branch<'_>], equalize_depth: bool) -> Result<Network, NetworkError> {
        let first = branches.first().ok_or_else(|| NetworkError::Mismatch("no branches".into()))?;
        let d = first.net.input_dim;
        if let Some(i) = branches.iter().position(|b| b.net.input_dim != d) {
            return Err(NetworkError::Mismatch(format!("branch {i} has a different input dimension")));
        }
        let depth = branches.iter().map(|b| b.net.depth()).max().unwrap_or(0);
        let mut nets = Vec::with_capacity(branches.len());
        for (i, b) in branches.iter().enumerate() {
            let missing = depth - b.net.depth();
            if missing == 0 {
                nets.push(b.net.clone());
            } else if !equalize_depth {
                return Err(NetworkError::Mismatch(format!(
                    "branch {i} has depth {} but the deepest has {depth}",
                    b.net.depth()
                )));
            } else {
                let bound = b.range_bound.ok_or(NetworkError::MissingBound { branch: i })?;
                nets.push(b.net.pad_widen(missing, bound));
            }
        }
        let mut layers = Vec::with_capacity(depth + 1);
        for l in 0..=depth {
            let rows: usize = nets.iter().map(|n| n.layers[l].rows).sum();
            let cols: usize = if l == 0 { d } else { nets.iter().map(|n| n.layers[l].cols).sum() };
            let mut w = vec![0.0; rows * cols];
            let mut bias = Vec::with_capacity(rows);
            let (mut r0, mut c0) = (0, 0);
            for n in &nets {
                let layer = &n.layers[l];
                for r in 0..layer.rows {
                    for c in 0..layer.cols {
                        w[(r0 + r) * cols + c0 + c] = layer.weight(r, c);
                    }
                }
                bias.extend_from_slice(&layer.bias);
                r0 += layer.rows;
                if l > 0 {
                    c0 += layer.cols;
                }
            }
            layers.push(AffineLayer::new(cols, w, bias)?);
        }
        let acts = (0..depth)
            .map(|l| nets.iter().flat_map(|n| n.activations[l].iter().copied()).collect())
            .collect();
        Network::new(d, layers, acts, first.net.domain.clone())
    }

    /// `Σ coeffs[i] · branch_i(x)` for scalar-output branches, the combination
    /// fused into the output layer.
    pub fn sum(branches: &[Branch<'_>], coeffs: &[f64]) -> Result<Network, NetworkError> {
        if branches.len() != coeffs.len() {
            return Err(NetworkError::Mismatch(format!(
                "{} branches but {} coefficients",
                branches.len(),
                coeffs.len()
            )));
        }
        if let Some(i) = branches.iter().position(|b| b.net.output_dim() != 1) {
            return Err(NetworkError::Mismatch(format!("branch {i} is not scalar-valued")));
        }
        let mut net = Network::parallel(branches, true)?;
        let last = net.layers.pop().expect("non-empty");
        net.layers.push(last.map_rows(coeffs, 0.0));
        Ok(net)
    }

    pub fn to_json(&self) -> Result<String, NetworkError> {
        serde_json::to_string(&NetworkDoc::from(self)).map_err(|e| NetworkError::Parse(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> Result<String, NetworkError> {
        serde_json::to_string_pretty(&NetworkDoc::from(self)).map_err(|e| NetworkError::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Network, NetworkError> {
        let doc: NetworkDoc = serde_json::from_str(text).map_err(|e| NetworkError::Parse(e.to_string()))?;
        doc.try_into()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    input_dim: usize,
    domain: Option<Domain>,
    layers: Vec<LayerDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDoc {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
    activations: Option<Vec<ActivationKind>>,
}

impl From<&Network> for NetworkDoc {
    fn from(net: &Network) -> Self {
        let layers = net
            .layers
            .iter()
            .enumerate()
            .map(|(i, l)| LayerDoc {
                weights: (0..l.rows).map(|r| l.row(r).to_vec()).collect(),
                bias: l.bias.clone(),
                activations: net.activations.get(i).cloned(),
            })
            .collect();
        NetworkDoc { input_dim: net.input_dim, domain: net.domain.clone(), layers }
    }
}

impl TryFrom<NetworkDoc> for Network {
    type Error = NetworkError;

    fn try_from(doc: NetworkDoc) -> Result<Self, Self::Error> {
        let n = doc.layers.len();
        if n == 0 {
            return Err(NetworkError::Parse("`layers` is empty".into()));
        }
        let mut layers = Vec::with_capacity(n);
        let mut acts = Vec::with_capacity(n - 1);
        for (i, l) in doc.layers.into_iter().enumerate() {
            let layer =
                AffineLayer::from_rows(&l.weights, l.bias).map_err(|e| NetworkError::Layer { layer: i, detail: e.to_string() })?;
            match (l.activations, i + 1 == n) {
                (Some(a), false) => acts.push(a),
                (None, true) => {}
                (None, false) => {
                    return Err(NetworkError::Layer { layer: i, detail: "hidden layer without `activations`".into() })
                }
                (Some(_), true) => {
                    return Err(NetworkError::Layer { layer: i, detail: "output layer must have null `activations`".into() })
                }
            }
            layers.push(layer);
        }
        Network::new(doc.input_dim, layers, acts, doc.domain)
    }
}

impl Serialize for Network {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        NetworkDoc::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Network {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = NetworkDoc::deserialize(deserializer)?;
        Network::try_from(doc).map_err(serde::de::Error::custom)
    }
}
