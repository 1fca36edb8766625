//! Small fully-connected networks with hand-written reverse-mode gradients.
//!
//! A [`Network`] caches each layer's input and pre-activation on
//! [`Model::forward`]; [`Model::backward`] consumes that cache, accumulates
//! parameter gradients, and returns the gradient with respect to the input so
//! networks can be chained (generator into discriminator).
//!
//! Parameters are flattened layer by layer, weights (row-major, `out × in`)
//! before biases. Optimizers, clipping, and checkpoints all use that order.

pub mod checkpoint;
pub mod gradcheck;
pub mod lipschitz;
pub mod optim;

use crate::matrix::Matrix;
use crate::rng::Stream;
use crate::{Error, Result};

pub use checkpoint::ParamSnapshot;
pub use gradcheck::{grad_check, GradCheckReport};
pub use lipschitz::{lipschitz_bound, lipschitz_probe};
pub use optim::{OptimizerConfig, OptimizerKind, OptimizerState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => sigmoid(z),
            Activation::Identity => z,
        }
    }

    /// Derivative at pre-activation `z` with output `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Identity => 1.0,
        }
    }

    /// Lipschitz constant of the scalar nonlinearity.
    pub fn lipschitz(self) -> f64 {
        match self {
            Activation::Sigmoid => 0.25,
            _ => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "relu" => Some(Activation::Relu),
            "tanh" => Some(Activation::Tanh),
            "sigmoid" => Some(Activation::Sigmoid),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Tanh => 1,
            Activation::Sigmoid => 2,
            Activation::Identity => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::Sigmoid),
            3 => Some(Activation::Identity),
            _ => None,
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Anything with flat parameters and a forward/backward pair.
pub trait Model {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn forward(&mut self, x: &Matrix) -> Result<Matrix>;
    /// Accumulates parameter gradients for the cached batch and returns
    /// `∂L/∂input`. Errors if no forward pass is cached.
    fn backward(&mut self, upstream: &Matrix) -> Result<Matrix>;
    fn param_count(&self) -> usize;
    fn params(&self) -> Vec<f64>;
    fn set_params(&mut self, params: &[f64]) -> Result<()>;
    fn grads(&self) -> Vec<f64>;
    fn zero_grad(&mut self);
    /// Visits `(parameter, gradient)` pairs in flattening order.
    fn for_each_param_mut(&mut self, f: &mut dyn FnMut(&mut f64, &mut f64));
    /// On/off state of every relu unit in the last forward pass.
    fn kink_pattern(&self) -> Vec<bool>;

    /// Projects every parameter into `[-c, c]`.
    fn clip_weights(&mut self, c: f64) {
        self.for_each_param_mut(&mut |p, _| *p = p.clamp(-c, c));
    }

    fn max_abs_param(&self) -> f64 {
        self.params().iter().fold(0.0f64, |m, p| m.max(p.abs()))
    }

    fn grad_norm(&self) -> f64 {
        self.grads().iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    activation: Activation,
    grad_w: Vec<f64>,
    grad_b: Vec<f64>,
}

impl Layer {
    /// `weights` is row-major `out × in`.
    pub fn new(in_dim: usize, out_dim: usize, weights: Vec<f64>, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::invalid("layer", "layer dimensions must be positive"));
        }
        if weights.len() != in_dim * out_dim {
            return Err(Error::LengthMismatch(weights.len(), in_dim * out_dim));
        }
        if bias.len() != out_dim {
            return Err(Error::LengthMismatch(bias.len(), out_dim));
        }
        Ok(Layer {
            in_dim,
            out_dim,
            grad_w: vec![0.0; weights.len()],
            grad_b: vec![0.0; out_dim],
            weights,
            bias,
            activation,
        })
    }

    /// Fan-based uniform init `±√(6/(in+out))`, zero bias.
    pub fn glorot(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut Stream) -> Result<Self> {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let weights = (0..in_dim * out_dim).map(|_| rng.uniform_range(-limit, limit)).collect();
        Layer::new(in_dim, out_dim, weights, vec![0.0; out_dim], activation)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    fn pre_activation(&self, x: &Matrix) -> Matrix {
        let mut z = Matrix::zeros(x.rows(), self.out_dim);
        for (i, row) in x.iter_rows().enumerate() {
            let out = z.row_mut(i);
            for (o, zo) in out.iter_mut().enumerate() {
                let w = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
                let mut acc = self.bias[o];
                for (wk, xk) in w.iter().zip(row) {
                    acc += wk * xk;
                }
                *zo = acc;
            }
        }
        z
    }

    /// Backward through this layer given `∂L/∂output`.
    fn backward(&mut self, input: &Matrix, pre: &Matrix, output: &Matrix, upstream: &Matrix) -> Matrix {
        let n = input.rows();
        let mut dz = Matrix::zeros(n, self.out_dim);
        for i in 0..n {
            for o in 0..self.out_dim {
                let d = self.activation.derivative(pre.get(i, o), output.get(i, o));
                dz.set(i, o, upstream.get(i, o) * d);
            }
        }
        let mut dx = Matrix::zeros(n, self.in_dim);
        for i in 0..n {
            let x = input.row(i);
            let dzi = dz.row(i);
            for (o, &g) in dzi.iter().enumerate() {
                if g == 0.0 {
                    continue;
                }
                let w = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
                let gw = &mut self.grad_w[o * self.in_dim..(o + 1) * self.in_dim];
                for k in 0..self.in_dim {
                    gw[k] += g * x[k];
                }
                self.grad_b[o] += g;
                let dxi = dx.row_mut(i);
                for k in 0..self.in_dim {
                    dxi[k] += g * w[k];
                }
            }
        }
        dx
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ForwardCache {
    inputs: Vec<Matrix>,
    pre: Vec<Matrix>,
    outputs: Vec<Matrix>,
}

/// A chain of affine layers, each followed by its activation.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
    cache: Option<ForwardCache>,
}

impl Network {
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("layers", "network needs at least one layer"));
        }
        for w in layers.windows(2) {
            if w[0].out_dim != w[1].in_dim {
                return Err(Error::DimensionMismatch {
                    expected: w[0].out_dim,
                    got: w[1].in_dim,
                });
            }
        }
        Ok(Network { layers, cache: None })
    }

    /// MLP with widths `dims[0] → dims[1] → … → dims[k]`; `hidden` applies to
    /// every layer but the last, which uses `output`.
    pub fn mlp(dims: &[usize], hidden: Activation, output: Activation, rng: &mut Stream) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::invalid("dims", "need at least input and output widths"));
        }
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(l, w)| Layer::glorot(w[0], w[1], if l == last { output } else { hidden }, rng))
            .collect::<Result<Vec<_>>>()?;
        Network::from_layers(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].in_dim];
        d.extend(self.layers.iter().map(|l| l.out_dim));
        d
    }

    /// Forward pass without touching the cache.
    pub fn evaluate(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        let mut a = x.clone();
        for layer in &self.layers {
            let z = layer.pre_activation(&a);
            a = z.map(|v| layer.activation.apply(v));
        }
        if !a.all_finite() {
            return Err(Error::non_finite("network output"));
        }
        Ok(a)
    }

    /// Splits into `(body, head)` where `head` holds the last `k` layers.
    pub fn split_last(&self, k: usize) -> Result<(Network, Network)> {
        if k == 0 || k >= self.layers.len() {
            return Err(Error::invalid("k", "split must leave both parts nonempty"));
        }
        let cut = self.layers.len() - k;
        Ok((
            Network::from_layers(self.layers[..cut].to_vec())?,
            Network::from_layers(self.layers[cut..].to_vec())?,
        ))
    }

    pub fn has_cache(&self) -> bool {
        self.cache.is_some()
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.cols(),
            });
        }
        Ok(())
    }
}

impl Model for Network {
    fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    fn forward(&mut self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        let mut cache = ForwardCache {
            inputs: Vec::with_capacity(self.layers.len()),
            pre: Vec::with_capacity(self.layers.len()),
            outputs: Vec::with_capacity(self.layers.len()),
        };
        let mut a = x.clone();
        for layer in &self.layers {
            let z = layer.pre_activation(&a);
            let out = z.map(|v| layer.activation.apply(v));
            cache.inputs.push(a);
            cache.pre.push(z);
            cache.outputs.push(out.clone());
            a = out;
        }
        self.cache = Some(cache);
        if !a.all_finite() {
            return Err(Error::non_finite("network output"));
        }
        Ok(a)
    }

    fn backward(&mut self, upstream: &Matrix) -> Result<Matrix> {
        let cache = self.cache.take().ok_or(Error::MissingForward("backward"))?;
        let n = cache.inputs[0].rows();
        if upstream.shape() != (n, self.output_dim()) {
            self.cache = Some(cache);
            return Err(Error::DimensionMismatch {
                expected: n * self.output_dim(),
                got: upstream.rows() * upstream.cols(),
            });
        }
        let mut grad = upstream.clone();
        for (l, layer) in self.layers.iter_mut().enumerate().rev() {
            grad = layer.backward(&cache.inputs[l], &cache.pre[l], &cache.outputs[l], &grad);
        }
        self.cache = Some(cache);
        Ok(grad)
    }

    fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::LengthMismatch(params.len(), self.param_count()));
        }
        let mut it = params.iter();
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                *w = *it.next().expect("length checked");
            }
        }
        Ok(())
    }

    fn grads(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.grad_w);
            out.extend_from_slice(&l.grad_b);
        }
        out
    }

    fn zero_grad(&mut self) {
        for l in &mut self.layers {
            l.grad_w.iter_mut().for_each(|g| *g = 0.0);
            l.grad_b.iter_mut().for_each(|g| *g = 0.0);
        }
    }

    fn for_each_param_mut(&mut self, f: &mut dyn FnMut(&mut f64, &mut f64)) {
        for l in &mut self.layers {
            for (p, g) in l.weights.iter_mut().zip(l.grad_w.iter_mut()) {
                f(p, g);
            }
            for (p, g) in l.bias.iter_mut().zip(l.grad_b.iter_mut()) {
                f(p, g);
            }
        }
    }

    fn kink_pattern(&self) -> Vec<bool> {
        let Some(cache) = &self.cache else {
            return Vec::new();
        };
        self.layers
            .iter()
            .zip(&cache.pre)
            .filter(|(l, _)| l.activation == Activation::Relu)
            .flat_map(|(_, z)| z.data().iter().map(|&v| v > 0.0))
            .collect()
    }
}
