//! Discriminator/critic network with an optional minibatch-discrimination
//! score spliced in before its final layer.

use super::tricks::MinibatchLayer;
use crate::matrix::Matrix;
use crate::nn::{Activation, Model, Network};
use crate::rng::Stream;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Critic {
    body: Network,
    minibatch: Option<MinibatchLayer>,
    head: Network,
}

impl Critic {
    /// `dims = [input, hidden..., 1]`; at least one hidden layer.
    pub fn mlp(dims: &[usize], hidden: Activation, output: Activation, minibatch: bool, rng: &mut Stream) -> Result<Self> {
        if dims.len() < 3 {
            return Err(Error::invalid("critic.hidden", "critic needs at least one hidden layer"));
        }
        let k = dims.len();
        let body = Network::mlp(&dims[..k - 1], hidden, hidden, rng)?;
        let feat = dims[k - 2];
        let head_in = if minibatch { feat + 1 } else { feat };
        let head = Network::mlp(&[head_in, dims[k - 1]], output, output, rng)?;
        let minibatch = minibatch.then(|| MinibatchLayer::new(feat, MinibatchLayer::DEFAULT_PROJECTION, rng));
        Ok(Critic { body, minibatch, head })
    }

    /// Wraps an existing network, splitting off its last layer as the head.
    pub fn from_network(net: &Network) -> Result<Self> {
        let (body, head) = net.split_last(1)?;
        Ok(Critic {
            body,
            minibatch: None,
            head,
        })
    }

    pub fn body(&self) -> &Network {
        &self.body
    }

    pub fn head(&self) -> &Network {
        &self.head
    }

    pub fn minibatch(&self) -> Option<&MinibatchLayer> {
        self.minibatch.as_ref()
    }

    /// Single network equivalent, available when no minibatch layer is present.
    pub fn to_network(&self) -> Option<Network> {
        if self.minibatch.is_some() {
            return None;
        }
        let mut layers = self.body.layers().to_vec();
        layers.extend_from_slice(self.head.layers());
        Network::from_layers(layers).ok()
    }

    pub fn feature_dim(&self) -> usize {
        self.body.output_dim()
    }

    /// Penultimate activations, cached for [`Critic::features_backward`].
    pub fn features(&mut self, x: &Matrix) -> Result<Matrix> {
        self.body.forward(x)
    }

    /// Backpropagates a gradient on [`Critic::features`] to the input.
    pub fn features_backward(&mut self, upstream: &Matrix) -> Result<Matrix> {
        self.body.backward(upstream)
    }

    /// Uncached scores, for evaluation.
    pub fn evaluate(&self, x: &Matrix) -> Result<Matrix> {
        let h = self.body.evaluate(x)?;
        match &self.minibatch {
            Some(mb) => {
                let o = mb.clone().forward(&h);
                self.head.evaluate(&h.hcat(&o)?)
            }
            None => self.head.evaluate(&h),
        }
    }
}

impl Model for Critic {
    fn input_dim(&self) -> usize {
        self.body.input_dim()
    }

    fn output_dim(&self) -> usize {
        self.head.output_dim()
    }

    fn forward(&mut self, x: &Matrix) -> Result<Matrix> {
        let h = self.body.forward(x)?;
        match &mut self.minibatch {
            Some(mb) => {
                let o = mb.forward(&h);
                self.head.forward(&h.hcat(&o)?)
            }
            None => self.head.forward(&h),
        }
    }

    fn backward(&mut self, upstream: &Matrix) -> Result<Matrix> {
        let d_feat = self.head.backward(upstream)?;
        let dh = match &mut self.minibatch {
            Some(mb) => {
                let (dh, d_o) = d_feat.hsplit(self.body.output_dim());
                dh.add(&mb.backward(&d_o)?)?
            }
            None => d_feat,
        };
        self.body.backward(&dh)
    }

    fn param_count(&self) -> usize {
        self.body.param_count() + self.minibatch.as_ref().map_or(0, |m| m.params().len()) + self.head.param_count()
    }

    fn params(&self) -> Vec<f64> {
        let mut p = self.body.params();
        if let Some(mb) = &self.minibatch {
            p.extend_from_slice(mb.params());
        }
        p.extend(self.head.params());
        p
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::LengthMismatch(params.len(), self.param_count()));
        }
        let nb = self.body.param_count();
        self.body.set_params(&params[..nb])?;
        let mut at = nb;
        if let Some(mb) = &mut self.minibatch {
            for (p, _) in mb.params_mut() {
                *p = params[at];
                at += 1;
            }
        }
        self.head.set_params(&params[at..])
    }

    fn grads(&self) -> Vec<f64> {
        let mut g = self.body.grads();
        if let Some(mb) = &self.minibatch {
            g.extend_from_slice(mb.grads());
        }
        g.extend(self.head.grads());
        g
    }

    fn zero_grad(&mut self) {
        self.body.zero_grad();
        if let Some(mb) = &mut self.minibatch {
            mb.zero_grad();
        }
        self.head.zero_grad();
    }

    fn for_each_param_mut(&mut self, f: &mut dyn FnMut(&mut f64, &mut f64)) {
        self.body.for_each_param_mut(f);
        if let Some(mb) = &mut self.minibatch {
            for (p, g) in mb.params_mut() {
                f(p, g);
            }
        }
        self.head.for_each_param_mut(f);
    }

    fn kink_pattern(&self) -> Vec<bool> {
        let mut k = self.body.kink_pattern();
        k.extend(self.head.kink_pattern());
        k
    }
}
