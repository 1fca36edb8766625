//! SGD, RMSProp and Adam over a model's flat parameter order.

use super::Model;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    RmsProp,
    Adam,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::RmsProp => "rmsprop",
            OptimizerKind::Adam => "adam",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sgd" => Some(OptimizerKind::Sgd),
            "rmsprop" => Some(OptimizerKind::RmsProp),
            "adam" => Some(OptimizerKind::Adam),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub lr: f64,
    /// RMSProp moving-average factor for squared gradients.
    pub decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl OptimizerConfig {
    pub fn sgd(lr: f64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Sgd,
            lr,
            ..Self::rmsprop(lr)
        }
    }

    pub fn rmsprop(lr: f64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::RmsProp,
            lr,
            decay: 0.9,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn adam(lr: f64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Adam,
            ..Self::rmsprop(lr)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid("lr", format!("learning rate must be >= 0, got {}", self.lr)));
        }
        for (name, v) in [("decay", self.decay), ("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::invalid(
                    name,
                    format!("must lie in [0, 1), got {v}"),
                ));
            }
        }
        if !(self.eps > 0.0) {
            return Err(Error::invalid("eps", "epsilon must be > 0"));
        }
        Ok(())
    }
}

/// Per-parameter optimizer buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub config: OptimizerConfig,
    /// Adam first moment.
    first: Vec<f64>,
    /// RMSProp / Adam second moment.
    second: Vec<f64>,
    steps: u64,
}

impl OptimizerState {
    pub fn new(config: OptimizerConfig, param_count: usize) -> Result<Self> {
        config.validate()?;
        Ok(OptimizerState {
            config,
            first: vec![0.0; param_count],
            second: vec![0.0; param_count],
            steps: 0,
        })
    }

    pub fn second_moments(&self) -> &[f64] {
        &self.second
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Applies one update from the model's accumulated gradients, then clears
    /// them. Refuses non-finite gradients without touching any parameter.
    pub fn step(&mut self, model: &mut dyn Model) -> Result<()> {
        if model.param_count() != self.second.len() {
            return Err(Error::LengthMismatch(model.param_count(), self.second.len()));
        }
        if let Some(i) = model.grads().iter().position(|g| !g.is_finite()) {
            return Err(Error::non_finite(format!("gradient of parameter {i}")));
        }
        self.steps += 1;
        let c = self.config;
        let t = self.steps as i32;
        let mut i = 0;
        let first = &mut self.first;
        let second = &mut self.second;
        model.for_each_param_mut(&mut |p, g| {
            match c.kind {
                OptimizerKind::Sgd => *p -= c.lr * *g,
                OptimizerKind::RmsProp => {
                    second[i] = c.decay * second[i] + (1.0 - c.decay) * *g * *g;
                    *p -= c.lr * *g / (second[i].sqrt() + c.eps);
                }
                OptimizerKind::Adam => {
                    first[i] = c.beta1 * first[i] + (1.0 - c.beta1) * *g;
                    second[i] = c.beta2 * second[i] + (1.0 - c.beta2) * *g * *g;
                    let m_hat = first[i] / (1.0 - c.beta1.powi(t));
                    let v_hat = second[i] / (1.0 - c.beta2.powi(t));
                    *p -= c.lr * m_hat / (v_hat.sqrt() + c.eps);
                }
            }
            *g = 0.0;
            i += 1;
        });
        Ok(())
    }
}
