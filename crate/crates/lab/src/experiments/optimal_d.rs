//! Discriminator trained against a frozen generator, compared with
//! `p_r / (p_r + p_g)` on a probe grid.

use std::path::Path;

use ganlab_core::distributions::{AnalyticDistribution, NoiseLaw};
use ganlab_core::gan::{optimal_discriminator, TrainConfig, TrainerState};
use ganlab_core::nn::{Activation, Layer, Network};
use ganlab_core::Matrix;

use super::train::optimizer;
use super::{linspace, Outputs};
use crate::dist;
use crate::error::{LabError, Result};
use crate::params::{choice, paper, ParamDef, Params};
use crate::plot::PlotKind;
use crate::table::Table;

pub const HEADER: [&str; 4] = ["x", "d_trained", "d_optimal", "abs_err"];
pub const TOLERANCE: f64 = 0.05;

pub fn defaults() -> Vec<ParamDef> {
    vec![
        paper("real", "gaussian(0, 1)"),
        paper("fake", "gaussian(1, 1)"),
        paper("steps", 5000),
        choice("batch_size", 256),
        choice("critic.hidden", vec![32, 32]),
        choice("critic.activation", "tanh"),
        choice("critic.optimizer", "adam"),
        choice("critic.lr", 2e-3),
        paper("probe.start", -4.0),
        paper("probe.stop", 5.0),
        paper("probe.points", 101),
    ]
}

fn gaussian_params(field: &str, d: &AnalyticDistribution) -> Result<(f64, f64)> {
    match d {
        AnalyticDistribution::Gaussian(g) => Ok((g.mean, g.std)),
        _ => Err(LabError::config(field, "expected gaussian(mean, std)")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub xs: Vec<f64>,
    pub trained: Vec<f64>,
    pub optimal: Vec<f64>,
}

impl Probe {
    pub fn mean_abs_err(&self) -> f64 {
        let n = self.xs.len() as f64;
        self.trained.iter().zip(&self.optimal).map(|(a, b)| (a - b).abs()).sum::<f64>() / n
    }
}

pub fn probe(params: &Params) -> Result<Probe> {
    let real = dist::parse("real", params.str("real")?, None)?;
    let fake = dist::parse("fake", params.str("fake")?, None)?;
    let (mu, sigma) = gaussian_params("fake", &fake)?;
    gaussian_params("real", &real)?;
    // z ~ N(0, 1) pushed through z ↦ σz + μ has law `fake` exactly.
    let g = Network::from_layers(vec![Layer::new(1, 1, vec![sigma], vec![mu], Activation::Identity)?])?;

    let mut cfg = TrainConfig::vanilla(params.seed());
    cfg.batch_size = params.usize("batch_size")?;
    cfg.noise_dim = 1;
    cfg.noise_law = NoiseLaw::StandardNormal;
    cfg.d_hidden = params.usize_list("critic.hidden")?;
    cfg.d_activation = Activation::from_name(params.str("critic.activation")?)
        .ok_or_else(|| LabError::config("critic.activation", "unknown activation"))?;
    cfg.d_optimizer = optimizer(params, "critic")?;
    cfg.total_steps = 0;
    let mut state = TrainerState::with_generator(cfg, real.clone(), g)?;
    for _ in 0..params.u64("steps")? {
        state.discriminator_step()?;
    }

    let xs = linspace("probe.points", params.f64("probe.start")?, params.f64("probe.stop")?, params.usize("probe.points")?)?;
    let trained = state.critic().evaluate(&Matrix::column(&xs))?.into_vec();
    let optimal = xs
        .iter()
        .map(|&x| optimal_discriminator(&real, &fake, &[x]))
        .collect::<ganlab_core::Result<Vec<f64>>>()?;
    Ok(Probe { xs, trained, optimal })
}

pub fn run(params: &Params, out: &Path) -> Result<Outputs> {
    let p = probe(params)?;
    let mut t = Table::new(&HEADER);
    for i in 0..p.xs.len() {
        t.push_f64(&[p.xs[i], p.trained[i], p.optimal[i], (p.trained[i] - p.optimal[i]).abs()]);
    }
    let mut o = Outputs::default();
    o.emit(out, "optimal_d", &t, Some(PlotKind::Discriminator))?;
    Ok(o)
}
