//! Generator gradient norm while the discriminator or critic trains
//! against a frozen generator on disjoint segments.

use std::path::Path;

use rayon::prelude::*;

use ganlab_core::distributions::{NoiseLaw, SegmentDistribution};
use ganlab_core::gan::{gradient_norm_probe, GanMode, TrainConfig, TrainerState};
use ganlab_core::nn::{Activation, Layer, Network};

use super::train::optimizer;
use super::Outputs;
use crate::error::{LabError, Result};
use crate::params::{choice, paper, ParamDef, Params};
use crate::plot::PlotKind;
use crate::table::{fmt_f64, Table};

pub const HEADER: [&str; 4] = ["mode", "seed", "d_step", "grad_norm"];
pub const SUMMARY_HEADER: [&str; 5] = ["mode", "seed", "initial", "final", "ratio"];
pub const VANILLA_MAX_RATIO: f64 = 1e-2;
pub const WGAN_MIN_RATIO: f64 = 1e-1;

pub fn defaults() -> Vec<ParamDef> {
    vec![
        paper("real_theta", 0.0),
        paper("fake_theta", 0.5),
        paper("d_steps", 2000),
        paper("seeds", 3),
        choice("batch_size", 64),
        choice("critic.hidden", vec![64, 64]),
        choice("critic.activation", "relu"),
        choice("vanilla.optimizer", "adam"),
        choice("vanilla.lr", 5e-3),
        paper("wgan.optimizer", "rmsprop"),
        paper("wgan.lr", 5e-5),
        paper("wgan.clip_c", 0.01),
        choice("max_rows", 500),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRun {
    pub mode: GanMode,
    pub seed: u64,
    pub norms: Vec<f64>,
}

impl ProbeRun {
    pub fn ratio(&self) -> f64 {
        self.norms[self.norms.len() - 1] / self.norms[0]
    }
}

/// Frozen generator `z ↦ (θ, z)` with `z ~ U(0, 1)`.
fn segment_generator(theta: f64) -> Result<Network> {
    Ok(Network::from_layers(vec![Layer::new(1, 2, vec![0.0, 1.0], vec![theta, 0.0], Activation::Identity)?])?)
}

fn probe_one(params: &Params, mode: GanMode, seed: u64) -> Result<ProbeRun> {
    let real = SegmentDistribution::new(params.f64("real_theta")?)?.into();
    let g = segment_generator(params.f64("fake_theta")?)?;
    let mut cfg = match mode {
        GanMode::Vanilla => TrainConfig::vanilla(seed),
        GanMode::Wgan => TrainConfig::wgan(seed),
    };
    let prefix = match mode {
        GanMode::Vanilla => "vanilla",
        GanMode::Wgan => "wgan",
    };
    cfg.d_optimizer = optimizer(params, prefix)?;
    if mode == GanMode::Wgan {
        cfg.clip_c = params.f64("wgan.clip_c")?;
    }
    cfg.batch_size = params.usize("batch_size")?;
    cfg.noise_dim = 1;
    cfg.noise_law = NoiseLaw::Uniform { lo: 0.0, hi: 1.0 };
    cfg.d_hidden = params.usize_list("critic.hidden")?;
    cfg.d_activation = Activation::from_name(params.str("critic.activation")?)
        .ok_or_else(|| LabError::config("critic.activation", "unknown activation"))?;
    cfg.total_steps = 0;
    let mut state = TrainerState::with_generator(cfg, real, g)?;
    let norms = gradient_norm_probe(&mut state, params.usize("d_steps")?)?;
    Ok(ProbeRun { mode, seed, norms })
}

/// Both modes for seeds `seed, seed + 1, ...`, in (mode, seed) order.
pub fn probe_all(params: &Params) -> Result<Vec<ProbeRun>> {
    let seeds = params.u64("seeds")?;
    if seeds == 0 {
        return Err(LabError::config("seeds", "need at least one seed"));
    }
    let jobs: Vec<(GanMode, u64)> = [GanMode::Vanilla, GanMode::Wgan]
        .into_iter()
        .flat_map(|m| (0..seeds).map(move |k| (m, params.seed() + k)))
        .collect();
    jobs.into_par_iter().map(|(m, s)| probe_one(params, m, s)).collect()
}

pub fn run(params: &Params, out: &Path) -> Result<Outputs> {
    let runs = probe_all(params)?;
    let max_rows = params.usize("max_rows")?.max(2);
    let mut t = Table::new(&HEADER);
    let mut s = Table::new(&SUMMARY_HEADER);
    for r in &runs {
        let n = r.norms.len();
        let stride = (n - 1).div_ceil(max_rows - 1).max(1);
        for (i, g) in r.norms.iter().enumerate() {
            if i % stride == 0 || i + 1 == n {
                t.push(vec![r.mode.name().into(), r.seed.to_string(), i.to_string(), fmt_f64(*g)]);
            }
        }
        s.push(vec![
            r.mode.name().into(),
            r.seed.to_string(),
            fmt_f64(r.norms[0]),
            fmt_f64(r.norms[n - 1]),
            fmt_f64(r.ratio()),
        ]);
    }
    let mut o = Outputs::default();
    o.emit(out, "vanishing_gradient", &t, Some(PlotKind::GradientNorms))?;
    o.emit(out, "vanishing_gradient_summary", &s, None)?;
    Ok(o)
}
