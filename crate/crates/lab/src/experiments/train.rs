//! General GAN/WGAN training run with metrics, checkpoints and, for 1-D
//! targets, a sample-based Wasserstein oracle at every checkpoint.

use std::path::Path;

use ganlab_core::distributions::{AnalyticDistribution, NoiseLaw};
use ganlab_core::divergences::wasserstein_1d;
use ganlab_core::gan::{
    Critic, GanMode, GeneratorLoss, LabelSmoothing, MetricsRow, NoiseSchedule, TrainConfig, TrainerState, Tricks,
};
use ganlab_core::nn::{checkpoint, Activation, Layer, Network, OptimizerConfig, OptimizerKind};
use ganlab_core::rng::{streams, Stream};

use super::Outputs;
use crate::dist;
use crate::error::{LabError, Result};
use crate::params::{choice, paper, ParamDef, Params};
use crate::plot::PlotKind;
use crate::table::{fmt_f64, fmt_opt, Table};

pub fn defaults() -> Vec<ParamDef> {
    vec![
        choice("mode", "wgan"),
        choice("target", "gaussian(3, 1)"),
        choice("steps", 1500),
        choice("n_critic", 5),
        paper("clip_c", 0.01),
        choice("batch_size", 64),
        choice("noise.dim", 1),
        choice("noise.law", "normal"),
        choice("generator.kind", "affine"),
        choice("generator.hidden", Vec::<u64>::new()),
        choice("generator.activation", "tanh"),
        paper("generator.optimizer", "rmsprop"),
        choice("generator.lr", 2e-3),
        paper("generator.loss", "minimax"),
        choice("critic.hidden", vec![64, 64]),
        choice("critic.activation", "relu"),
        paper("critic.optimizer", "rmsprop"),
        choice("critic.lr", 5e-5),
        choice("tricks.feature_matching", false),
        choice("tricks.minibatch_discrimination", false),
        choice("tricks.historical_averaging.enabled", false),
        choice("tricks.historical_averaging.coef", 1e-3),
        choice("tricks.label_smoothing.enabled", false),
        paper("tricks.label_smoothing.pos", 0.9),
        paper("tricks.label_smoothing.neg", 0.1),
        choice("tricks.vbn", false),
        choice("tricks.instance_noise.enabled", false),
        choice("tricks.instance_noise.sigma0", NoiseSchedule::DEFAULT_SIGMA0),
        choice("tricks.instance_noise.half_life", NoiseSchedule::DEFAULT_HALF_LIFE),
        choice("eval_every", 100),
        choice("eval_samples", 1000),
        choice("checkpoint_every", 50),
        choice("oracle_samples", 5000),
    ]
}

fn activation(params: &Params, key: &str) -> Result<Activation> {
    let name = params.str(key)?;
    Activation::from_name(name).ok_or_else(|| LabError::config(key, format!("unknown activation `{name}`")))
}

pub(crate) fn optimizer(params: &Params, prefix: &str) -> Result<OptimizerConfig> {
    let key = format!("{prefix}.optimizer");
    let name = params.str(&key)?;
    let kind = OptimizerKind::from_name(name).ok_or_else(|| LabError::config(&key, format!("unknown optimizer `{name}`")))?;
    let lr = params.f64(&format!("{prefix}.lr"))?;
    Ok(match kind {
        OptimizerKind::Sgd => OptimizerConfig::sgd(lr),
        OptimizerKind::RmsProp => OptimizerConfig::rmsprop(lr),
        OptimizerKind::Adam => OptimizerConfig::adam(lr),
    })
}

fn noise_law(params: &Params) -> Result<NoiseLaw> {
    let spec = params.str("noise.law")?.trim();
    if spec == "normal" {
        return Ok(NoiseLaw::StandardNormal);
    }
    match dist::parse("noise.law", spec, None)? {
        AnalyticDistribution::Uniform(u) => Ok(NoiseLaw::Uniform { lo: u.lo, hi: u.hi }),
        _ => Err(LabError::config("noise.law", "expected `normal` or `uniform(lo, hi)`")),
    }
}

/// Builds the core training config from the run parameters.
pub fn train_config(params: &Params) -> Result<TrainConfig> {
    let mode_name = params.str("mode")?;
    let mode = GanMode::from_name(mode_name)
        .ok_or_else(|| LabError::config("mode", format!("expected vanilla_gan or wgan, got `{mode_name}`")))?;
    let generator_loss = match params.str("generator.loss")? {
        "minimax" => GeneratorLoss::Minimax,
        "non_saturating" => GeneratorLoss::NonSaturating,
        other => return Err(LabError::config("generator.loss", format!("unknown loss `{other}`"))),
    };
    let label_smoothing = if params.bool("tricks.label_smoothing.enabled")? {
        Some(
            LabelSmoothing::new(params.f64("tricks.label_smoothing.pos")?, params.f64("tricks.label_smoothing.neg")?)
                .map_err(|e| LabError::config("tricks.label_smoothing", e.to_string()))?,
        )
    } else {
        None
    };
    let instance_noise = if params.bool("tricks.instance_noise.enabled")? {
        Some(NoiseSchedule {
            sigma0: params.f64("tricks.instance_noise.sigma0")?,
            decay: NoiseSchedule::half_life_decay(params.positive("tricks.instance_noise.half_life")?),
        })
    } else {
        None
    };
    let cfg = TrainConfig {
        mode,
        n_critic: params.usize("n_critic")?,
        clip_c: params.f64("clip_c")?,
        batch_size: params.usize("batch_size")?,
        noise_dim: params.usize("noise.dim")?,
        noise_law: noise_law(params)?,
        g_hidden: params.usize_list("generator.hidden")?,
        d_hidden: params.usize_list("critic.hidden")?,
        g_activation: activation(params, "generator.activation")?,
        d_activation: activation(params, "critic.activation")?,
        g_optimizer: optimizer(params, "generator")?,
        d_optimizer: optimizer(params, "critic")?,
        generator_loss,
        tricks: Tricks {
            feature_matching: params.bool("tricks.feature_matching")?,
            minibatch_discrimination: params.bool("tricks.minibatch_discrimination")?,
            historical_averaging: if params.bool("tricks.historical_averaging.enabled")? {
                Some(params.f64("tricks.historical_averaging.coef")?)
            } else {
                None
            },
            label_smoothing,
            vbn: params.bool("tricks.vbn")?,
            instance_noise,
        },
        total_steps: params.u64("steps")?,
        seed: params.seed(),
        eval_every: params.u64("eval_every")?,
        eval_samples: params.usize("eval_samples")?,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Affine map `z ↦ Az` with `A` the identity on the leading coordinates.
pub fn identity_generator(noise_dim: usize, data_dim: usize) -> Result<Network> {
    let mut w = vec![0.0; noise_dim * data_dim];
    for i in 0..noise_dim.min(data_dim) {
        w[i * noise_dim + i] = 1.0;
    }
    Ok(Network::from_layers(vec![Layer::new(
        noise_dim,
        data_dim,
        w,
        vec![0.0; data_dim],
        Activation::Identity,
    )?])?)
}

pub fn build_trainer(params: &Params) -> Result<TrainerState> {
    let cfg = train_config(params)?;
    let target = dist::parse("target", params.str("target")?, None)?;
    match params.str("generator.kind")? {
        "mlp" => Ok(TrainerState::new(cfg, target)?),
        "affine" => {
            let g = identity_generator(cfg.noise_dim, target.dim())?;
            Ok(TrainerState::with_generator(cfg, target, g)?)
        }
        other => Err(LabError::config("generator.kind", format!("expected mlp or affine, got `{other}`"))),
    }
}

pub const METRICS_HEADER: [&str; 10] = MetricsRow::HEADER;

pub fn metrics_row(r: &MetricsRow) -> Vec<String> {
    vec![
        r.step.to_string(),
        r.mode.name().to_string(),
        fmt_f64(r.d_loss),
        fmt_f64(r.g_loss),
        r.w_estimate.map(fmt_f64).unwrap_or_default(),
        fmt_f64(r.g_grad_norm),
        fmt_f64(r.d_acc_real),
        fmt_f64(r.d_acc_fake),
        fmt_opt(r.modes_covered),
        r.hq_fraction.map(fmt_f64).unwrap_or_default(),
    ]
}

fn write_checkpoints(dir: &Path, state: &TrainerState) -> Result<()> {
    let step = state.step_count();
    std::fs::write(dir.join(format!("generator_{step:06}.ckpt")), checkpoint::encode(state.generator(), step))?;
    let critic: &Critic = state.critic();
    match critic.to_network() {
        Some(net) => std::fs::write(dir.join(format!("critic_{step:06}.ckpt")), checkpoint::encode(&net, step))?,
        None => {
            std::fs::write(dir.join(format!("critic_body_{step:06}.ckpt")), checkpoint::encode(critic.body(), step))?;
            std::fs::write(dir.join(format!("critic_head_{step:06}.ckpt")), checkpoint::encode(critic.head(), step))?;
            if let Some(mb) = critic.minibatch() {
                let text: String = mb.params().iter().map(|v| format!("{}\n", fmt_f64(*v))).collect();
                std::fs::write(dir.join(format!("critic_minibatch_{step:06}.txt")), text)?;
            }
        }
    }
    Ok(())
}

/// Oracle distance between generator samples and a fixed target sample.
struct Oracle {
    target_sorted: Vec<f64>,
    n: usize,
}

impl Oracle {
    fn new(state: &TrainerState, n: usize) -> Option<Self> {
        if state.target().dim() != 1 || n == 0 {
            return None;
        }
        let mut rng = Stream::split(state.config().seed, streams::EVAL, u64::MAX - 1);
        Some(Oracle {
            target_sorted: state.target().sample(&mut rng, n).into_vec(),
            n,
        })
    }

    fn distance(&self, state: &TrainerState) -> Result<f64> {
        let g = state.sample_generator(self.n, state.step_count())?.into_vec();
        Ok(wasserstein_1d(&g, &self.target_sorted)?)
    }
}

/// Result of a training run kept in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    pub metrics: Vec<MetricsRow>,
    /// `(step, mean logged estimate since the previous checkpoint, oracle W)`.
    pub oracle: Vec<(u64, Option<f64>, f64)>,
    pub error: Option<ganlab_core::Error>,
}

/// Trains to completion (or the first numeric abort), checkpointing every
/// `checkpoint_every` steps. Checkpoints are written when `ckpt_dir` is set.
pub fn train(params: &Params, ckpt_dir: Option<&Path>) -> Result<(TrainerState, TrainLog)> {
    let mut state = build_trainer(params)?;
    let every = params.u64("checkpoint_every")?;
    let oracle = Oracle::new(&state, params.usize("oracle_samples")?);
    let mut log = TrainLog {
        metrics: Vec::new(),
        oracle: Vec::new(),
        error: None,
    };
    let checkpoint = |state: &TrainerState, log: &mut TrainLog, since: usize| -> Result<()> {
        if let Some(dir) = ckpt_dir {
            write_checkpoints(dir, state)?;
        }
        if let Some(o) = &oracle {
            let recent: Vec<f64> = state.metrics()[since..].iter().filter_map(|r| r.w_estimate).collect();
            let est = (!recent.is_empty()).then(|| recent.iter().sum::<f64>() / recent.len() as f64);
            log.oracle.push((state.step_count(), est, o.distance(state)?));
        }
        Ok(())
    };
    checkpoint(&state, &mut log, 0)?;
    let mut since = 0;
    while state.step_count() < state.config().total_steps {
        if let Err(e) = state.train_step() {
            log.error = Some(e);
            break;
        }
        if every > 0 && state.step_count() % every == 0 {
            checkpoint(&state, &mut log, since)?;
            since = state.metrics().len();
        }
    }
    log.metrics = state.metrics().to_vec();
    Ok((state, log))
}

pub fn run(params: &Params, out: &Path) -> Result<Outputs> {
    let ckpt = out.join("checkpoints");
    std::fs::create_dir_all(&ckpt)?;
    let (_, log) = train(params, Some(&ckpt))?;
    let mut o = Outputs::default();
    let mut t = Table::new(&METRICS_HEADER);
    for r in &log.metrics {
        t.push(metrics_row(r));
    }
    o.emit(out, "metrics", &t, Some(PlotKind::Training))?;
    if !log.oracle.is_empty() {
        let mut ot = Table::new(&["step", "w_estimate", "w_oracle"]);
        for (step, est, w) in &log.oracle {
            ot.push(vec![step.to_string(), est.map(fmt_f64).unwrap_or_default(), fmt_f64(*w)]);
        }
        o.emit(out, "oracle", &ot, None)?;
    }
    match log.error {
        Some(e) => Err(LabError::Numeric(e)),
        None => Ok(o),
    }
}
