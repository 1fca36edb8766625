//! Vanilla GAN and WGAN training loops.
//!
//! Random draws come from independent streams keyed by the run seed: real
//! batches from `DATA`, latent batches from `LATENT`, instance noise from
//! `INSTANCE_NOISE`, evaluation samples from `EVAL`. Toggling a trick never
//! shifts the draws of another stream.

use super::critic::Critic;
use super::losses;
use super::metrics::mode_coverage;
use super::tricks::{
    add_instance_noise, feature_matching_parts, virtual_batch_norm, LabelSmoothing, NoiseSchedule, RunningMean,
    VbnStats,
};
use crate::distributions::{AnalyticDistribution, NoiseLaw, NoiseStream};
use crate::matrix::Matrix;
use crate::nn::{Activation, Model, Network, OptimizerConfig, OptimizerState};
use crate::rng::{streams, Stream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GanMode {
    Vanilla,
    Wgan,
}

impl GanMode {
    pub fn name(self) -> &'static str {
        match self {
            GanMode::Vanilla => "vanilla_gan",
            GanMode::Wgan => "wgan",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "vanilla_gan" | "vanilla" => Some(GanMode::Vanilla),
            "wgan" => Some(GanMode::Wgan),
            _ => None,
        }
    }
}

/// Generator objective in vanilla mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GeneratorLoss {
    /// `mean log(1 − D(G(z)))`.
    #[default]
    Minimax,
    /// `−mean log D(G(z))`.
    NonSaturating,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tricks {
    pub feature_matching: bool,
    pub minibatch_discrimination: bool,
    /// Penalty coefficient; `None` disables.
    pub historical_averaging: Option<f64>,
    pub label_smoothing: Option<LabelSmoothing>,
    pub vbn: bool,
    pub instance_noise: Option<NoiseSchedule>,
}

impl Tricks {
    pub fn any(&self) -> bool {
        *self != Tricks::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub mode: GanMode,
    pub n_critic: usize,
    pub clip_c: f64,
    pub batch_size: usize,
    pub noise_dim: usize,
    pub noise_law: NoiseLaw,
    pub g_hidden: Vec<usize>,
    pub d_hidden: Vec<usize>,
    pub g_activation: Activation,
    pub d_activation: Activation,
    pub g_optimizer: OptimizerConfig,
    pub d_optimizer: OptimizerConfig,
    pub generator_loss: GeneratorLoss,
    pub tricks: Tricks,
    pub total_steps: u64,
    pub seed: u64,
    /// Mode-coverage evaluation period in steps; 0 disables.
    pub eval_every: u64,
    pub eval_samples: usize,
}

impl TrainConfig {
    pub const DEFAULT_N_CRITIC: usize = 5;
    pub const DEFAULT_CLIP: f64 = 0.01;
    pub const DEFAULT_CRITIC_LR: f64 = 5e-5;

    pub fn wgan(seed: u64) -> Self {
        TrainConfig {
            mode: GanMode::Wgan,
            n_critic: Self::DEFAULT_N_CRITIC,
            clip_c: Self::DEFAULT_CLIP,
            batch_size: 64,
            noise_dim: 2,
            noise_law: NoiseLaw::StandardNormal,
            g_hidden: vec![64, 64],
            d_hidden: vec![64, 64],
            g_activation: Activation::Tanh,
            d_activation: Activation::Relu,
            g_optimizer: OptimizerConfig::rmsprop(Self::DEFAULT_CRITIC_LR),
            d_optimizer: OptimizerConfig::rmsprop(Self::DEFAULT_CRITIC_LR),
            generator_loss: GeneratorLoss::Minimax,
            tricks: Tricks::default(),
            total_steps: 2000,
            seed,
            eval_every: 0,
            eval_samples: 1000,
        }
    }

    pub fn vanilla(seed: u64) -> Self {
        TrainConfig {
            mode: GanMode::Vanilla,
            n_critic: 1,
            g_optimizer: OptimizerConfig::adam(2e-4),
            d_optimizer: OptimizerConfig::adam(2e-4),
            ..Self::wgan(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_critic == 0 {
            return Err(Error::invalid("n_critic", "must be at least 1"));
        }
        if self.mode == GanMode::Wgan && !(self.clip_c > 0.0) {
            return Err(Error::invalid("clip_c", format!("must be > 0 in wgan mode, got {}", self.clip_c)));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be at least 1"));
        }
        if self.noise_dim == 0 {
            return Err(Error::invalid("noise_dim", "must be at least 1"));
        }
        if self.d_hidden.is_empty() {
            return Err(Error::invalid("d_hidden", "critic needs at least one hidden layer"));
        }
        if let Some(ls) = self.tricks.label_smoothing {
            LabelSmoothing::new(ls.pos, ls.neg)?;
        }
        if let Some(h) = self.tricks.historical_averaging {
            if !(h >= 0.0) {
                return Err(Error::invalid("historical_averaging", format!("coefficient must be >= 0, got {h}")));
            }
        }
        if let Some(s) = self.tricks.instance_noise {
            if !(s.sigma0 >= 0.0) || !(s.decay > 0.0 && s.decay <= 1.0) {
                return Err(Error::invalid("instance_noise", "need sigma0 >= 0 and 0 < decay <= 1"));
            }
        }
        self.g_optimizer.validate()?;
        self.d_optimizer.validate()
    }

    /// Critic updates per generator update.
    pub fn critic_iters(&self) -> usize {
        match self.mode {
            GanMode::Wgan => self.n_critic,
            GanMode::Vanilla => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub step: u64,
    pub mode: GanMode,
    pub d_loss: f64,
    pub g_loss: f64,
    pub w_estimate: Option<f64>,
    pub g_grad_norm: f64,
    pub d_acc_real: f64,
    pub d_acc_fake: f64,
    pub modes_covered: Option<usize>,
    pub hq_fraction: Option<f64>,
}

impl MetricsRow {
    pub const HEADER: [&'static str; 10] = [
        "step",
        "mode",
        "d_loss",
        "g_loss",
        "w_estimate",
        "g_grad_norm",
        "d_acc_real",
        "d_acc_fake",
        "modes_covered",
        "hq_fraction",
    ];
}

/// Outcome of one critic/discriminator update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticStep {
    pub loss: f64,
    pub acc_real: f64,
    pub acc_fake: f64,
    pub w_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct TrainerState {
    cfg: TrainConfig,
    target: AnalyticDistribution,
    generator: Network,
    g_opt: OptimizerState,
    critic: Critic,
    d_opt: OptimizerState,
    step: u64,
    g_history: Option<RunningMean>,
    d_history: Option<RunningMean>,
    vbn: Option<VbnStats>,
    data: Stream,
    latent: NoiseStream,
    noise: Stream,
    log: Vec<MetricsRow>,
    last_good: (Vec<f64>, Vec<f64>),
}

impl TrainerState {
    /// Builds both networks from the config: generator first, then critic,
    /// from the `INIT` stream.
    pub fn new(cfg: TrainConfig, target: AnalyticDistribution) -> Result<Self> {
        cfg.validate()?;
        let mut init = Stream::new(cfg.seed, streams::INIT);
        let mut g_dims = vec![cfg.noise_dim];
        g_dims.extend(&cfg.g_hidden);
        g_dims.push(target.dim());
        let generator = Network::mlp(&g_dims, cfg.g_activation, Activation::Identity, &mut init)?;
        Self::build(cfg, target, generator, &mut init)
    }

    /// Uses a caller-supplied generator; the critic still comes from the config.
    pub fn with_generator(cfg: TrainConfig, target: AnalyticDistribution, generator: Network) -> Result<Self> {
        cfg.validate()?;
        if generator.input_dim() != cfg.noise_dim || generator.output_dim() != target.dim() {
            return Err(Error::DimensionMismatch {
                expected: cfg.noise_dim,
                got: generator.input_dim(),
            });
        }
        let mut init = Stream::new(cfg.seed, streams::INIT);
        Self::build(cfg, target, generator, &mut init)
    }

    fn build(cfg: TrainConfig, target: AnalyticDistribution, generator: Network, init: &mut Stream) -> Result<Self> {
        let mut d_dims = vec![target.dim()];
        d_dims.extend(&cfg.d_hidden);
        d_dims.push(1);
        let out_act = match cfg.mode {
            GanMode::Vanilla => Activation::Sigmoid,
            GanMode::Wgan => Activation::Identity,
        };
        let mut critic = Critic::mlp(&d_dims, cfg.d_activation, out_act, cfg.tricks.minibatch_discrimination, init)?;
        if cfg.mode == GanMode::Wgan {
            critic.clip_weights(cfg.clip_c);
        }
        let vbn = if cfg.tricks.vbn {
            let mut r = Stream::split(cfg.seed, streams::DATA, 1);
            Some(VbnStats::from_reference(&target.sample(&mut r, cfg.batch_size.max(2)))?)
        } else {
            None
        };
        let hist = cfg.tricks.historical_averaging.is_some();
        let latent = crate::distributions::NoiseSource::new(cfg.noise_law, cfg.noise_dim, cfg.seed)?.stream();
        Ok(TrainerState {
            g_opt: OptimizerState::new(cfg.g_optimizer, generator.param_count())?,
            d_opt: OptimizerState::new(cfg.d_optimizer, critic.param_count())?,
            g_history: hist.then(|| RunningMean::new(generator.param_count())),
            d_history: hist.then(|| RunningMean::new(critic.param_count())),
            last_good: (generator.params(), critic.params()),
            data: Stream::new(cfg.seed, streams::DATA),
            noise: Stream::new(cfg.seed, streams::INSTANCE_NOISE),
            latent,
            vbn,
            generator,
            critic,
            target,
            cfg,
            step: 0,
            log: Vec::new(),
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn target(&self) -> &AnalyticDistribution {
        &self.target
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn generator(&self) -> &Network {
        &self.generator
    }

    pub fn critic(&self) -> &Critic {
        &self.critic
    }

    pub fn metrics(&self) -> &[MetricsRow] {
        &self.log
    }

    pub fn vbn_stats(&self) -> Option<&VbnStats> {
        self.vbn.as_ref()
    }

    pub fn generator_history(&self) -> Option<&RunningMean> {
        self.g_history.as_ref()
    }

    /// Draws generator samples from a dedicated evaluation stream.
    pub fn sample_generator(&self, n: usize, child: u64) -> Result<Matrix> {
        let mut rng = Stream::split(self.cfg.seed, streams::EVAL, child);
        let z = self.latent_batch(&mut rng, n);
        self.generator.evaluate(&z)
    }

    fn latent_batch(&self, rng: &mut Stream, n: usize) -> Matrix {
        let data = (0..n * self.cfg.noise_dim)
            .map(|_| match self.cfg.noise_law {
                NoiseLaw::Uniform { lo, hi } => rng.uniform_range(lo, hi),
                NoiseLaw::StandardNormal => rng.standard_normal(),
            })
            .collect();
        Matrix::from_vec(n, self.cfg.noise_dim, data).expect("shape")
    }

    /// Instance noise then VBN, as seen by the critic.
    fn preprocess(&mut self, x: &Matrix) -> Result<Matrix> {
        let mut x = match self.cfg.tricks.instance_noise {
            Some(s) => add_instance_noise(x, s.sigma(self.step), &mut self.noise)?,
            None => x.clone(),
        };
        if let Some(stats) = &self.vbn {
            x = virtual_batch_norm(&x, stats)?;
        }
        Ok(x)
    }

    fn add_penalty_grad(model: &mut dyn Model, history: &Option<RunningMean>, coef: Option<f64>) -> Result<f64> {
        let (Some(h), Some(c)) = (history, coef) else {
            return Ok(0.0);
        };
        if h.count() == 0 {
            return Ok(0.0);
        }
        let current = model.params();
        let pen = h.penalty(&current)?;
        let grad = h.penalty_gradient(&current);
        let mut i = 0;
        model.for_each_param_mut(&mut |_, g| {
            *g += c * grad[i];
            i += 1;
        });
        Ok(c * pen)
    }

    /// One critic/discriminator update on a fresh real batch and a fresh
    /// latent batch. Clips the critic afterwards in wgan mode.
    pub fn discriminator_step(&mut self) -> Result<CriticStep> {
        let b = self.cfg.batch_size;
        let real = self.target.sample(&mut self.data, b);
        let z = self.latent.next_batch(b);
        let fake = self.generator.evaluate(&z)?;
        let xr = self.preprocess(&real)?;
        let xf = self.preprocess(&fake)?;

        self.critic.zero_grad();
        let fr = self.critic.forward(&xr)?.into_vec();
        let (gr, gf, loss) = match self.cfg.mode {
            GanMode::Vanilla => {
                let ls = self.cfg.tricks.label_smoothing.unwrap_or(LabelSmoothing::HARD);
                let ff = self.critic.evaluate(&xf)?.into_vec();
                let (gr, gf) = losses::d_loss_smoothed_grad(&fr, &ff, ls.pos, ls.neg)?;
                let loss = match self.cfg.tricks.label_smoothing {
                    Some(ls) => losses::d_loss_smoothed(&fr, &ff, ls.pos, ls.neg)?,
                    None => losses::d_loss_vanilla(&fr, &ff)?,
                };
                (gr, gf, (loss, ff))
            }
            GanMode::Wgan => {
                let ff = self.critic.evaluate(&xf)?.into_vec();
                let (gr, gf) = losses::critic_loss_wgan_grad(&fr, &ff)?;
                (gr, gf, (losses::critic_loss_wgan(&fr, &ff)?, ff))
            }
        };
        let (mut loss, ff) = loss;
        self.critic.backward(&Matrix::column(&gr))?;
        self.critic.forward(&xf)?;
        self.critic.backward(&Matrix::column(&gf))?;
        loss += Self::add_penalty_grad(&mut self.critic, &self.d_history, self.cfg.tricks.historical_averaging)?;
        if !loss.is_finite() {
            return Err(Error::non_finite("discriminator loss"));
        }
        self.d_opt.step(&mut self.critic)?;
        if self.cfg.mode == GanMode::Wgan {
            self.critic.clip_weights(self.cfg.clip_c);
        }
        if let Some(h) = &mut self.d_history {
            h.record(&self.critic.params());
        }

        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let threshold = match self.cfg.mode {
            GanMode::Vanilla => 0.5,
            GanMode::Wgan => (mean(&fr) + mean(&ff)) / 2.0,
        };
        let frac = |v: &[f64], pred: &dyn Fn(f64) -> bool| v.iter().filter(|&&s| pred(s)).count() as f64 / v.len() as f64;
        Ok(CriticStep {
            loss,
            acc_real: frac(&fr, &|s| s > threshold),
            acc_fake: frac(&ff, &|s| s < threshold),
            w_estimate: losses::wasserstein_estimate(&fr, &ff)?,
        })
    }

    /// Accumulates the generator gradient of its loss on latent batch `z`
    /// and returns the loss. The critic's gradients are left dirty.
    pub fn generator_gradient(&mut self, z: &Matrix) -> Result<f64> {
        self.generator.zero_grad();
        let fake = self.generator.forward(z)?;
        let xf = self.preprocess(&fake)?;
        let (loss, d_input) = if self.cfg.tricks.feature_matching {
            let real = self.target.sample(&mut self.data, z.rows());
            let xr = self.preprocess(&real)?;
            let real_feat = self.critic.body().evaluate(&xr)?;
            let fake_feat = self.critic.features(&xf)?;
            let (loss, grad) = feature_matching_parts(&real_feat, &fake_feat)?;
            (loss, self.critic.features_backward(&grad)?)
        } else {
            let scores = self.critic.forward(&xf)?.into_vec();
            let (loss, grad) = match (self.cfg.mode, self.cfg.generator_loss) {
                (GanMode::Wgan, _) => (losses::g_loss_wgan(&scores)?, losses::g_loss_wgan_grad(&scores)?),
                (GanMode::Vanilla, GeneratorLoss::Minimax) => {
                    (losses::g_loss_vanilla(&scores)?, losses::g_loss_vanilla_grad(&scores)?)
                }
                (GanMode::Vanilla, GeneratorLoss::NonSaturating) => (
                    losses::g_loss_nonsaturating(&scores)?,
                    losses::g_loss_nonsaturating_grad(&scores)?,
                ),
            };
            (loss, self.critic.backward(&Matrix::column(&grad))?)
        };
        let d_fake = match &self.vbn {
            Some(stats) => {
                let s = stats.scale();
                let mut d = d_input;
                for i in 0..d.rows() {
                    for (v, k) in d.row_mut(i).iter_mut().zip(&s) {
                        *v *= k;
                    }
                }
                d
            }
            None => d_input,
        };
        self.generator.backward(&d_fake)?;
        Ok(loss)
    }

    fn restore_last_good(&mut self) {
        self.generator.set_params(&self.last_good.0).expect("same architecture");
        self.critic.set_params(&self.last_good.1).expect("same architecture");
        self.generator.zero_grad();
        self.critic.zero_grad();
    }

    /// One full training step. On a non-finite loss or gradient the networks
    /// are rolled back to the previous step and the error is returned.
    pub fn train_step(&mut self) -> Result<MetricsRow> {
        match self.try_step() {
            Ok(row) => {
                self.last_good = (self.generator.params(), self.critic.params());
                self.log.push(row.clone());
                Ok(row)
            }
            Err(e) => {
                self.restore_last_good();
                Err(e)
            }
        }
    }

    fn try_step(&mut self) -> Result<MetricsRow> {
        let mut last = None;
        for _ in 0..self.cfg.critic_iters() {
            last = Some(self.discriminator_step()?);
        }
        let d = last.expect("at least one critic step");

        let z = self.latent.next_batch(self.cfg.batch_size);
        let mut g_loss = self.generator_gradient(&z)?;
        g_loss += Self::add_penalty_grad(&mut self.generator, &self.g_history, self.cfg.tricks.historical_averaging)?;
        if !g_loss.is_finite() {
            return Err(Error::non_finite("generator loss"));
        }
        let g_grad_norm = self.generator.grad_norm();
        self.g_opt.step(&mut self.generator)?;
        self.critic.zero_grad();
        if let Some(h) = &mut self.g_history {
            h.record(&self.generator.params());
        }
        self.step += 1;

        let (modes_covered, hq_fraction) = self.evaluate_modes()?;
        Ok(MetricsRow {
            step: self.step,
            mode: self.cfg.mode,
            d_loss: d.loss,
            g_loss,
            w_estimate: (self.cfg.mode == GanMode::Wgan).then_some(d.w_estimate),
            g_grad_norm,
            d_acc_real: d.acc_real,
            d_acc_fake: d.acc_fake,
            modes_covered,
            hq_fraction,
        })
    }

    fn evaluate_modes(&self) -> Result<(Option<usize>, Option<f64>)> {
        let AnalyticDistribution::Mixture2D(mix) = &self.target else {
            return Ok((None, None));
        };
        if self.cfg.eval_every == 0 || !self.step.is_multiple_of(self.cfg.eval_every) {
            return Ok((None, None));
        }
        let samples = self.sample_generator(self.cfg.eval_samples, self.step)?;
        let centers: Vec<Vec<f64>> = mix.centers().iter().map(|c| c.to_vec()).collect();
        let radius = 3.0 * mix.components()[0].std;
        let min_count = (self.cfg.eval_samples / 100).max(1);
        let cov = mode_coverage(&samples, &centers, radius, min_count)?;
        Ok((Some(cov.covered), Some(cov.hq_fraction)))
    }

    /// Runs `total_steps` train steps.
    pub fn run(&mut self) -> Result<()> {
        while self.step < self.cfg.total_steps {
            self.train_step()?;
        }
        Ok(())
    }
}

/// With the generator frozen, trains the critic `d_steps` times from its
/// current state and records the generator's gradient norm on a fixed latent
/// probe batch before training and after every update.
pub fn gradient_norm_probe(state: &mut TrainerState, d_steps: usize) -> Result<Vec<f64>> {
    let mut rng = Stream::split(state.cfg.seed, streams::EVAL, u64::MAX);
    let z = state.latent_batch(&mut rng, state.cfg.batch_size);
    let mut norms = Vec::with_capacity(d_steps + 1);
    let probe = |s: &mut TrainerState| -> Result<f64> {
        s.generator_gradient(&z)?;
        let n = s.generator.grad_norm();
        s.generator.zero_grad();
        s.critic.zero_grad();
        Ok(n)
    };
    norms.push(probe(state)?);
    for _ in 0..d_steps {
        state.discriminator_step()?;
        norms.push(probe(state)?);
    }
    Ok(norms)
}
