use ganlab_core::distributions::{AnalyticDistribution, Gaussian1D, GaussianMixture2D, NoiseSource};
use ganlab_core::divergences::wasserstein_1d;
use ganlab_core::gan::losses;
use ganlab_core::gan::{
    optimal_discriminator, GanMode, LabelSmoothing, NoiseSchedule, TrainConfig, TrainerState, Tricks,
};
use ganlab_core::nn::lipschitz::grid_pairs_1d;
use ganlab_core::nn::{lipschitz_probe, Activation, Layer, Model, Network, OptimizerConfig, OptimizerState};
use ganlab_core::rng::{streams, Stream};
use ganlab_core::Matrix;

fn gauss(mean: f64, std: f64) -> AnalyticDistribution {
    Gaussian1D::new(mean, std).unwrap().into()
}

fn small(mut cfg: TrainConfig) -> TrainConfig {
    cfg.batch_size = 32;
    cfg.noise_dim = 1;
    cfg.g_hidden = vec![8];
    cfg.d_hidden = vec![16, 16];
    cfg
}

fn affine(w: f64, b: f64) -> Network {
    Network::from_layers(vec![Layer::new(1, 1, vec![w], vec![b], Activation::Identity).unwrap()]).unwrap()
}

/// Plain training loop written directly against networks, losses and
/// optimizers, with no trick code on any path.
struct Reference {
    cfg: TrainConfig,
    target: AnalyticDistribution,
    g: Network,
    d: Network,
    g_opt: OptimizerState,
    d_opt: OptimizerState,
    data: Stream,
    latent: ganlab_core::distributions::NoiseStream,
}

impl Reference {
    fn new(cfg: TrainConfig, target: AnalyticDistribution) -> Self {
        let mut init = Stream::new(cfg.seed, streams::INIT);
        let mut g_dims = vec![cfg.noise_dim];
        g_dims.extend(&cfg.g_hidden);
        g_dims.push(target.dim());
        let g = Network::mlp(&g_dims, cfg.g_activation, Activation::Identity, &mut init).unwrap();
        let mut body_dims = vec![target.dim()];
        body_dims.extend(&cfg.d_hidden);
        let out = match cfg.mode {
            GanMode::Vanilla => Activation::Sigmoid,
            GanMode::Wgan => Activation::Identity,
        };
        let body = Network::mlp(&body_dims, cfg.d_activation, cfg.d_activation, &mut init).unwrap();
        let head = Network::mlp(&[*body_dims.last().unwrap(), 1], out, out, &mut init).unwrap();
        let mut layers = body.layers().to_vec();
        layers.extend_from_slice(head.layers());
        let mut d = Network::from_layers(layers).unwrap();
        if cfg.mode == GanMode::Wgan {
            d.clip_weights(cfg.clip_c);
        }
        Reference {
            g_opt: OptimizerState::new(cfg.g_optimizer, g.param_count()).unwrap(),
            d_opt: OptimizerState::new(cfg.d_optimizer, d.param_count()).unwrap(),
            data: Stream::new(cfg.seed, streams::DATA),
            latent: NoiseSource::new(cfg.noise_law, cfg.noise_dim, cfg.seed).unwrap().stream(),
            g,
            d,
            target,
            cfg,
        }
    }

    fn step(&mut self) {
        let b = self.cfg.batch_size;
        for _ in 0..self.cfg.critic_iters() {
            let real = self.target.sample(&mut self.data, b);
            let z = self.latent.next_batch(b);
            let fake = self.g.evaluate(&z).unwrap();
            let fr = self.d.forward(&real).unwrap().into_vec();
            let ff = self.d.evaluate(&fake).unwrap().into_vec();
            let (gr, gf) = match self.cfg.mode {
                GanMode::Vanilla => losses::d_loss_smoothed_grad(&fr, &ff, 1.0, 0.0).unwrap(),
                GanMode::Wgan => losses::critic_loss_wgan_grad(&fr, &ff).unwrap(),
            };
            self.d.backward(&Matrix::column(&gr)).unwrap();
            self.d.forward(&fake).unwrap();
            self.d.backward(&Matrix::column(&gf)).unwrap();
            self.d_opt.step(&mut self.d).unwrap();
            if self.cfg.mode == GanMode::Wgan {
                self.d.clip_weights(self.cfg.clip_c);
            }
        }
        let z = self.latent.next_batch(b);
        let fake = self.g.forward(&z).unwrap();
        let scores = self.d.forward(&fake).unwrap().into_vec();
        let grad = match self.cfg.mode {
            GanMode::Vanilla => losses::g_loss_vanilla_grad(&scores).unwrap(),
            GanMode::Wgan => losses::g_loss_wgan_grad(&scores).unwrap(),
        };
        let d_in = self.d.backward(&Matrix::column(&grad)).unwrap();
        self.g.backward(&d_in).unwrap();
        self.g_opt.step(&mut self.g).unwrap();
        self.d.zero_grad();
    }
}

#[test]
fn tricks_off_matches_reference_loop_bit_for_bit() {
    for cfg in [small(TrainConfig::wgan(21)), small(TrainConfig::vanilla(22))] {
        assert!(!cfg.tricks.any());
        let mut trainer = TrainerState::new(cfg.clone(), gauss(2.0, 0.5)).unwrap();
        let mut reference = Reference::new(cfg, gauss(2.0, 0.5));
        assert_eq!(trainer.generator().params(), reference.g.params());
        assert_eq!(trainer.critic().params(), reference.d.params());
        for _ in 0..25 {
            trainer.train_step().unwrap();
            reference.step();
            assert_eq!(trainer.generator().params(), reference.g.params());
            assert_eq!(trainer.critic().params(), reference.d.params());
        }
    }
}

#[test]
fn wgan_clip_discipline_under_fuzzed_configs() {
    let mut fuzz = Stream::new(404, 0);
    for trial in 0..4 {
        let mut cfg = small(TrainConfig::wgan(trial));
        cfg.clip_c = [0.005, 0.01, 0.05, 0.1][trial as usize];
        cfg.d_optimizer = OptimizerConfig::rmsprop(10f64.powf(fuzz.uniform_range(-4.0, -1.0)));
        cfg.n_critic = 1 + fuzz.index(5);
        let target = if trial % 2 == 0 { gauss(3.0, 1.0) } else { GaussianMixture2D::ring(4, 1.0, 0.1).unwrap().into() };
        let mut t = TrainerState::new(cfg.clone(), target).unwrap();
        for _ in 0..25 {
            t.train_step().unwrap();
            let params = t.critic().params();
            assert!(params.iter().all(|p| p.abs() <= cfg.clip_c), "trial {trial}");
            let mut again = t.critic().clone();
            again.clip_weights(cfg.clip_c);
            assert_eq!(again.params(), params);
        }
    }
}

#[test]
fn metric_steps_increase_and_stay_finite_with_all_tricks() {
    let mut cfg = small(TrainConfig::vanilla(8));
    cfg.tricks = Tricks {
        feature_matching: false,
        minibatch_discrimination: true,
        historical_averaging: Some(1e-2),
        label_smoothing: Some(LabelSmoothing::new(0.9, 0.1).unwrap()),
        vbn: true,
        instance_noise: Some(NoiseSchedule::default_schedule()),
    };
    let mut t = TrainerState::new(cfg, gauss(1.0, 1.0)).unwrap();
    for _ in 0..30 {
        t.train_step().unwrap();
    }
    let steps: Vec<u64> = t.metrics().iter().map(|r| r.step).collect();
    assert!(steps.windows(2).all(|w| w[1] > w[0]));
    assert!(t.metrics().iter().all(|r| r.d_loss.is_finite() && r.g_loss.is_finite()));
}

#[test]
fn historical_average_zero_when_frozen_positive_after_update() {
    let mut cfg = small(TrainConfig::vanilla(3));
    cfg.tricks.historical_averaging = Some(1.0);
    cfg.g_optimizer = OptimizerConfig::sgd(0.0);
    cfg.d_optimizer = OptimizerConfig::sgd(0.0);
    let mut frozen = TrainerState::new(cfg.clone(), gauss(0.0, 1.0)).unwrap();
    for _ in 0..5 {
        frozen.train_step().unwrap();
        let h = frozen.generator_history().unwrap();
        assert_eq!(h.penalty(&frozen.generator().params()).unwrap(), 0.0);
    }
    cfg.g_optimizer = OptimizerConfig::sgd(0.05);
    let mut moving = TrainerState::new(cfg, gauss(0.0, 1.0)).unwrap();
    moving.train_step().unwrap();
    moving.train_step().unwrap();
    let h = moving.generator_history().unwrap();
    assert!(h.penalty(&moving.generator().params()).unwrap() > 0.0);
}

#[test]
fn vanilla_discriminator_approaches_optimum() {
    let real = gauss(0.0, 1.0);
    let fake = gauss(1.0, 1.0);
    let mut cfg = TrainConfig::vanilla(5);
    cfg.batch_size = 256;
    cfg.noise_dim = 1;
    cfg.d_hidden = vec![32, 32];
    cfg.d_activation = Activation::Tanh;
    cfg.d_optimizer = OptimizerConfig::adam(2e-3);
    let mut t = TrainerState::with_generator(cfg, real.clone(), affine(1.0, 1.0)).unwrap();
    for _ in 0..3000 {
        t.discriminator_step().unwrap();
    }
    let xs: Vec<f64> = (0..=100).map(|i| -4.0 + 9.0 * i as f64 / 100.0).collect();
    let d = t.critic().evaluate(&Matrix::column(&xs)).unwrap().into_vec();
    let err: f64 = xs
        .iter()
        .zip(&d)
        .map(|(&x, &dx)| (dx - optimal_discriminator(&real, &fake, &[x]).unwrap()).abs())
        .sum::<f64>()
        / xs.len() as f64;
    assert!(err < 0.05, "mean |D - D*| = {err}");
}

#[test]
fn clipped_critic_estimate_over_lipschitz_brackets_true_distance() {
    // Real N(0, 1) against a frozen generator producing N(3, 1).
    let real = gauss(0.0, 1.0);
    let mut cfg = TrainConfig::wgan(17);
    cfg.batch_size = 256;
    cfg.noise_dim = 1;
    cfg.d_hidden = vec![32, 32];
    cfg.d_activation = Activation::Tanh;
    cfg.d_optimizer = OptimizerConfig::rmsprop(5e-4);
    let mut t = TrainerState::with_generator(cfg, real.clone(), affine(1.0, 3.0)).unwrap();
    for _ in 0..3000 {
        t.discriminator_step().unwrap();
    }
    let n = 20_000;
    let xr = real.sample(&mut Stream::split(17, streams::EVAL, 1), n);
    let xf = t.sample_generator(n, 2).unwrap();
    let fr = t.critic().evaluate(&xr).unwrap().into_vec();
    let ff = t.critic().evaluate(&xf).unwrap().into_vec();
    let estimate = losses::wasserstein_estimate(&fr, &ff).unwrap();
    let net = t.critic().to_network().unwrap();
    let k = lipschitz_probe(&net, &grid_pairs_1d(-5.0, 8.0, 2001)).unwrap();
    let oracle = wasserstein_1d(&xr.into_vec(), &xf.into_vec()).unwrap();
    let scaled = estimate / k;
    assert!(scaled <= oracle * 1.25, "estimate/K = {scaled}, W = {oracle}");
    assert!(scaled >= oracle * 0.75, "estimate/K = {scaled}, W = {oracle}");
}
