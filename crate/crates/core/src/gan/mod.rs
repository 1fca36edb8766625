//! GAN and WGAN objectives, analytic optima, training stabilizers and the
//! training loop.

pub mod analytic;
pub mod critic;
pub mod losses;
pub mod metrics;
pub mod trainer;
pub mod tricks;

pub use analytic::{loss_js_identity_check, optimal_discriminator, IdentityCheck};
pub use critic::Critic;
pub use losses::{
    critic_loss_wgan, d_loss_smoothed, d_loss_vanilla, g_loss_nonsaturating, g_loss_vanilla, g_loss_wgan,
    wasserstein_estimate, PROB_EPS,
};
pub use metrics::{mode_coverage, spearman, ModeCoverage};
pub use trainer::{
    gradient_norm_probe, CriticStep, GanMode, GeneratorLoss, MetricsRow, TrainConfig, TrainerState, Tricks,
};
pub use tricks::{
    add_instance_noise, feature_matching_loss, historical_average_penalty, minibatch_discrimination,
    smooth_labels, virtual_batch_norm, LabelSmoothing, MinibatchLayer, NoiseSchedule, RunningMean, VbnStats,
};
