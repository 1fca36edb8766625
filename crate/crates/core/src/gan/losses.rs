//! Discriminator/critic and generator objectives with their gradients with
//! respect to the network outputs.
//!
//! Vanilla losses take probabilities, clamped to `[ε, 1 − ε]` inside logs.
//! Gradients use the clamped value in denominators only, so a fully
//! saturated sigmoid yields a zero (not NaN) gradient after the chain rule.

use crate::{Error, Result};

pub const PROB_EPS: f64 = 1e-7;

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

fn mean(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptyBatch);
    }
    Ok(xs.iter().sum::<f64>() / xs.len() as f64)
}

/// `−(mean log D(x) + mean log(1 − D(G(z))))`.
pub fn d_loss_vanilla(d_real: &[f64], d_fake: &[f64]) -> Result<f64> {
    let real: Vec<f64> = d_real.iter().map(|&p| clamp_prob(p).ln()).collect();
    let fake: Vec<f64> = d_fake.iter().map(|&p| (1.0 - clamp_prob(p)).ln()).collect();
    Ok(-(mean(&real)? + mean(&fake)?))
}

/// Binary cross-entropy `−(t log p + (1 − t) log(1 − p))`.
fn bce(p: f64, t: f64) -> f64 {
    let c = clamp_prob(p);
    -(t * c.ln() + (1.0 - t) * (1.0 - c).ln())
}

fn bce_grad(p: f64, t: f64) -> f64 {
    let c = clamp_prob(p);
    -t / c + (1.0 - t) / (1.0 - c)
}

/// Cross-entropy discriminator loss with real targets `pos` and fake
/// targets `neg`. With `(1, 0)` this equals [`d_loss_vanilla`].
pub fn d_loss_smoothed(d_real: &[f64], d_fake: &[f64], pos: f64, neg: f64) -> Result<f64> {
    let real: Vec<f64> = d_real.iter().map(|&p| bce(p, pos)).collect();
    let fake: Vec<f64> = d_fake.iter().map(|&p| bce(p, neg)).collect();
    Ok(mean(&real)? + mean(&fake)?)
}

/// Gradients of [`d_loss_smoothed`] with respect to each probability.
pub fn d_loss_smoothed_grad(d_real: &[f64], d_fake: &[f64], pos: f64, neg: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if d_real.is_empty() || d_fake.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let nr = d_real.len() as f64;
    let nf = d_fake.len() as f64;
    Ok((
        d_real.iter().map(|&p| bce_grad(p, pos) / nr).collect(),
        d_fake.iter().map(|&p| bce_grad(p, neg) / nf).collect(),
    ))
}

/// `mean log(1 − D(G(z)))`, minimized by the generator.
pub fn g_loss_vanilla(d_fake: &[f64]) -> Result<f64> {
    let terms: Vec<f64> = d_fake.iter().map(|&p| (1.0 - clamp_prob(p)).ln()).collect();
    mean(&terms)
}

pub fn g_loss_vanilla_grad(d_fake: &[f64]) -> Result<Vec<f64>> {
    if d_fake.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let n = d_fake.len() as f64;
    Ok(d_fake.iter().map(|&p| -1.0 / (1.0 - clamp_prob(p)) / n).collect())
}

/// `−mean log D(G(z))`.
pub fn g_loss_nonsaturating(d_fake: &[f64]) -> Result<f64> {
    let terms: Vec<f64> = d_fake.iter().map(|&p| clamp_prob(p).ln()).collect();
    Ok(-mean(&terms)?)
}

pub fn g_loss_nonsaturating_grad(d_fake: &[f64]) -> Result<Vec<f64>> {
    if d_fake.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let n = d_fake.len() as f64;
    Ok(d_fake.iter().map(|&p| -1.0 / clamp_prob(p) / n).collect())
}

/// `−(mean f(x) − mean f(G(z)))`; no logarithms.
pub fn critic_loss_wgan(f_real: &[f64], f_fake: &[f64]) -> Result<f64> {
    Ok(-(mean(f_real)? - mean(f_fake)?))
}

pub fn critic_loss_wgan_grad(f_real: &[f64], f_fake: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if f_real.is_empty() || f_fake.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let nr = f_real.len() as f64;
    let nf = f_fake.len() as f64;
    Ok((vec![-1.0 / nr; f_real.len()], vec![1.0 / nf; f_fake.len()]))
}

/// `−mean f(G(z))`.
pub fn g_loss_wgan(f_fake: &[f64]) -> Result<f64> {
    Ok(-mean(f_fake)?)
}

pub fn g_loss_wgan_grad(f_fake: &[f64]) -> Result<Vec<f64>> {
    if f_fake.is_empty() {
        return Err(Error::EmptyBatch);
    }
    Ok(vec![-1.0 / f_fake.len() as f64; f_fake.len()])
}

/// `mean f(x) − mean f(G(z))`, the critic's estimate of `K · W(p_r, p_g)`.
pub fn wasserstein_estimate(f_real: &[f64], f_fake: &[f64]) -> Result<f64> {
    Ok(mean(f_real)? - mean(f_fake)?)
}
