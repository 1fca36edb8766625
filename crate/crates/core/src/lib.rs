//! Toy-scale laboratory for adversarial training theory.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`distributions`] | Gaussians, 2-D mixtures, segment laws, noise sources, histograms |
//! | [`divergences`] | KL, JS, earth mover's distance (recurrence and exhaustive), 1-D Wasserstein |
//! | [`dynamics`] | Simultaneous gradient play on `f(x, y) = xy` |
//! | [`nn`] | Layered MLPs with reverse-mode gradients, optimizers, clipping, checkpoints |
//! | [`gan`] | Vanilla and Wasserstein objectives, training loop, training tricks, diagnostics |
//!
//! All randomness flows through [`rng`], which derives ChaCha8 streams from a
//! `(seed, stream)` pair so every experiment replays bit-for-bit.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod divergences;
pub mod dynamics;
mod error;
pub mod gan;
pub mod matrix;
pub mod nn;
pub mod rng;

pub use error::{Error, Result};
pub use matrix::Matrix;
