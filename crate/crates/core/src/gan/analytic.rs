//! Closed-form optimal discriminator and the value of the minimax objective
//! at that optimum.

use std::f64::consts::LN_2;

use crate::distributions::{AnalyticDistribution, Grid};
use crate::divergences::js_continuous;
use crate::{Error, Result};

/// `p_r(x) / (p_r(x) + p_g(x))`.
pub fn optimal_discriminator(p_r: &AnalyticDistribution, p_g: &AnalyticDistribution, x: &[f64]) -> Result<f64> {
    let r = p_r.pdf(x)?;
    let g = p_g.pdf(x)?;
    if r + g <= 0.0 {
        return Err(Error::Undefined(format!("both densities vanish at {x:?}")));
    }
    Ok(r / (r + g))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    /// `∫ p_r log D* + p_g log(1 − D*)`.
    pub lhs: f64,
    /// `2 JS(p_r, p_g) − 2 log 2`.
    pub rhs: f64,
    pub gap: f64,
}

/// Evaluates the objective at `D*` by quadrature and compares it with the JS
/// form. The two sides share no code beyond the densities.
pub fn loss_js_identity_check(
    p_r: &AnalyticDistribution,
    p_g: &AnalyticDistribution,
    grid: &Grid,
) -> Result<IdentityCheck> {
    let lhs = grid.integrate(|x| {
        // log D* = log p_r − log(p_r + p_g), evaluated in log space.
        let lr = p_r.ln_pdf(&[x]).expect("1-D");
        let lg = p_g.ln_pdf(&[x]).expect("1-D");
        let hi = lr.max(lg);
        if hi == f64::NEG_INFINITY {
            return 0.0;
        }
        let ls = hi + ((lr - hi).exp() + (lg - hi).exp()).ln();
        let mut acc = 0.0;
        if lr > f64::NEG_INFINITY {
            acc += lr.exp() * (lr - ls);
        }
        if lg > f64::NEG_INFINITY {
            acc += lg.exp() * (lg - ls);
        }
        acc
    });
    let js = js_continuous(p_r, p_g, grid)?.as_nats();
    let rhs = 2.0 * js - 2.0 * LN_2;
    Ok(IdentityCheck {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}
