//! Empirical and analytic Lipschitz constants of scalar-output networks.

use super::{Model, Network};
use crate::matrix::Matrix;
use crate::{Error, Result};

/// Largest observed `|f(x₁) − f(x₂)| / ‖x₁ − x₂‖₂` over the given pairs, a
/// lower bound on the true constant. Pairs with `x₁ = x₂` are skipped.
pub fn lipschitz_probe(net: &Network, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    if net.output_dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: net.output_dim(),
        });
    }
    if pairs.is_empty() {
        return Ok(0.0);
    }
    let left = Matrix::from_rows(&pairs.iter().map(|p| p.0.clone()).collect::<Vec<_>>());
    let right = Matrix::from_rows(&pairs.iter().map(|p| p.1.clone()).collect::<Vec<_>>());
    let fl = net.evaluate(&left)?;
    let fr = net.evaluate(&right)?;
    let mut best = 0.0f64;
    for (i, (a, b)) in pairs.iter().enumerate() {
        let dist = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
        if dist == 0.0 {
            continue;
        }
        best = best.max((fl.get(i, 0) - fr.get(i, 0)).abs() / dist);
    }
    Ok(best)
}

/// Adjacent pairs along an evenly spaced 1-D grid on `[lo, hi]`.
pub fn grid_pairs_1d(lo: f64, hi: f64, points: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let step = (hi - lo) / (points.max(2) - 1) as f64;
    (0..points.max(2) - 1)
        .map(|i| (vec![lo + i as f64 * step], vec![lo + (i + 1) as f64 * step]))
        .collect()
}

/// `∏ ‖W_l‖_F · Lip(σ_l)`, an upper bound on the network's Lipschitz constant
/// in the Euclidean norm (Frobenius dominates the operator norm).
pub fn lipschitz_bound(net: &Network) -> f64 {
    net.layers()
        .iter()
        .map(|l| l.weights().iter().map(|w| w * w).sum::<f64>().sqrt() * l.activation().lipschitz())
        .product()
}
