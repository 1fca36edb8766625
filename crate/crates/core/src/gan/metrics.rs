//! Sample-quality diagnostics.

use crate::matrix::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ModeCoverage {
    pub covered: usize,
    /// Share of samples within `radius` of some center.
    pub hq_fraction: f64,
    /// Samples assigned to each center (nearest center within radius).
    pub counts: Vec<usize>,
}

/// A mode is covered once at least `min_count` samples land within `radius`
/// of its center. Samples near several centers count for the nearest.
pub fn mode_coverage(samples: &Matrix, centers: &[Vec<f64>], radius: f64, min_count: usize) -> Result<ModeCoverage> {
    if centers.is_empty() {
        return Err(Error::invalid("centers", "need at least one mode center"));
    }
    if !(radius > 0.0) {
        return Err(Error::invalid("radius", format!("radius must be > 0, got {radius}")));
    }
    if let Some(c) = centers.iter().find(|c| c.len() != samples.cols()) {
        return Err(Error::DimensionMismatch {
            expected: samples.cols(),
            got: c.len(),
        });
    }
    let r2 = radius * radius;
    let mut counts = vec![0usize; centers.len()];
    let mut hits = 0usize;
    for row in samples.iter_rows() {
        let nearest = centers
            .iter()
            .enumerate()
            .map(|(k, c)| (k, c.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("centers nonempty");
        if nearest.1 <= r2 {
            counts[nearest.0] += 1;
            hits += 1;
        }
    }
    let covered = counts.iter().filter(|&&c| c >= min_count.max(1)).count();
    let hq_fraction = if samples.is_empty() {
        0.0
    } else {
        hits as f64 / samples.rows() as f64
    };
    Ok(ModeCoverage {
        covered,
        hq_fraction,
        counts,
    })
}

/// Average ranks (1-based), ties sharing the mean of their positions.
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation. Returns 0 when either input is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(Error::invalid("samples", "need at least two points"));
    }
    let ra = ranks(a);
    let rb = ranks(b);
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return Ok(0.0);
    }
    Ok(cov / (va * vb).sqrt())
}
