//! Synthetic distributions used by every experiment.
//!
//! Densities are closed form. [`SegmentDistribution`] is degenerate in the
//! plane, so its `pdf` is the density with respect to length along the
//! segment `{θ} × [0, 1]`.

use std::f64::consts::{PI, SQRT_2};

use crate::matrix::Matrix;
use crate::rng::{streams, Stream};
use crate::{Error, Result};

/// Nonnegative masses on unit-spaced bins `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    masses: Vec<f64>,
}

impl Histogram {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::invalid("masses", "histogram needs at least one bin"));
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::invalid("masses", format!("mass {m} is not a finite nonnegative value")));
        }
        Ok(Histogram { masses })
    }

    pub fn from_counts(counts: &[u32]) -> Self {
        Histogram::new(counts.iter().map(|&c| c as f64).collect()).expect("counts are valid masses")
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Rescales to unit total mass. Fails on an all-zero histogram.
    pub fn normalized(&self) -> Result<Histogram> {
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::NotNormalized(total));
        }
        Ok(Histogram {
            masses: self.masses.iter().map(|m| m / total).collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian1D {
    pub mean: f64,
    pub std: f64,
}

impl Gaussian1D {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        if !(std > 0.0 && std.is_finite()) || !mean.is_finite() {
            return Err(Error::invalid("std", format!("need finite mean and std > 0, got ({mean}, {std})")));
        }
        Ok(Gaussian1D { mean, std })
    }

    pub fn standard() -> Self {
        Gaussian1D { mean: 0.0, std: 1.0 }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.std;
        -0.5 * z * z - self.std.ln() - 0.5 * (2.0 * PI).ln()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        0.5 * libm::erfc(-(x - self.mean) / (self.std * SQRT_2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uniform1D {
    pub lo: f64,
    pub hi: f64,
}

impl Uniform1D {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::invalid("hi", format!("need finite lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Uniform1D { lo, hi })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if (self.lo..=self.hi).contains(&x) {
            1.0 / (self.hi - self.lo)
        } else {
            0.0
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        ((x - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    pub center: [f64; 2],
    pub std: f64,
}

/// Isotropic 2-D Gaussian mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture2D {
    components: Vec<MixtureComponent>,
    weights: Vec<f64>,
}

impl GaussianMixture2D {
    pub fn new(components: Vec<MixtureComponent>, weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("components", "mixture needs at least one component"));
        }
        if components.len() != weights.len() {
            return Err(Error::LengthMismatch(components.len(), weights.len()));
        }
        if let Some(c) = components.iter().find(|c| !(c.std > 0.0 && c.std.is_finite())) {
            return Err(Error::invalid("std", format!("component std must be > 0, got {}", c.std)));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("weights", "weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(total));
        }
        Ok(GaussianMixture2D { components, weights })
    }

    /// `n_modes` equal-weight components evenly spaced on a circle.
    pub fn ring(n_modes: usize, radius: f64, std: f64) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::invalid("n_modes", "ring needs at least one mode"));
        }
        let components = (0..n_modes)
            .map(|k| {
                let angle = 2.0 * PI * k as f64 / n_modes as f64;
                MixtureComponent {
                    center: [radius * angle.cos(), radius * angle.sin()],
                    std,
                }
            })
            .collect();
        // 1/n summed n times can miss 1 by a few ulps; give the rounding to the last weight.
        let mut weights = vec![1.0 / n_modes as f64; n_modes];
        let head: f64 = weights[..n_modes - 1].iter().sum();
        weights[n_modes - 1] = 1.0 - head;
        GaussianMixture2D::new(components, weights)
    }

    pub fn single(center: [f64; 2], std: f64) -> Result<Self> {
        GaussianMixture2D::new(vec![MixtureComponent { center, std }], vec![1.0])
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn centers(&self) -> Vec<[f64; 2]> {
        self.components.iter().map(|c| c.center).collect()
    }

    pub fn pdf(&self, x: [f64; 2]) -> f64 {
        self.components
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| {
                let dx = x[0] - c.center[0];
                let dy = x[1] - c.center[1];
                let var = c.std * c.std;
                w * (-(dx * dx + dy * dy) / (2.0 * var)).exp() / (2.0 * PI * var)
            })
            .sum()
    }

    fn sample_one(&self, rng: &mut Stream) -> [f64; 2] {
        let u = rng.uniform();
        let mut acc = 0.0;
        let mut chosen = self.components.len() - 1;
        for (k, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                chosen = k;
                break;
            }
        }
        let c = &self.components[chosen];
        [rng.normal(c.center[0], c.std), rng.normal(c.center[1], c.std)]
    }
}

/// Points `(θ, y)` with `y ~ U(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentDistribution {
    pub theta: f64,
}

impl SegmentDistribution {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::invalid("theta", format!("theta must lie in [0, 1], got {theta}")));
        }
        Ok(SegmentDistribution { theta })
    }

    pub fn pdf(&self, x: [f64; 2]) -> f64 {
        if x[0] == self.theta && (0.0..=1.0).contains(&x[1]) {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticDistribution {
    Gaussian(Gaussian1D),
    Uniform(Uniform1D),
    Mixture2D(GaussianMixture2D),
    Segment(SegmentDistribution),
}

impl From<Gaussian1D> for AnalyticDistribution {
    fn from(g: Gaussian1D) -> Self {
        AnalyticDistribution::Gaussian(g)
    }
}

impl From<Uniform1D> for AnalyticDistribution {
    fn from(u: Uniform1D) -> Self {
        AnalyticDistribution::Uniform(u)
    }
}

impl From<GaussianMixture2D> for AnalyticDistribution {
    fn from(m: GaussianMixture2D) -> Self {
        AnalyticDistribution::Mixture2D(m)
    }
}

impl From<SegmentDistribution> for AnalyticDistribution {
    fn from(s: SegmentDistribution) -> Self {
        AnalyticDistribution::Segment(s)
    }
}

impl AnalyticDistribution {
    pub fn dim(&self) -> usize {
        match self {
            AnalyticDistribution::Gaussian(_) | AnalyticDistribution::Uniform(_) => 1,
            AnalyticDistribution::Mixture2D(_) | AnalyticDistribution::Segment(_) => 2,
        }
    }

    pub fn pdf(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(match self {
            AnalyticDistribution::Gaussian(g) => g.pdf(x[0]),
            AnalyticDistribution::Uniform(u) => u.pdf(x[0]),
            AnalyticDistribution::Mixture2D(m) => m.pdf([x[0], x[1]]),
            AnalyticDistribution::Segment(s) => s.pdf([x[0], x[1]]),
        })
    }

    /// Log-density; `-inf` outside the support. Gaussians are evaluated in log
    /// space so far tails do not underflow.
    pub fn ln_pdf(&self, x: &[f64]) -> Result<f64> {
        match self {
            AnalyticDistribution::Gaussian(g) => {
                self.check_dim(x)?;
                Ok(g.ln_pdf(x[0]))
            }
            _ => self.pdf(x).map(f64::ln),
        }
    }

    pub fn cdf_1d(&self, x: f64) -> Result<f64> {
        match self {
            AnalyticDistribution::Gaussian(g) => Ok(g.cdf(x)),
            AnalyticDistribution::Uniform(u) => Ok(u.cdf(x)),
            _ => Err(Error::DimensionMismatch {
                expected: 1,
                got: self.dim(),
            }),
        }
    }

    /// An interval that carries all but a negligible tail of a 1-D law:
    /// `mean ± 8 std` for Gaussians, the support for uniforms.
    pub fn covering_interval(&self) -> Result<(f64, f64)> {
        match self {
            AnalyticDistribution::Gaussian(g) => Ok((g.mean - 8.0 * g.std, g.mean + 8.0 * g.std)),
            AnalyticDistribution::Uniform(u) => Ok((u.lo, u.hi)),
            _ => Err(Error::DimensionMismatch {
                expected: 1,
                got: self.dim(),
            }),
        }
    }

    /// Draws `n` points as an `n × dim` matrix.
    pub fn sample(&self, rng: &mut Stream, n: usize) -> Matrix {
        let dim = self.dim();
        let mut data = Vec::with_capacity(n * dim);
        for _ in 0..n {
            match self {
                AnalyticDistribution::Gaussian(g) => data.push(rng.normal(g.mean, g.std)),
                AnalyticDistribution::Uniform(u) => data.push(rng.uniform_range(u.lo, u.hi)),
                AnalyticDistribution::Mixture2D(m) => data.extend_from_slice(&m.sample_one(rng)),
                AnalyticDistribution::Segment(s) => {
                    data.push(s.theta);
                    data.push(rng.uniform());
                }
            }
        }
        Matrix::from_vec(n, dim, data).expect("sample buffer has n * dim entries")
    }

    /// Samples from a fresh stream keyed by `seed`; a pure function of `(self, seed, n)`.
    pub fn sample_seeded(&self, seed: u64, n: usize) -> Matrix {
        self.sample(&mut Stream::new(seed, streams::DATA), n)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLaw {
    /// Uniform on the hypercube `[lo, hi]^dim`.
    Uniform { lo: f64, hi: f64 },
    StandardNormal,
}

/// Latent noise `z ~ p_z` for a generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSource {
    pub law: NoiseLaw,
    pub dim: usize,
    pub seed: u64,
}

impl NoiseSource {
    pub fn new(law: NoiseLaw, dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "noise dimension must be at least 1"));
        }
        if let NoiseLaw::Uniform { lo, hi } = law {
            if !(lo < hi) {
                return Err(Error::invalid("hi", format!("need lo < hi, got [{lo}, {hi}]")));
            }
        }
        Ok(NoiseSource { law, dim, seed })
    }

    pub fn stream(&self) -> NoiseStream {
        NoiseStream {
            law: self.law,
            dim: self.dim,
            rng: Stream::new(self.seed, streams::LATENT),
        }
    }

    pub fn sample(&self, n: usize) -> Matrix {
        self.stream().next_batch(n)
    }
}

#[derive(Debug, Clone)]
pub struct NoiseStream {
    law: NoiseLaw,
    dim: usize,
    rng: Stream,
}

impl NoiseStream {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn next_batch(&mut self, n: usize) -> Matrix {
        let data = (0..n * self.dim)
            .map(|_| match self.law {
                NoiseLaw::Uniform { lo, hi } => self.rng.uniform_range(lo, hi),
                NoiseLaw::StandardNormal => self.rng.standard_normal(),
            })
            .collect();
        Matrix::from_vec(n, self.dim, data).expect("noise buffer has n * dim entries")
    }
}

/// Uniform trapezoid grid on `[lo, hi]` with `points` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Grid {
    pub const DEFAULT_POINTS: usize = 100_000;

    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo < hi) || points < 2 {
            return Err(Error::invalid("grid", format!("need lo < hi and >= 2 points, got [{lo}, {hi}] x {points}")));
        }
        Ok(Grid { lo, hi, points })
    }

    /// Default grid for one distribution.
    pub fn covering(dist: &AnalyticDistribution) -> Result<Self> {
        let (lo, hi) = dist.covering_interval()?;
        Grid::new(lo, hi, Self::DEFAULT_POINTS)
    }

    /// Union of the default grids of two distributions.
    pub fn covering_both(p: &AnalyticDistribution, q: &AnalyticDistribution) -> Result<Self> {
        let (a, b) = p.covering_interval()?;
        let (c, d) = q.covering_interval()?;
        Grid::new(a.min(c), b.max(d), Self::DEFAULT_POINTS)
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|i| self.node(i))
    }

    /// Composite trapezoid rule.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.points {
            let w = if i == 0 || i + 1 == self.points { 0.5 } else { 1.0 };
            acc += w * f(self.node(i));
        }
        acc * self.step()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_normal_peak() {
        let g = AnalyticDistribution::from(Gaussian1D::standard());
        let v = g.pdf(&[0.0]).unwrap();
        assert!((v - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        assert!((v - 0.39894).abs() < 1e-5);
    }

    #[test]
    fn single_component_mixture_peak() {
        let std = 0.3;
        let m = AnalyticDistribution::from(GaussianMixture2D::single([1.0, -2.0], std).unwrap());
        let v = m.pdf(&[1.0, -2.0]).unwrap();
        assert!((v - 1.0 / (2.0 * PI * std * std)).abs() < 1e-12);
    }

    #[test]
    fn pdf_dimension_mismatch() {
        let g = AnalyticDistribution::from(Gaussian1D::standard());
        assert!(matches!(g.pdf(&[0.0, 1.0]), Err(Error::DimensionMismatch { .. })));
        let seg = AnalyticDistribution::from(SegmentDistribution::new(0.5).unwrap());
        assert!(seg.pdf(&[0.5]).is_err());
    }

    #[test]
    fn gaussian_quadrature_integrates_to_one() {
        let g = AnalyticDistribution::from(Gaussian1D::standard());
        let grid = Grid::new(-8.0, 8.0, 100_000).unwrap();
        let total = grid.integrate(|x| g.pdf(&[x]).unwrap());
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn shifted_gaussian_integrates_to_one_on_default_grid() {
        let g = AnalyticDistribution::from(Gaussian1D::new(-3.0, 2.5).unwrap());
        let grid = Grid::covering(&g).unwrap();
        let total = grid.integrate(|x| g.pdf(&[x]).unwrap());
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn mixture_integrates_to_one() {
        // 2-D trapezoid over a box covering every ring component.
        let m = GaussianMixture2D::ring(8, 2.0, 0.25).unwrap();
        let grid = Grid::new(-5.0, 5.0, 801).unwrap();
        let h = grid.step();
        let mut total = 0.0;
        for i in 0..grid.points {
            let wi = if i == 0 || i + 1 == grid.points { 0.5 } else { 1.0 };
            for j in 0..grid.points {
                let wj = if j == 0 || j + 1 == grid.points { 0.5 } else { 1.0 };
                total += wi * wj * m.pdf([grid.node(i), grid.node(j)]);
            }
        }
        total *= h * h;
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn cdf_values() {
        let g = AnalyticDistribution::from(Gaussian1D::standard());
        assert_eq!(g.cdf_1d(0.0).unwrap(), 0.5);
        assert_eq!(g.cdf_1d(f64::NEG_INFINITY).unwrap(), 0.0);
        assert_eq!(g.cdf_1d(f64::INFINITY).unwrap(), 1.0);
        // Oracle: trapezoid integral of the pdf from -8 to 1.
        let grid = Grid::new(-8.0, 1.0, 100_000).unwrap();
        let integrated = grid.integrate(|x| g.pdf(&[x]).unwrap());
        assert!((integrated - 0.841345).abs() < 1e-6);
        assert!((g.cdf_1d(1.0).unwrap() - integrated).abs() < 1e-6);
    }

    #[test]
    fn cdf_rejects_2d() {
        let m = AnalyticDistribution::from(GaussianMixture2D::ring(8, 2.0, 0.1).unwrap());
        assert!(m.cdf_1d(0.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = AnalyticDistribution::from(Gaussian1D::new(3.0, 1.0).unwrap());
        assert!(g.sample_seeded(9, 0).is_empty());
        assert_eq!(g.sample_seeded(9, 100), g.sample_seeded(9, 100));
        assert_ne!(g.sample_seeded(9, 100), g.sample_seeded(10, 100));
    }

    #[test]
    fn sample_mean_matches() {
        let g = AnalyticDistribution::from(Gaussian1D::new(3.0, 1.0).unwrap());
        let s = g.sample_seeded(11, 100_000);
        let mean = s.data().iter().sum::<f64>() / 100_000.0;
        assert!((mean - 3.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn segment_samples_fixed_x() {
        let seg = AnalyticDistribution::from(SegmentDistribution::new(0.3).unwrap());
        let s = seg.sample_seeded(5, 1000);
        for row in s.iter_rows() {
            assert_eq!(row[0], 0.3);
            assert!((0.0..1.0).contains(&row[1]));
        }
        assert!(SegmentDistribution::new(1.5).is_err());
    }

    #[test]
    fn validation() {
        assert!(Gaussian1D::new(0.0, 0.0).is_err());
        assert!(Histogram::new(vec![]).is_err());
        assert!(Histogram::new(vec![1.0, -0.5]).is_err());
        assert!(GaussianMixture2D::new(
            vec![MixtureComponent { center: [0.0, 0.0], std: 1.0 }],
            vec![0.5]
        )
        .is_err());
        assert!(NoiseSource::new(NoiseLaw::StandardNormal, 0, 1).is_err());
    }

    #[test]
    fn ring_weights_sum_to_one() {
        for n in 1..20 {
            let m = GaussianMixture2D::ring(n, 2.0, 0.02).unwrap();
            assert!((m.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn noise_replays() {
        let src = NoiseSource::new(NoiseLaw::Uniform { lo: -1.0, hi: 1.0 }, 3, 17).unwrap();
        let a = src.sample(50);
        assert_eq!(a, src.sample(50));
        assert_eq!(a.shape(), (50, 3));
        assert!(a.data().iter().all(|v| (-1.0..1.0).contains(v)));
    }
}
