//! Vertical segments at `x = 0` and `x = θ`: closed-form divergences and a
//! sample-based cross-check.

use std::f64::consts::LN_2;
use std::path::Path;

use ganlab_core::distributions::{AnalyticDistribution, Histogram, SegmentDistribution};
use ganlab_core::divergences::{js_discrete, parallel_lines_table, wasserstein_per_coordinate};
use ganlab_core::rng::{streams, Stream};

use super::{linspace, Outputs};
use crate::error::Result;
use crate::params::{choice, paper, ParamDef, Params};
use crate::plot::PlotKind;
use crate::table::Table;

pub fn defaults() -> Vec<ParamDef> {
    vec![
        paper("sweep.start", 0.0),
        paper("sweep.stop", 1.0),
        choice("sweep.points", 11),
        choice("samples", 2000),
        choice("bins", 20),
    ]
}

/// Histogram of the first coordinate on `bins` equal cells of `[lo, hi]`.
fn x_histogram(xs: &[f64], lo: f64, hi: f64, bins: usize) -> Histogram {
    let mut counts = vec![0u32; bins];
    for &x in xs {
        let k = (((x - lo) / (hi - lo)) * bins as f64).floor() as isize;
        counts[k.clamp(0, bins as isize - 1) as usize] += 1;
    }
    Histogram::from_counts(&counts)
}

pub fn run(params: &Params, out: &Path) -> Result<Outputs> {
    let thetas = linspace("sweep.points", params.f64("sweep.start")?, params.f64("sweep.stop")?, params.usize("sweep.points")?)?;
    let n = params.usize("samples")?;
    let bins = params.usize("bins")?.max(1);

    let mut t = Table::new(&super::divergence_sweep::HEADER);
    let mut e = Table::new(&["theta", "w_x", "w_y", "js_hist_nats"]);
    let p: AnalyticDistribution = SegmentDistribution::new(0.0)?.into();
    for (k, &theta) in thetas.iter().enumerate() {
        let row = parallel_lines_table(theta)?;
        t.push_f64(&[
            theta,
            row.kl_pq.as_nats(),
            row.kl_qp.as_nats(),
            row.js.as_nats(),
            row.js.as_nats() / LN_2,
            row.w,
        ]);

        let q: AnalyticDistribution = SegmentDistribution::new(theta)?.into();
        let mut rp = Stream::split(params.seed(), streams::DATA, 2 * k as u64);
        let mut rq = Stream::split(params.seed(), streams::DATA, 2 * k as u64 + 1);
        let sp = p.sample(&mut rp, n);
        let sq = q.sample(&mut rq, n);
        let w = wasserstein_per_coordinate(&sp, &sq)?;
        // Half-open cells on [0, 1 + 1/bins) keep θ = 1 in its own cell.
        let hi = 1.0 + 1.0 / bins as f64;
        let js = js_discrete(
            &x_histogram(&sp.col(0), 0.0, hi, bins + 1).normalized()?,
            &x_histogram(&sq.col(0), 0.0, hi, bins + 1).normalized()?,
        )?;
        e.push_f64(&[theta, w[0], w[1], js.as_nats()]);
    }
    let mut o = Outputs::default();
    o.emit(out, "parallel_lines", &t, Some(PlotKind::Divergence))?;
    o.emit(out, "parallel_lines_empirical", &e, None)?;
    Ok(o)
}
