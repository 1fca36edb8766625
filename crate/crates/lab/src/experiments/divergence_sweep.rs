//! KL both ways, JS and W between `p` and a family `q(t)`.

use std::f64::consts::LN_2;
use std::path::Path;

use ganlab_core::distributions::Grid;
use ganlab_core::divergences::{js_continuous, kl_continuous, wasserstein_1d_analytic};

use super::{linspace, Outputs};
use crate::dist;
use crate::error::{LabError, Result};
use crate::params::{choice, paper, ParamDef, Params};
use crate::plot::PlotKind;
use crate::table::Table;

pub const HEADER: [&str; 6] = ["theta_or_param", "kl_pq", "kl_qp", "js_nats", "js_bits", "w"];

pub fn defaults() -> Vec<ParamDef> {
    vec![
        paper("p", "gaussian(0, 1)"),
        choice("q", "gaussian(t, 1)"),
        choice("sweep.start", 0.0),
        choice("sweep.stop", 4.0),
        choice("sweep.points", 41),
        paper("grid.points", Grid::DEFAULT_POINTS as u64),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub t: f64,
    pub kl_pq: f64,
    pub kl_qp: f64,
    pub js: f64,
    pub w: f64,
}

pub fn sweep(params: &Params) -> Result<Vec<SweepRow>> {
    let p = dist::parse("p", params.str("p")?, None)?;
    if p.dim() != 1 {
        return Err(LabError::config("p", "sweep needs a 1-D distribution"));
    }
    let q_spec = params.str("q")?;
    let points = params.usize("grid.points")?;
    let ts = linspace("sweep.points", params.f64("sweep.start")?, params.f64("sweep.stop")?, params.usize("sweep.points")?)?;
    ts.into_iter()
        .map(|t| {
            let q = dist::parse("q", q_spec, Some(t))?;
            if q.dim() != 1 {
                return Err(LabError::config("q", "sweep needs a 1-D distribution"));
            }
            let cover = Grid::covering_both(&p, &q)?;
            let grid = Grid::new(cover.lo, cover.hi, points).map_err(|e| LabError::config("grid.points", e.to_string()))?;
            Ok(SweepRow {
                t,
                kl_pq: kl_continuous(&p, &q, &grid)?.as_nats(),
                kl_qp: kl_continuous(&q, &p, &grid)?.as_nats(),
                js: js_continuous(&p, &q, &grid)?.as_nats(),
                w: wasserstein_1d_analytic(&p, &q, &grid)?,
            })
        })
        .collect()
}

pub fn run(params: &Params, out: &Path) -> Result<Outputs> {
    let mut t = Table::new(&HEADER);
    for r in sweep(params)? {
        t.push_f64(&[r.t, r.kl_pq, r.kl_qp, r.js, r.js / LN_2, r.w]);
    }
    let mut o = Outputs::default();
    o.emit(out, "divergence_sweep", &t, Some(PlotKind::Divergence))?;
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ConfigFile;

    fn params(toml: &str) -> Params {
        let f = ConfigFile::from_toml(toml).unwrap();
        Params::resolve("divergence_sweep", &defaults(), &f, Some(1)).unwrap()
    }

    #[test]
    fn unit_shift_matches_closed_forms() {
        let rows = sweep(&params("sweep.start = 1.0\nsweep.stop = 1.0\nsweep.points = 1\ngrid.points = 20001")).unwrap();
        let r = rows[0];
        // KL between unit-variance Gaussians is Δ²/2; W is |Δ|.
        assert!((r.kl_pq - 0.5).abs() < 1e-6);
        assert!((r.kl_qp - 0.5).abs() < 1e-6);
        assert!((r.w - 1.0).abs() < 1e-6);
        assert!(r.js > 0.0 && r.js < LN_2);
    }

    #[test]
    fn disjoint_uniforms_give_inf() {
        let rows = sweep(&params(
            "p = \"uniform(0, 1)\"\nq = \"uniform(t, 3)\"\nsweep.start = 2\nsweep.stop = 2\nsweep.points = 1\ngrid.points = 10001",
        ))
        .unwrap();
        assert_eq!(rows[0].kl_pq, f64::INFINITY);
        assert_eq!(rows[0].kl_qp, f64::INFINITY);
        assert!((rows[0].js - LN_2).abs() < 1e-12);
    }

    #[test]
    fn rejects_2d() {
        assert!(sweep(&params("p = \"segment(0)\"")).is_err());
    }
}
