//! Re-checks a finished run directory against its stored CSVs.

use std::f64::consts::LN_2;
use std::fmt;
use std::path::{Path, PathBuf};

use ganlab_core::distributions::{AnalyticDistribution, Histogram};
use ganlab_core::divergences::em_recurrence;
use ganlab_core::gan::{optimal_discriminator, spearman};

use crate::dist;
use crate::error::{LabError, Result};
use crate::experiments::{optimal_d, vanishing_gradient, Experiment, MANIFEST};
use crate::params::{ConfigFile, Params};
use crate::table::{fmt_f64, Table};

pub const TRAIN_MIN_SPEARMAN: f64 = 0.8;
pub const TRAIN_MAX_FINAL_RATIO: f64 = 0.25;
pub const MODE_MIN_HQ: f64 = 0.95;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        if self.detail.is_empty() {
            write!(f, "{}: {verdict}", self.name)
        } else {
            write!(f, "{}: {verdict} ({})", self.name, self.detail)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: Experiment,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

/// Loads the manifest of `dir` and resolves its parameters.
pub fn load_run(dir: &Path) -> Result<(Experiment, Params)> {
    let path = dir.join(MANIFEST);
    if !path.exists() {
        return Err(LabError::Missing(vec![path]));
    }
    let file = ConfigFile::load(&path)?;
    let name = file
        .experiment
        .clone()
        .ok_or_else(|| LabError::config("experiment", "manifest does not name an experiment"))?;
    let experiment =
        Experiment::from_name(&name).ok_or_else(|| LabError::config("experiment", format!("unknown experiment `{name}`")))?;
    let params = Params::resolve(&name, &experiment.defaults(), &file, None)?;
    Ok((experiment, params))
}

fn read_all(dir: &Path, names: &[&str]) -> Result<Vec<Table>> {
    let paths: Vec<PathBuf> = names.iter().map(|n| dir.join(n)).collect();
    let missing: Vec<PathBuf> = paths.iter().filter(|p| !p.exists()).cloned().collect();
    if !missing.is_empty() {
        return Err(LabError::Missing(missing));
    }
    paths.iter().map(|p| Table::read(p)).collect()
}

fn schema(path: &str, t: &Table, cols: &[&str]) -> Result<()> {
    t.require(path, cols)
}

/// Runs every check for the experiment recorded in `dir`.
pub fn verify(dir: &Path) -> Result<Report> {
    let (experiment, params) = load_run(dir)?;
    let checks = match experiment {
        Experiment::DivergenceSweep => divergence_sweep(dir, &params)?,
        Experiment::MinimaxSim => minimax_sim(dir, &params)?,
        Experiment::EmDemo => em_demo(dir)?,
        Experiment::ParallelLines => parallel_lines(dir)?,
        Experiment::OptimalD => optimal_d_checks(dir, &params)?,
        Experiment::VanishingGradient => vanishing(dir)?,
        Experiment::ModeCollapse => mode_collapse(dir, &params)?,
        Experiment::Train => train(dir)?,
    };
    Ok(Report { experiment, checks })
}

fn divergence_sweep(dir: &Path, params: &Params) -> Result<Vec<Check>> {
    let [t] = <[Table; 1]>::try_from(read_all(dir, &["divergence_sweep.csv"])?).expect("one table");
    schema("divergence_sweep.csv", &t, &crate::experiments::divergence_sweep::HEADER)?;
    let ts = t.column_f64("theta_or_param")?;
    let kl_pq = t.column_f64("kl_pq")?;
    let kl_qp = t.column_f64("kl_qp")?;
    let js = t.column_f64("js_nats")?;
    let bits = t.column_f64("js_bits")?;
    let w = t.column_f64("w")?;
    let n = ts.len();
    let mut out = vec![
        check("rows present", n > 0, format!("{n} rows")),
        check(
            "KL non-negative",
            kl_pq.iter().chain(&kl_qp).all(|&v| v >= -1e-9),
            "",
        ),
        check("JS within [0, ln 2]", js.iter().all(|&v| (-1e-9..=LN_2 + 1e-9).contains(&v)), ""),
        check(
            "JS bits = nats / ln 2",
            js.iter().zip(&bits).all(|(a, b)| (a / LN_2 - b).abs() <= 1e-12),
            "",
        ),
        check("W non-negative", w.iter().all(|&v| v >= -1e-9), ""),
    ];
    // Unit-variance shift family: KL = t²/2 both ways, W = |t - m|.
    let p = dist::parse("p", params.str("p")?, None)?;
    let q_at = |t: f64| dist::parse("q", params.str("q")?, Some(t));
    if let AnalyticDistribution::Gaussian(gp) = p {
        let mut worst = 0.0f64;
        let mut applies = true;
        for i in 0..n {
            match q_at(ts[i])? {
                AnalyticDistribution::Gaussian(gq) if gq.std == gp.std => {
                    let d = (gq.mean - gp.mean) / gp.std;
                    worst = worst
                        .max((kl_pq[i] - d * d / 2.0).abs())
                        .max((kl_qp[i] - d * d / 2.0).abs())
                        .max((w[i] - (gq.mean - gp.mean).abs()).abs());
                }
                _ => applies = false,
            }
        }
        if applies {
            out.push(check("closed-form KL and W", worst < 1e-6, format!("max error {worst:.3e}")));
        }
    }
    Ok(out)
}

fn minimax_sim(dir: &Path, params: &Params) -> Result<Vec<Check>> {
    let [t] = <[Table; 1]>::try_from(read_all(dir, &["minimax_sim.csv"])?).expect("one table");
    schema("minimax_sim.csv", &t, &crate::experiments::minimax_sim::HEADER)?;
    let steps = t.column_f64("step")?;
    let x = t.column_f64("x")?;
    let y = t.column_f64("y")?;
    let r = t.column_f64("radius")?;
    let mut out = vec![
        check("initial row", steps.first() == Some(&0.0), ""),
        check(
            "radius = sqrt(x² + y²)",
            (0..r.len()).all(|i| (x[i].hypot(y[i]) - r[i]).abs() <= 1e-12 * r[i].max(1.0)),
            "",
        ),
    ];
    if params.str("rule")? == "simultaneous" && !r.is_empty() {
        let eta = params.f64("eta")?;
        let growth = (1.0 + eta * eta).sqrt();
        let mut worst = 0.0f64;
        for i in 0..r.len() {
            let expected = r[0] * growth.powf(steps[i]);
            worst = worst.max(((r[i] - expected) / expected).abs());
        }
        out.push(check(
            "radius law r_t = r_0 (1 + eta²)^(t/2)",
            worst < 1e-6,
            format!("max relative error {worst:.3e}"),
        ));
    }
    Ok(out)
}

fn em_demo(dir: &Path) -> Result<Vec<Check>> {
    let [t] = <[Table; 1]>::try_from(read_all(dir, &["em_demo.csv"])?).expect("one table");
    schema("em_demo.csv", &t, &crate::experiments::em_demo::HEADER)?;
    let p: Vec<u32> = t.column_f64("p")?.iter().map(|&v| v as u32).collect();
    let q: Vec<u32> = t.column_f64("q")?.iter().map(|&v| v as u32).collect();
    let deltas = t.column_f64("delta")?;
    let w = t.column_f64("w")?;
    let rec = em_recurrence(&Histogram::from_counts(&p), &Histogram::from_counts(&q))?;
    let stored = w.last().copied().unwrap_or(f64::NAN);
    let mut out = vec![
        check("delta recurrence", deltas == rec.deltas, ""),
        check(format!("EM={}", fmt_f64(rec.distance)), stored == rec.distance, format!("stored {}", fmt_f64(stored))),
    ];
    let plan = dir.join("em_plan.csv");
    if plan.exists() {
        let pt = Table::read(&plan)?;
        schema("em_plan.csv", &pt, &["from", "to", "amount", "cost"])?;
        let from = pt.column_f64("from")?;
        let to = pt.column_f64("to")?;
        let amount = pt.column_f64("amount")?;
        let cost: f64 = (0..from.len()).map(|i| amount[i] * (from[i] - to[i]).abs()).sum();
        out.push(check("transport plan cost = EM", cost == rec.distance, format!("plan cost {}", fmt_f64(cost))));
    }
    Ok(out)
}

fn parallel_lines(dir: &Path) -> Result<Vec<Check>> {
    let [t, e] = <[Table; 2]>::try_from(read_all(dir, &["parallel_lines.csv", "parallel_lines_empirical.csv"])?)
        .expect("two tables");
    schema("parallel_lines.csv", &t, &crate::experiments::divergence_sweep::HEADER)?;
    schema("parallel_lines_empirical.csv", &e, &["theta", "w_x", "w_y", "js_hist_nats"])?;
    let th = t.column_f64("theta_or_param")?;
    let kl_pq = t.column_f64("kl_pq")?;
    let kl_qp = t.column_f64("kl_qp")?;
    let js = t.column_f64("js_nats")?;
    let w = t.column_f64("w")?;
    let mut zero_ok = true;
    let mut apart_ok = true;
    for i in 0..th.len() {
        if th[i] == 0.0 {
            zero_ok &= kl_pq[i] == 0.0 && kl_qp[i] == 0.0 && js[i] == 0.0 && w[i] == 0.0;
        } else {
            apart_ok &= kl_pq[i] == f64::INFINITY && kl_qp[i] == f64::INFINITY && js[i] == LN_2 && w[i] == th[i].abs();
        }
    }
    let wx = e.column_f64("w_x")?;
    let eth = e.column_f64("theta")?;
    let worst = eth.iter().zip(&wx).map(|(a, b)| (a.abs() - b).abs()).fold(0.0, f64::max);
    Ok(vec![
        check("theta = 0 row all zeros", zero_ok, ""),
        check("theta != 0: KL = inf, JS = ln 2, W = |theta|", apart_ok, ""),
        check("empirical W_x = |theta|", worst < 1e-9, format!("max error {worst:.3e}")),
    ])
}

fn optimal_d_checks(dir: &Path, params: &Params) -> Result<Vec<Check>> {
    let [t] = <[Table; 1]>::try_from(read_all(dir, &["optimal_d.csv"])?).expect("one table");
    schema("optimal_d.csv", &t, &optimal_d::HEADER)?;
    let real = dist::parse("real", params.str("real")?, None)?;
    let fake = dist::parse("fake", params.str("fake")?, None)?;
    let xs = t.column_f64("x")?;
    let trained = t.column_f64("d_trained")?;
    let stored = t.column_f64("d_optimal")?;
    let mut worst = 0.0f64;
    let mut err = 0.0;
    for i in 0..xs.len() {
        let d = optimal_discriminator(&real, &fake, &[xs[i]])?;
        worst = worst.max((d - stored[i]).abs());
        err += (trained[i] - d).abs();
    }
    let mean = err / xs.len().max(1) as f64;
    Ok(vec![
        check("optimal D column matches p_r / (p_r + p_g)", worst < 1e-12, ""),
        check(
            format!("mean |D - D*| < {}", optimal_d::TOLERANCE),
            !xs.is_empty() && mean < optimal_d::TOLERANCE,
            format!("{mean:.4}"),
        ),
    ])
}

fn vanishing(dir: &Path) -> Result<Vec<Check>> {
    let [t] = <[Table; 1]>::try_from(read_all(dir, &["vanishing_gradient.csv"])?).expect("one table");
    schema("vanishing_gradient.csv", &t, &vanishing_gradient::HEADER)?;
    let modes = t.text_column("mode")?;
    let seeds = t.column_f64("seed")?;
    let norms = t.column_f64("grad_norm")?;
    // (mode, seed) -> (first, last) in file order.
    let mut series: Vec<(String, u64, f64, f64)> = Vec::new();
    for i in 0..modes.len() {
        let key = (modes[i].to_string(), seeds[i] as u64);
        match series.iter_mut().find(|s| s.0 == key.0 && s.1 == key.1) {
            Some(s) => s.3 = norms[i],
            None => series.push((key.0, key.1, norms[i], norms[i])),
        }
    }
    let mut out = Vec::new();
    for (mode, bound) in [("vanilla_gan", vanishing_gradient::VANILLA_MAX_RATIO), ("wgan", vanishing_gradient::WGAN_MIN_RATIO)] {
        let ratios: Vec<f64> = series.iter().filter(|s| s.0 == mode).map(|s| s.3 / s.2).collect();
        let ok = ratios
            .iter()
            .filter(|&&r| if mode == "wgan" { r > bound } else { r < bound })
            .count();
        let cmp = if mode == "wgan" { ">" } else { "<" };
        let listed: Vec<String> = ratios.iter().map(|r| format!("{r:.3e}")).collect();
        out.push(check(
            format!("{mode} grad ratio {cmp} {bound:e} for a majority of seeds"),
            !ratios.is_empty() && 2 * ok > ratios.len(),
            listed.join(", "),
        ));
    }
    Ok(out)
}

fn mode_collapse(dir: &Path, params: &Params) -> Result<Vec<Check>> {
    let [t, s] = <[Table; 2]>::try_from(read_all(dir, &["mode_collapse.csv", "mode_collapse_samples.csv"])?)
        .expect("two tables");
    schema("mode_collapse.csv", &t, &crate::experiments::mode_collapse::HEADER)?;
    schema("mode_collapse_samples.csv", &s, &["source", "x", "y"])?;
    let n_modes = match dist::parse("target", params.str("target")?, None)? {
        AnalyticDistribution::Mixture2D(m) => m.components().len(),
        _ => return Err(LabError::config("target", "expected a ring")),
    };
    let modes = t.text_column("mode")?;
    let covered = t.column_f64("modes_covered")?;
    let hq = t.column_f64("hq_fraction")?;
    let target = modes.iter().position(|&m| m == "target");
    let mut out = vec![match target {
        Some(i) => check(
            format!("target covers {n_modes} modes with hq > {MODE_MIN_HQ}"),
            covered[i] as usize == n_modes && hq[i] > MODE_MIN_HQ,
            format!("{} modes, hq {:.4}", covered[i], hq[i]),
        ),
        None => check("target sanity row", false, "missing"),
    }];
    for mode in ["vanilla_gan", "wgan"] {
        let last = (0..modes.len()).rev().find(|&i| modes[i] == mode);
        out.push(check(
            format!("{mode} coverage reported"),
            last.is_some(),
            last.map(|i| format!("{} of {n_modes} modes, hq {:.4}", covered[i], hq[i])).unwrap_or_default(),
        ));
    }
    Ok(out)
}

fn train(dir: &Path) -> Result<Vec<Check>> {
    let [m] = <[Table; 1]>::try_from(read_all(dir, &["metrics.csv"])?).expect("one table");
    schema("metrics.csv", &m, &crate::experiments::train::METRICS_HEADER)?;
    let finite = ["d_loss", "g_loss", "g_grad_norm"]
        .iter()
        .map(|c| m.column_f64(c))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .all(|col| col.iter().all(|v| v.is_finite()));
    let mut out = vec![check("losses finite", finite, format!("{} steps", m.rows.len()))];
    let oracle = dir.join("oracle.csv");
    if oracle.exists() && m.text_column("mode")?.first() == Some(&"wgan") {
        let o = Table::read(&oracle)?;
        schema("oracle.csv", &o, &["step", "w_estimate", "w_oracle"])?;
        let (rho, ratio) = tracking(&o)?;
        out.push(check(
            format!("spearman(estimate, oracle) > {TRAIN_MIN_SPEARMAN}"),
            rho > TRAIN_MIN_SPEARMAN,
            format!("{rho:.4}"),
        ));
        out.push(check(
            format!("final oracle < {TRAIN_MAX_FINAL_RATIO} x initial"),
            ratio < TRAIN_MAX_FINAL_RATIO,
            format!("ratio {ratio:.4}"),
        ));
    }
    Ok(out)
}

/// Spearman correlation between logged estimates and the oracle, and the
/// final-to-initial oracle ratio.
pub fn tracking(oracle: &Table) -> Result<(f64, f64)> {
    let est = oracle.column("w_estimate")?;
    let w = oracle.column_f64("w_oracle")?;
    let (a, b): (Vec<f64>, Vec<f64>) = est.iter().zip(&w).filter_map(|(e, w)| Some(((*e)?, *w))).unzip();
    let rho = if a.len() >= 2 { spearman(&a, &b)? } else { f64::NAN };
    let ratio = match (w.first(), w.last()) {
        (Some(&first), Some(&last)) if first > 0.0 => last / first,
        _ => f64::NAN,
    };
    Ok((rho, ratio))
}
