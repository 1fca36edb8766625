//! Vanilla GAN and WGAN on a ring of Gaussians, reporting covered modes
//! over training and final samples from both generators.

use std::path::Path;

use rayon::prelude::*;

use ganlab_core::distributions::AnalyticDistribution;
use ganlab_core::gan::{mode_coverage, GanMode, TrainConfig, TrainerState};
use ganlab_core::rng::{streams, Stream};
use ganlab_core::Matrix;

use super::train::optimizer;
use super::Outputs;
use crate::dist;
use crate::error::{LabError, Result};
use crate::params::{choice, paper, ParamDef, Params};
use crate::plot::PlotKind;
use crate::table::{fmt_f64, Table};

pub const HEADER: [&str; 4] = ["mode", "step", "modes_covered", "hq_fraction"];

pub fn defaults() -> Vec<ParamDef> {
    vec![
        choice("target", "ring(8, 2, 0.05)"),
        choice("steps", 10_000),
        choice("eval_every", 1000),
        choice("eval_samples", 1000),
        choice("batch_size", 64),
        choice("noise.dim", 2),
        choice("hidden", vec![64, 64]),
        choice("vanilla.optimizer", "adam"),
        choice("vanilla.lr", 1e-3),
        paper("wgan.optimizer", "rmsprop"),
        paper("wgan.lr", 5e-5),
        paper("wgan.clip_c", 0.01),
        paper("wgan.n_critic", 5),
        choice("plot_samples", 500),
    ]
}

struct ModeRun {
    mode: GanMode,
    coverage: Vec<(u64, usize, f64)>,
    samples: Matrix,
}

fn train_mode(params: &Params, target: &AnalyticDistribution, mode: GanMode) -> Result<ModeRun> {
    let seed = params.seed();
    let (mut cfg, prefix) = match mode {
        GanMode::Vanilla => (TrainConfig::vanilla(seed), "vanilla"),
        GanMode::Wgan => (TrainConfig::wgan(seed), "wgan"),
    };
    let opt = optimizer(params, prefix)?;
    cfg.g_optimizer = opt;
    cfg.d_optimizer = opt;
    if mode == GanMode::Wgan {
        cfg.clip_c = params.f64("wgan.clip_c")?;
        cfg.n_critic = params.usize("wgan.n_critic")?;
    }
    cfg.batch_size = params.usize("batch_size")?;
    cfg.noise_dim = params.usize("noise.dim")?;
    cfg.g_hidden = params.usize_list("hidden")?;
    cfg.d_hidden = cfg.g_hidden.clone();
    cfg.total_steps = params.u64("steps")?;
    cfg.eval_every = params.u64("eval_every")?;
    cfg.eval_samples = params.usize("eval_samples")?;
    let mut state = TrainerState::new(cfg, target.clone())?;
    state.run()?;
    let coverage = state
        .metrics()
        .iter()
        .filter_map(|r| Some((r.step, r.modes_covered?, r.hq_fraction?)))
        .collect();
    let samples = state.sample_generator(params.usize("plot_samples")?, 0)?;
    Ok(ModeRun { mode, coverage, samples })
}

pub fn run(params: &Params, out: &Path) -> Result<Outputs> {
    let target = dist::parse("target", params.str("target")?, None)?;
    let AnalyticDistribution::Mixture2D(mix) = &target else {
        return Err(LabError::config("target", "expected ring(modes, radius, std)"));
    };
    let centers: Vec<Vec<f64>> = mix.centers().iter().map(|c| c.to_vec()).collect();
    let n_eval = params.usize("eval_samples")?;
    let reference = target.sample(&mut Stream::split(params.seed(), streams::EVAL, u64::MAX - 2), n_eval);
    let cov = mode_coverage(&reference, &centers, 3.0 * mix.components()[0].std, (n_eval / 100).max(1))?;

    let runs = [GanMode::Vanilla, GanMode::Wgan]
        .into_par_iter()
        .map(|m| train_mode(params, &target, m))
        .collect::<Result<Vec<_>>>()?;

    let mut t = Table::new(&HEADER);
    t.push(vec!["target".into(), "0".into(), cov.covered.to_string(), fmt_f64(cov.hq_fraction)]);
    for r in &runs {
        for (step, covered, hq) in &r.coverage {
            t.push(vec![r.mode.name().into(), step.to_string(), covered.to_string(), fmt_f64(*hq)]);
        }
    }
    let mut s = Table::new(&["source", "x", "y"]);
    let n_plot = params.usize("plot_samples")?;
    let target_plot = target.sample(&mut Stream::split(params.seed(), streams::EVAL, u64::MAX - 3), n_plot);
    let sources = std::iter::once(("target", &target_plot)).chain(runs.iter().map(|r| (r.mode.name(), &r.samples)));
    for (name, m) in sources {
        for row in m.iter_rows() {
            s.push(vec![name.into(), fmt_f64(row[0]), fmt_f64(row[1])]);
        }
    }
    let mut o = Outputs::default();
    o.emit(out, "mode_collapse", &t, None)?;
    o.emit(out, "mode_collapse_samples", &s, Some(PlotKind::Samples))?;
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ConfigFile;

    #[test]
    fn short_run_reports_both_modes() {
        let dir = tempfile::tempdir().unwrap();
        let f = ConfigFile::from_toml("steps = 4\neval_every = 2\nhidden = [8]\nplot_samples = 10").unwrap();
        let p = Params::resolve("mode_collapse", &defaults(), &f, Some(5)).unwrap();
        run(&p, dir.path()).unwrap();
        let t = Table::read(&dir.path().join("mode_collapse.csv")).unwrap();
        assert_eq!(t.text_column("mode").unwrap(), vec!["target", "vanilla_gan", "vanilla_gan", "wgan", "wgan"]);
        assert_eq!(t.rows[0][2], "8");
        let s = Table::read(&dir.path().join("mode_collapse_samples.csv")).unwrap();
        assert_eq!(s.rows.len(), 30);
    }

    #[test]
    fn one_dimensional_target_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let f = ConfigFile::from_toml("target = \"gaussian(0, 1)\"").unwrap();
        let p = Params::resolve("mode_collapse", &defaults(), &f, Some(5)).unwrap();
        assert!(matches!(run(&p, dir.path()), Err(LabError::Config { field, .. }) if field == "target"));
    }
}
