//! Acceptance criteria 1 to 12, one PASS/FAIL line each.

use std::f64::consts::LN_2;
use std::path::Path;
use std::time::{Duration, Instant};

use ganlab::experiments::{optimal_d, vanishing_gradient, Experiment};
use ganlab::table::Table;
use ganlab::{run, verify, ConfigFile, Params};
use ganlab_core::distributions::{AnalyticDistribution, Gaussian1D, GaussianMixture2D, Grid, Histogram};
use ganlab_core::divergences::{em_bruteforce, em_recurrence, parallel_lines_table};
use ganlab_core::dynamics::{simulate, GameState, UpdateRule};
use ganlab_core::gan::{loss_js_identity_check, mode_coverage, Critic, GanMode, TrainConfig, TrainerState};
use ganlab_core::nn::gradcheck::{grad_check, mse_loss};
use ganlab_core::nn::{Activation, Layer, Model, Network};
use ganlab_core::rng::Stream;
use ganlab_core::Matrix;

const SEC: Duration = Duration::from_secs(1);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn params(experiment: Experiment, toml: &str, seed: u64) -> Params {
    let f = ConfigFile::from_toml(toml).unwrap();
    Params::resolve(experiment.name(), &experiment.defaults(), &f, Some(seed)).unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn c1() -> Outcome {
    let r = em_recurrence(&Histogram::from_counts(&[3, 2, 1, 4]), &Histogram::from_counts(&[1, 2, 4, 3])).unwrap();
    outcome(r.distance == 5.0 && r.deltas == [2.0, 2.0, -1.0, 0.0], format!("W={} delta={:?}", r.distance, r.deltas))
}

fn compositions(len: usize, mass: u32) -> Vec<Vec<u32>> {
    if len == 1 {
        return vec![vec![mass]];
    }
    (0..=mass)
        .flat_map(|first| {
            compositions(len - 1, mass - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn c2() -> Outcome {
    let mut pairs = 0;
    let mut mismatches = 0;
    for len in 1..=4 {
        for mass in 1..=8 {
            let all = compositions(len, mass);
            for p in &all {
                for q in &all {
                    let rec = em_recurrence(&Histogram::from_counts(p), &Histogram::from_counts(q));
                    let brute = em_bruteforce(p, q);
                    match (rec, brute) {
                        (Ok(r), Ok((cost, _))) if r.distance == cost => {}
                        _ => mismatches += 1,
                    }
                    pairs += 1;
                }
            }
        }
    }
    outcome(mismatches == 0, format!("{pairs} pairs, {mismatches} mismatches"))
}

fn c3() -> Outcome {
    let zero = parallel_lines_table(0.0).unwrap();
    let mut ok = zero.kl_pq.as_nats() == 0.0 && zero.kl_qp.as_nats() == 0.0 && zero.js.as_nats() == 0.0 && zero.w == 0.0;
    for k in 1..=100 {
        let theta = k as f64 / 100.0;
        let r = parallel_lines_table(theta).unwrap();
        ok &= r.kl_pq.as_nats() == f64::INFINITY
            && r.kl_qp.as_nats() == f64::INFINITY
            && r.js.as_nats() == LN_2
            && r.w == theta;
    }
    outcome(ok, "theta = 0 and 0.01..1 in steps of 0.01")
}

fn c4() -> Outcome {
    let p: AnalyticDistribution = Gaussian1D::new(0.3, 1.2).unwrap().into();
    let same = loss_js_identity_check(&p, &p, &Grid::covering(&p).unwrap()).unwrap();
    let opt_err = (same.lhs + 2.0 * LN_2).abs();
    let mut rng = Stream::new(4, 0);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a: AnalyticDistribution = Gaussian1D::new(rng.uniform_range(-3.0, 3.0), rng.uniform_range(0.3, 3.0)).unwrap().into();
        let b: AnalyticDistribution = Gaussian1D::new(rng.uniform_range(-3.0, 3.0), rng.uniform_range(0.3, 3.0)).unwrap().into();
        let c = loss_js_identity_check(&a, &b, &Grid::covering_both(&a, &b).unwrap()).unwrap();
        worst = worst.max(c.gap);
    }
    outcome(opt_err < 1e-6 && worst < 1e-6, format!("|L* + 2 ln 2| = {opt_err:.2e}, max gap {worst:.2e}"))
}

fn c5() -> Outcome {
    let p = optimal_d::probe(&params(Experiment::OptimalD, "", 1)).unwrap();
    let err = p.mean_abs_err();
    outcome(err < 0.05, format!("mean |D - D*| = {err:.4}"))
}

fn c6() -> Outcome {
    let t = simulate(GameState::new(1.0, 1.0, 0.1).unwrap(), 1000, UpdateRule::Simultaneous);
    let r = t.radii();
    let step_ratio = 1.01f64.sqrt();
    let worst = r.windows(2).map(|w| ((w[1] / w[0]) / step_ratio - 1.0).abs()).fold(0.0, f64::max);
    let total = ((r[1000] / r[0]) / 1.01f64.powi(500) - 1.0).abs();
    outcome(worst < 1e-9 && total < 1e-6, format!("max per-step rel err {worst:.2e}, r_1000/r_0 rel err {total:.2e}"))
}

fn c7() -> Outcome {
    let runs = vanishing_gradient::probe_all(&params(Experiment::VanishingGradient, "", 1)).unwrap();
    let ratios = |m: GanMode| runs.iter().filter(|r| r.mode == m).map(|r| r.ratio()).collect::<Vec<_>>();
    let v = ratios(GanMode::Vanilla);
    let w = ratios(GanMode::Wgan);
    let v_ok = v.iter().filter(|&&r| r < 1e-2).count() * 2 > v.len();
    let w_ok = w.iter().filter(|&&r| r > 1e-1).count() * 2 > w.len();
    let fmt = |v: &[f64]| v.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>().join(" ");
    outcome(v_ok && w_ok, format!("vanilla ratios [{}], wgan ratios [{}]", fmt(&v), fmt(&w)))
}

fn c8() -> Outcome {
    let mut rng = Stream::new(8, 0);
    let mut batch = |rows: usize, cols: usize| {
        Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.uniform_range(-1.5, 1.5)).collect()).unwrap()
    };
    let mut init = Stream::new(8, 1);
    let mut models: Vec<(&str, Box<dyn Model>, usize)> = vec![
        ("generator 2-64-64-2 tanh", Box::new(Network::mlp(&[2, 64, 64, 2], Activation::Tanh, Activation::Identity, &mut init).unwrap()), 2),
        ("wgan critic 2-64-64-1 relu", Box::new(Network::mlp(&[2, 64, 64, 1], Activation::Relu, Activation::Identity, &mut init).unwrap()), 2),
        ("vanilla D 2-64-64-1 relu/sigmoid", Box::new(Network::mlp(&[2, 64, 64, 1], Activation::Relu, Activation::Sigmoid, &mut init).unwrap()), 2),
        ("critic 1-64-64-1 relu", Box::new(Network::mlp(&[1, 64, 64, 1], Activation::Relu, Activation::Identity, &mut init).unwrap()), 1),
        ("optimal D 1-32-32-1 tanh/sigmoid", Box::new(Network::mlp(&[1, 32, 32, 1], Activation::Tanh, Activation::Sigmoid, &mut init).unwrap()), 1),
        ("critic with minibatch layer", Box::new(Critic::mlp(&[2, 16, 16, 1], Activation::Relu, Activation::Identity, true, &mut init).unwrap()), 2),
        ("affine generator", Box::new(Network::from_layers(vec![Layer::new(1, 1, vec![1.3], vec![0.2], Activation::Identity).unwrap()]).unwrap()), 1),
        ("segment generator", Box::new(Network::from_layers(vec![Layer::new(1, 2, vec![0.0, 1.0], vec![0.5, 0.0], Activation::Identity).unwrap()]).unwrap()), 1),
    ];
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for (name, model, in_dim) in models.iter_mut() {
        let x = batch(8, *in_dim);
        let target = batch(8, model.output_dim());
        let report = grad_check(model.as_mut(), mse_loss(&target), &x, 1e-5, 1e-4);
        worst = worst.max(report.max_rel_error);
        if !report.passed() {
            details.push(format!("{name}: {:.2e}", report.max_rel_error));
        }
    }
    let detail = if details.is_empty() {
        format!("{} architectures, max rel err {worst:.2e}", models.len())
    } else {
        details.join("; ")
    };
    outcome(worst < 1e-4, detail)
}

fn c9() -> Outcome {
    let c = 0.01;
    let mut cfg = TrainConfig::wgan(9);
    cfg.batch_size = 32;
    cfg.noise_dim = 2;
    cfg.g_hidden = vec![32];
    cfg.d_hidden = vec![32, 32];
    cfg.d_optimizer = ganlab_core::nn::OptimizerConfig::rmsprop(1e-2);
    let target: AnalyticDistribution = GaussianMixture2D::ring(8, 2.0, 0.05).unwrap().into();
    let mut t = TrainerState::new(cfg, target).unwrap();
    let mut ok = true;
    for _ in 0..100 {
        t.train_step().unwrap();
        let params = t.critic().params();
        ok &= params.iter().all(|p| p.abs() <= c);
        let mut again = t.critic().clone();
        again.clip_weights(c);
        ok &= again.params() == params;
    }
    outcome(ok, format!("100 steps, final max |w| = {}", t.critic().max_abs_param()))
}

fn c10() -> Outcome {
    let mut rhos = Vec::new();
    let mut ratios = Vec::new();
    for seed in 1..=3 {
        let dir = tempfile::tempdir().unwrap();
        run(Experiment::Train, &params(Experiment::Train, "", seed), dir.path()).unwrap();
        let (rho, ratio) = verify::tracking(&Table::read(&dir.path().join("oracle.csv")).unwrap()).unwrap();
        rhos.push(rho);
        ratios.push(ratio);
    }
    let (rho, ratio) = (median(rhos), median(ratios));
    outcome(rho > 0.8 && ratio < 0.25, format!("median spearman {rho:.4}, median final/initial oracle {ratio:.4}"))
}

fn c11() -> Outcome {
    let ring = GaussianMixture2D::ring(8, 2.0, 0.05).unwrap();
    let centers: Vec<Vec<f64>> = ring.centers().iter().map(|c| c.to_vec()).collect();
    let target: AnalyticDistribution = ring.into();
    let samples = target.sample(&mut Stream::new(11, 0), 10_000);
    let full = mode_coverage(&samples, &centers, 0.15, 100).unwrap();
    let point = Matrix::from_rows(&vec![centers[3].clone(); 1000]);
    let single = mode_coverage(&point, &centers, 0.15, 10).unwrap();
    outcome(
        full.covered == 8 && full.hq_fraction > 0.95 && single.covered == 1,
        format!("ring: {} covered, hq {:.4}; single point: {} covered", full.covered, full.hq_fraction, single.covered),
    )
}

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn c12() -> Outcome {
    let short = [
        (Experiment::DivergenceSweep, ""),
        (Experiment::MinimaxSim, ""),
        (Experiment::EmDemo, ""),
        (Experiment::ParallelLines, ""),
        (Experiment::OptimalD, "steps = 500"),
        (Experiment::VanishingGradient, "d_steps = 200"),
        (Experiment::ModeCollapse, "steps = 300\neval_every = 100"),
        (Experiment::Train, "steps = 200"),
    ];
    let mut differing = Vec::new();
    for (e, toml) in short {
        let first = tempfile::tempdir().unwrap();
        run(e, &params(e, toml, 12), first.path()).unwrap();
        let file = ConfigFile::load(&first.path().join("manifest.json")).unwrap();
        let replay = Params::resolve(e.name(), &e.defaults(), &file, None).unwrap();
        let second = tempfile::tempdir().unwrap();
        run(e, &replay, second.path()).unwrap();
        let (a, b) = (csv_bytes(first.path()), csv_bytes(second.path()));
        if a.is_empty() || a != b {
            differing.push(e.name());
        }
    }
    let detail = if differing.is_empty() {
        "8 experiments replayed from manifest".to_string()
    } else {
        format!("differing: {differing:?}")
    };
    outcome(differing.is_empty(), detail)
}

fn main() {
    type Criterion = (u32, fn() -> Outcome, Duration);
    let criteria: [Criterion; 12] = [
        (1, c1, SEC / 1000),
        (2, c2, 60 * SEC),
        (3, c3, SEC),
        (4, c4, 30 * SEC),
        (5, c5, 120 * SEC),
        (6, c6, SEC),
        (7, c7, 300 * SEC),
        (8, c8, 30 * SEC),
        (9, c9, 30 * SEC),
        (10, c10, 300 * SEC),
        (11, c11, 10 * SEC),
        (12, c12, 300 * SEC),
    ];
    let mut failed = 0;
    for (n, f, budget) in criteria {
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let passed = o.passed && took <= budget;
        if !passed {
            failed += 1;
        }
        let verdict = if passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {n:>2}: {verdict}  {} [{:.3}s, budget {}s]",
            o.detail,
            took.as_secs_f64(),
            budget.as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
